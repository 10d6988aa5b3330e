use serde::{Deserialize, Serialize};

use super::LedgerError;
use crate::codec::{DecodeError, Reader};
use crate::ecc::{PublicKey, PUBLIC_KEY_LEN};
use crate::hashing::Digest160;

pub const MAX_MULTISIG_KEYS: usize = 15;
pub const MAX_EMBED_LEN: usize = 80;

const TAG_P2PKH: u8 = 0x01;
const TAG_MULTISIG: u8 = 0x02;
const TAG_HEIGHT_LOCK: u8 = 0x03;
const TAG_DATA_EMBED: u8 = 0x04;

/// Spending condition attached to an output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LockingScript {
    /// One signature by a key whose hash160 equals the payload.
    PayToPubKeyHash(Digest160),
    /// `required` distinct signatures from `keys`.
    MultiSig { required: u8, keys: Vec<PublicKey> },
    /// `inner` becomes spendable at `unlock_height`.
    HeightLock { unlock_height: u64, inner: Box<LockingScript> },
    /// Arbitrary data; never spendable and never enters the UTXO set.
    DataEmbed(Vec<u8>),
}

impl LockingScript {
    pub fn is_unspendable(&self) -> bool {
        matches!(self, LockingScript::DataEmbed(_))
    }

    /// Structural limits: multisig thresholds, lock nesting and embed size.
    pub fn check(&self) -> Result<(), LedgerError> {
        match self {
            LockingScript::PayToPubKeyHash(_) => Ok(()),
            LockingScript::MultiSig { required, keys } => {
                let m = *required as usize;
                if m == 0 || m > keys.len() || keys.len() > MAX_MULTISIG_KEYS {
                    return Err(LedgerError::InvalidScript("multisig needs 1 <= required <= keys <= 15"));
                }
                Ok(())
            }
            LockingScript::HeightLock { inner, .. } => match **inner {
                LockingScript::HeightLock { .. } => Err(LedgerError::InvalidScript("nested height lock")),
                LockingScript::DataEmbed(_) => Err(LedgerError::InvalidScript("height lock over data")),
                _ => inner.check(),
            },
            LockingScript::DataEmbed(data) if data.len() > MAX_EMBED_LEN => {
                Err(LedgerError::InvalidScript("embedded data exceeds 80 bytes"))
            }
            LockingScript::DataEmbed(_) => Ok(()),
        }
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            LockingScript::PayToPubKeyHash(payload) => {
                out.push(TAG_P2PKH);
                out.extend_from_slice(payload.as_bytes());
            }
            LockingScript::MultiSig { required, keys } => {
                out.push(TAG_MULTISIG);
                out.push(*required);
                out.push(keys.len() as u8);
                for key in keys {
                    out.extend_from_slice(&key.to_bytes());
                }
            }
            LockingScript::HeightLock { unlock_height, inner } => {
                out.push(TAG_HEIGHT_LOCK);
                out.extend_from_slice(&unlock_height.to_le_bytes());
                inner.encode_into(out);
            }
            LockingScript::DataEmbed(data) => {
                out.push(TAG_DATA_EMBED);
                out.push(data.len() as u8);
                out.extend_from_slice(data);
            }
        }
    }

    pub(crate) fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Self::decode_nested(r, 0)
    }

    fn decode_nested(r: &mut Reader<'_>, depth: usize) -> Result<Self, DecodeError> {
        let at = r.position();
        let script = match r.u8()? {
            TAG_P2PKH => LockingScript::PayToPubKeyHash(Digest160(r.array()?)),
            TAG_MULTISIG => {
                let required = r.u8()?;
                let count = r.u8()? as usize;
                let keys = (0..count)
                    .map(|_| {
                        let bytes = r.take(PUBLIC_KEY_LEN)?;
                        PublicKey::from_bytes(bytes).map_err(|_| r.invalid("public key"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                LockingScript::MultiSig { required, keys }
            }
            TAG_HEIGHT_LOCK if depth == 0 => {
                let unlock_height = r.u64()?;
                let inner = Box::new(Self::decode_nested(r, depth + 1)?);
                LockingScript::HeightLock { unlock_height, inner }
            }
            TAG_DATA_EMBED => {
                let len = r.u8()? as usize;
                LockingScript::DataEmbed(r.take(len)?.to_vec())
            }
            _ => return Err(DecodeError::Invalid { what: "script tag", offset: at }),
        };
        Ok(script)
    }
}
