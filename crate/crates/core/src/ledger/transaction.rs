//! Transactions and their canonical byte encoding.
//!
//! All integers are little-endian:
//!
//! ```text
//! 0x01 | is_coinbase u8 | input count u32
//!   per input:   txid [32] | index u32 | witness count u16
//!     per witness: pubkey [65] | r [32] | s [32]
//! output count u32
//!   per output:  amount u64 | script tag u8 | script body
//! ```
//!
//! Script bodies: P2PKH `hash160 [20]`; MultiSig `required u8 | n u8 | n * pubkey [65]`;
//! HeightLock `unlock_height u64 | inner script (tag + body)`; DataEmbed `len u8 | data`.

use serde::{Deserialize, Serialize};

use super::amount::Amount;
use super::script::LockingScript;
use super::LedgerError;
use crate::codec::{DecodeError, Reader};
use crate::ecc::{self, PublicKey, Scalar, Signature, PUBLIC_KEY_LEN};
use crate::hashing::{double_sha256, Digest256};

const TX_MARKER: u8 = 0x01;
const WITNESS_LEN: usize = PUBLIC_KEY_LEN + Signature::LEN;

/// Reference to output `index` of transaction `txid`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutPoint {
    pub txid: Digest256,
    pub index: u32,
}

impl OutPoint {
    pub fn new(txid: Digest256, index: u32) -> Self {
        OutPoint { txid, index }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub key: PublicKey,
    pub sig: Signature,
}

impl Witness {
    pub fn sign(secret: &Scalar, digest: &Digest256) -> Result<Witness, LedgerError> {
        let key = ecc::derive_public_key(secret)?;
        let sig = ecc::sign(secret, digest)?;
        Ok(Witness { key, sig })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TxInput {
    pub outpoint: OutPoint,
    pub witnesses: Vec<Witness>,
}

impl TxInput {
    pub fn unsigned(outpoint: OutPoint) -> Self {
        TxInput { outpoint, witnesses: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TxOutput {
    pub amount: Amount,
    pub script: LockingScript,
}

impl TxOutput {
    pub fn new(amount: Amount, script: LockingScript) -> Self {
        TxOutput { amount, script }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub inputs: Vec<TxInput>,
    pub outputs: Vec<TxOutput>,
    pub is_coinbase: bool,
}

impl Transaction {
    pub fn coinbase(outputs: Vec<TxOutput>) -> Self {
        Transaction { inputs: Vec::new(), outputs, is_coinbase: true }
    }

    pub fn spend(inputs: Vec<TxInput>, outputs: Vec<TxOutput>) -> Self {
        Transaction { inputs, outputs, is_coinbase: false }
    }

    /// Replaces every input's witnesses with signatures by `signers[i]`.
    ///
    /// The witness layout is part of the signing digest, so slots are laid out first.
    pub fn sign_inputs(&mut self, signers: &[&[Scalar]]) -> Result<(), LedgerError> {
        if signers.len() != self.inputs.len() {
            return Err(LedgerError::IndexOutOfRange(signers.len()));
        }
        let placeholder = Signature { r: Scalar::from_u64(1), s: Scalar::from_u64(1) };
        for (input, keys) in self.inputs.iter_mut().zip(signers) {
            input.witnesses = keys
                .iter()
                .map(|k| Ok(Witness { key: ecc::derive_public_key(k)?, sig: placeholder }))
                .collect::<Result<_, LedgerError>>()?;
        }
        let digest = double_sha256(&self.encode(true));
        for (input, keys) in self.inputs.iter_mut().zip(signers) {
            for (w, k) in input.witnesses.iter_mut().zip(keys.iter()) {
                w.sig = ecc::sign(k, &digest)?;
            }
        }
        Ok(())
    }

    /// Context-free rules: coinbase flag matches the absence of inputs, at least one
    /// output, scripts within limits, data outputs carry no value, no overflow.
    pub fn check_structure(&self) -> Result<(), LedgerError> {
        if self.is_coinbase != self.inputs.is_empty() {
            return Err(LedgerError::Malformed("coinbase flag must match an empty input list"));
        }
        if self.outputs.is_empty() {
            return Err(LedgerError::Malformed("transaction has no outputs"));
        }
        for out in &self.outputs {
            out.script.check()?;
            if out.script.is_unspendable() && out.amount != Amount::ZERO {
                return Err(LedgerError::Malformed("data output must carry zero value"));
            }
        }
        self.output_total()?;
        Ok(())
    }

    pub fn output_total(&self) -> Result<Amount, LedgerError> {
        Amount::checked_sum(self.outputs.iter().map(|o| o.amount)).ok_or(LedgerError::AmountOverflow)
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.encode(false)
    }

    fn encode(&self, blank_witnesses: bool) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.inputs.len() * 40 + self.outputs.len() * 32);
        out.push(TX_MARKER);
        out.push(self.is_coinbase as u8);
        out.extend_from_slice(&(self.inputs.len() as u32).to_le_bytes());
        for input in &self.inputs {
            out.extend_from_slice(input.outpoint.txid.as_bytes());
            out.extend_from_slice(&input.outpoint.index.to_le_bytes());
            out.extend_from_slice(&(input.witnesses.len() as u16).to_le_bytes());
            for w in &input.witnesses {
                if blank_witnesses {
                    out.extend_from_slice(&[0u8; WITNESS_LEN]);
                } else {
                    out.extend_from_slice(&w.key.to_bytes());
                    out.extend_from_slice(&w.sig.to_bytes());
                }
            }
        }
        out.extend_from_slice(&(self.outputs.len() as u32).to_le_bytes());
        for output in &self.outputs {
            out.extend_from_slice(&output.amount.to_sat().to_le_bytes());
            output.script.encode_into(&mut out);
        }
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let tx = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(tx)
    }

    pub(crate) fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        if r.u8()? != TX_MARKER {
            return Err(r.invalid("transaction marker"));
        }
        let is_coinbase = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(r.invalid("coinbase flag")),
        };
        let n_inputs = r.u32()?;
        let mut inputs = Vec::new();
        for _ in 0..n_inputs {
            let txid = Digest256(r.array()?);
            let index = r.u32()?;
            let n_witnesses = r.u16()?;
            let mut witnesses = Vec::new();
            for _ in 0..n_witnesses {
                let key = PublicKey::from_bytes(r.take(PUBLIC_KEY_LEN)?).map_err(|_| r.invalid("public key"))?;
                let sig = Signature::from_bytes(r.take(Signature::LEN)?).map_err(|_| r.invalid("signature"))?;
                witnesses.push(Witness { key, sig });
            }
            inputs.push(TxInput { outpoint: OutPoint { txid, index }, witnesses });
        }
        let n_outputs = r.u32()?;
        let mut outputs = Vec::new();
        for _ in 0..n_outputs {
            let amount = Amount::from_sat(r.u64()?).ok_or_else(|| r.invalid("amount"))?;
            let script = LockingScript::decode_from(r)?;
            outputs.push(TxOutput { amount, script });
        }
        Ok(Transaction { inputs, outputs, is_coinbase })
    }
}

/// Double SHA-256 of the canonical encoding.
pub fn txid(tx: &Transaction) -> Digest256 {
    double_sha256(&tx.serialize())
}

/// The digest every witness of `tx` signs: the encoding with each witness zeroed.
///
/// One digest covers all inputs; `input_index` is only range-checked.
pub fn signing_digest(tx: &Transaction, input_index: usize) -> Result<Digest256, LedgerError> {
    if input_index >= tx.inputs.len() {
        return Err(LedgerError::IndexOutOfRange(input_index));
    }
    Ok(double_sha256(&tx.encode(true)))
}
