use std::fmt;
use std::str::FromStr;

use super::base58::{base58check_decode, base58check_encode};
use super::keys::PublicKey;
use super::EccError;
use crate::hashing::{hash160, Digest160};

/// Version byte of ordinary pay-to-key-hash addresses; encodes with a leading '1'.
pub const DEFAULT_VERSION: u8 = 0x00;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Address {
    pub version: u8,
    pub payload: Digest160,
    text: String,
}

impl Address {
    pub fn new(version: u8, payload: Digest160) -> Self {
        let text = base58check_encode(version, payload.as_bytes()).expect("20-byte payload");
        Address { version, payload, text }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn derive_address(key: &PublicKey, version: u8) -> Address {
    Address::new(version, hash160(&key.to_bytes()))
}

impl FromStr for Address {
    type Err = EccError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (version, payload) = base58check_decode(s)?;
        let payload: [u8; 20] = payload
            .as_slice()
            .try_into()
            .map_err(|_| EccError::InvalidLength { expected: 20, actual: payload.len() })?;
        Ok(Address { version, payload: Digest160(payload), text: s.to_string() })
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.text)
    }
}
