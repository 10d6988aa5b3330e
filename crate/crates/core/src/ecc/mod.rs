//! secp256k1 arithmetic, keys, ECDSA signatures and Base58Check addresses.
//!
//! Public keys use only the 65-byte uncompressed `04 || x || y` form. None of the
//! arithmetic here is constant-time: it is meant for protocol experiments and test
//! fixtures, not for guarding real funds.

mod address;
pub mod base58;
mod ecdsa;
mod field;
mod keys;
mod point;

use thiserror::Error;

pub use address::{derive_address, Address, DEFAULT_VERSION};
pub use base58::{base58check_decode, base58check_encode};
pub use ecdsa::{sign, verify, Signature};
pub use field::{FieldElement, Scalar, FIELD_PRIME, GROUP_ORDER};
pub use keys::{derive_public_key, generate_private_key, PublicKey, PUBLIC_KEY_LEN};
pub use point::{integer_mul, point_add, scalar_mul, CurvePoint, CURVE_B};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EccError {
    #[error("private key is zero")]
    ZeroKey,
    #[error("invalid public key")]
    InvalidPublicKey,
    #[error("invalid signature encoding")]
    InvalidSignature,
    #[error("expected {expected} bytes, got {actual}")]
    InvalidLength { expected: usize, actual: usize },
    #[error("character {0:?} is not in the base58 alphabet")]
    BadCharacter(char),
    #[error("base58check checksum mismatch")]
    BadChecksum,
    #[error("base58check string too short")]
    TooShort,
    #[error("payload of {0} bytes exceeds the 64-byte limit")]
    PayloadTooLong(usize),
}
