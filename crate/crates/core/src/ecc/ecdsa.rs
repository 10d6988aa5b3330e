//! ECDSA over secp256k1 with RFC 6979 deterministic nonces (HMAC-SHA256).
//!
//! Signatures are not normalised to low-s.

use std::fmt;

use hmac::{Hmac, KeyInit, Mac};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::Sha256;

use super::field::{Scalar, GROUP_ORDER};
use super::keys::PublicKey;
use super::point::{double_scalar_mul, scalar_mul, CurvePoint};
use super::EccError;
use crate::hashing::Digest256;
use crate::u256::U256;

type HmacSha256 = Hmac<Sha256>;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r: Scalar,
    pub s: Scalar,
}

impl Signature {
    pub const LEN: usize = 64;

    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.r.to_be_bytes());
        out[32..].copy_from_slice(&self.s.to_be_bytes());
        out
    }

    /// Parses `r || s`. Values at or above n are rejected; zero values parse but never verify.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EccError> {
        if bytes.len() != 64 {
            return Err(EccError::InvalidLength { expected: 64, actual: bytes.len() });
        }
        let part = |b: &[u8]| {
            Scalar::from_canonical(U256::from_be_slice(b).expect("32 bytes")).ok_or(EccError::InvalidSignature)
        };
        Ok(Signature { r: part(&bytes[..32])?, s: part(&bytes[32..])? })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature(r={}, s={})", self.r.value().to_hex(), self.s.value().to_hex())
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = hex::decode(&s).map_err(serde::de::Error::custom)?;
        Signature::from_bytes(&bytes).map_err(serde::de::Error::custom)
    }
}

fn hmac(key: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    for part in parts {
        mac.update(part);
    }
    mac.finalize().into_bytes().into()
}

/// Nonce candidates for RFC 6979, section 3.2, with qlen = hlen = 256.
struct NonceGenerator {
    k: [u8; 32],
    v: [u8; 32],
    first: bool,
}

impl NonceGenerator {
    fn new(secret: &Scalar, digest: &Digest256) -> Self {
        let x = secret.to_be_bytes();
        let h1 = Scalar::from_be_bytes_reduced(digest.as_bytes()).to_be_bytes();
        let mut v = [0x01u8; 32];
        let mut k = [0x00u8; 32];
        k = hmac(&k, &[&v, &[0x00], &x, &h1]);
        v = hmac(&k, &[&v]);
        k = hmac(&k, &[&v, &[0x01], &x, &h1]);
        v = hmac(&k, &[&v]);
        NonceGenerator { k, v, first: true }
    }

    fn next_nonce(&mut self) -> Scalar {
        loop {
            if !self.first {
                self.k = hmac(&self.k, &[&self.v, &[0x00]]);
                self.v = hmac(&self.k, &[&self.v]);
            }
            self.first = false;
            self.v = hmac(&self.k, &[&self.v]);
            let candidate = U256::from_be_bytes(&self.v);
            if !candidate.is_zero() && candidate < GROUP_ORDER {
                return Scalar::new(candidate);
            }
        }
    }
}

fn x_mod_n(p: &CurvePoint) -> Option<Scalar> {
    p.x().map(|x| Scalar::new(x.value()))
}

pub fn sign(secret: &Scalar, digest: &Digest256) -> Result<Signature, EccError> {
    if secret.is_zero() {
        return Err(EccError::ZeroKey);
    }
    let z = Scalar::from_be_bytes_reduced(digest.as_bytes());
    let mut nonces = NonceGenerator::new(secret, digest);
    loop {
        let k = nonces.next_nonce();
        let r = match x_mod_n(&scalar_mul(&k, &CurvePoint::generator())) {
            Some(r) if !r.is_zero() => r,
            _ => continue,
        };
        let s = k.invert() * (z + r * *secret);
        if !s.is_zero() {
            return Ok(Signature { r, s });
        }
    }
}

pub fn verify(key: &PublicKey, digest: &Digest256, sig: &Signature) -> bool {
    if sig.r.is_zero() || sig.s.is_zero() {
        return false;
    }
    let z = Scalar::from_be_bytes_reduced(digest.as_bytes());
    let w = sig.s.invert();
    let point = double_scalar_mul(&(z * w), &(sig.r * w), key.point());
    matches!(x_mod_n(&point), Some(x) if x == sig.r)
}
