//! SHA-256, RIPEMD-160 and the Merkle commitment over a block's transaction ids.
//!
//! The tree is built by padding the leaf list once, up front, to the next power of
//! two by repeating the last leaf. Deployed Bitcoin instead duplicates the last node
//! of every odd level; the two agree whenever the leaf count is already a power of
//! two and diverge otherwise (e.g. 5 leaves).

use std::fmt;

use ripemd::Ripemd160;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// A 256-bit digest. Ordering is that of a big-endian unsigned integer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest256(pub [u8; 32]);

/// A 160-bit digest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest160(pub [u8; 20]);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashError {
    #[error("merkle root of an empty transaction list")]
    EmptyList,
    #[error("invalid hex digest: {0}")]
    BadHex(String),
}

macro_rules! digest_common {
    ($name:ident, $len:expr) => {
        impl $name {
            pub const LEN: usize = $len;

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }

            pub fn from_hex(s: &str) -> Result<Self, HashError> {
                let mut out = [0u8; $len];
                hex::decode_to_slice(s, &mut out).map_err(|_| HashError::BadHex(s.to_string()))?;
                Ok(Self(out))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.to_hex())
            }
        }

        impl AsRef<[u8]> for $name {
            fn as_ref(&self) -> &[u8] {
                &self.0
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                Self::from_hex(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

digest_common!(Digest256, 32);
digest_common!(Digest160, 20);

impl Digest256 {
    pub const ZERO: Digest256 = Digest256([0u8; 32]);
}

pub fn sha256(data: &[u8]) -> Digest256 {
    Digest256(Sha256::digest(data).into())
}

/// SHA-256 applied twice; used for block headers, txids, Merkle nodes and checksums.
pub fn double_sha256(data: &[u8]) -> Digest256 {
    sha256(&sha256(data).0)
}

pub fn ripemd160(data: &[u8]) -> Digest160 {
    Digest160(Ripemd160::digest(data).into())
}

/// RIPEMD-160 of SHA-256; the short form of a public key.
pub fn hash160(data: &[u8]) -> Digest160 {
    ripemd160(&sha256(data).0)
}

fn hash_pair(left: &Digest256, right: &Digest256) -> Digest256 {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(&left.0);
    buf[32..].copy_from_slice(&right.0);
    double_sha256(&buf)
}

/// Merkle root of an ordered list of transaction ids.
///
/// A single leaf is its own root. Otherwise the list is padded to a power of two by
/// repeating its last element and adjacent pairs are double-hashed level by level.
pub fn merkle_root(txids: &[Digest256]) -> Result<Digest256, HashError> {
    let mut count = 0;
    merkle_root_counting(txids, &mut count)
}

/// Same as [`merkle_root`], adding the number of internal node hashes to `hashes`.
pub fn merkle_root_counting(txids: &[Digest256], hashes: &mut usize) -> Result<Digest256, HashError> {
    let last = *txids.last().ok_or(HashError::EmptyList)?;
    let width = txids.len().next_power_of_two();
    let mut level: Vec<Digest256> = Vec::with_capacity(width);
    level.extend_from_slice(txids);
    level.resize(width, last);

    while level.len() > 1 {
        level = level
            .chunks_exact(2)
            .map(|pair| {
                *hashes += 1;
                hash_pair(&pair[0], &pair[1])
            })
            .collect();
    }
    Ok(level[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(s: &str) -> Digest256 {
        sha256(s.as_bytes())
    }

    #[test]
    fn sha256_vectors() {
        assert_eq!(
            sha256(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            sha256(b"").to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn double_sha256_fixtures() {
        assert_eq!(double_sha256(b""), sha256(&sha256(b"").0));
        assert_eq!(
            double_sha256(b"").to_hex(),
            "5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456"
        );
        assert_eq!(
            double_sha256(b"hello").to_hex(),
            "9595c9df90075148eb06860365df33584b75bff782a510c6cd4883a419833d50"
        );
    }

    #[test]
    fn hash160_fixtures() {
        assert_eq!(hash160(b""), ripemd160(&sha256(b"").0));
        assert_eq!(hash160(b"").to_hex(), "b472a266d0bd89c13706a4132ccfb16f7c3b9fcb");
        assert_eq!(hash160(b"abc").to_hex(), "bb1be98c142444d7a56aa3981c3942a978e4dc33");
        for len in [0usize, 1, 55, 56, 64, 1000, 10_000] {
            assert_eq!(hash160(&vec![7u8; len]).as_bytes().len(), 20);
        }
    }

    #[test]
    fn merkle_fixtures() {
        let (a, b, c) = (leaf("a"), leaf("b"), leaf("c"));
        assert_eq!(merkle_root(&[a]).unwrap(), a);
        assert_eq!(
            merkle_root(&[a, b]).unwrap().to_hex(),
            "029fd80ca2dd66e7c527428fc148e812a9d99a5e41483f28892ef9013eee4a19"
        );
        assert_eq!(
            merkle_root(&[a, b, c]).unwrap().to_hex(),
            "bd26024cc30d3da0b368d88e3183968d1da0f746bcb2c7e287499396f1e0267d"
        );
        assert_eq!(merkle_root(&[a, b, c]).unwrap(), merkle_root(&[a, b, c, c]).unwrap());
    }

    #[test]
    fn merkle_empty_is_error() {
        assert_eq!(merkle_root(&[]), Err(HashError::EmptyList));
    }

    #[test]
    fn merkle_hash_count() {
        for n in 1..=33usize {
            let leaves: Vec<_> = (0..n).map(|i| leaf(&i.to_string())).collect();
            let mut count = 0;
            merkle_root_counting(&leaves, &mut count).unwrap();
            assert_eq!(count, n.next_power_of_two() - 1, "n = {n}");
        }
    }

    #[test]
    fn hex_round_trip() {
        let d = leaf("x");
        assert_eq!(Digest256::from_hex(&d.to_hex()).unwrap(), d);
        assert!(Digest256::from_hex("zz").is_err());
    }
}
