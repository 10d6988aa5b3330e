use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::field::{FieldElement, Scalar};
use super::point::{scalar_mul, CurvePoint};
use super::EccError;
use crate::u256::U256;

/// Length of the uncompressed public key encoding `04 || x || y`.
pub const PUBLIC_KEY_LEN: usize = 65;

/// Maps 32 bytes of caller-supplied entropy to a private key.
///
/// The bytes are read as a big-endian integer and reduced modulo n; a result of zero
/// is rejected and the caller should draw fresh entropy.
pub fn generate_private_key(entropy: &[u8; 32]) -> Result<Scalar, EccError> {
    let k = Scalar::from_be_bytes_reduced(entropy);
    if k.is_zero() {
        return Err(EccError::ZeroKey);
    }
    Ok(k)
}

/// A public key: a point on the curve other than infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicKey {
    point: CurvePoint,
}

pub fn derive_public_key(k: &Scalar) -> Result<PublicKey, EccError> {
    if k.is_zero() {
        return Err(EccError::ZeroKey);
    }
    Ok(PublicKey { point: scalar_mul(k, &CurvePoint::generator()) })
}

impl PublicKey {
    pub fn from_point(point: CurvePoint) -> Result<Self, EccError> {
        if point.is_infinity() || !point.is_on_curve() {
            return Err(EccError::InvalidPublicKey);
        }
        Ok(PublicKey { point })
    }

    pub fn point(&self) -> &CurvePoint {
        &self.point
    }

    /// `0x04 || x || y`, coordinates as 32-byte big-endian integers.
    pub fn to_bytes(&self) -> [u8; PUBLIC_KEY_LEN] {
        let mut out = [0u8; PUBLIC_KEY_LEN];
        out[0] = 0x04;
        if let CurvePoint::Affine { x, y } = self.point {
            out[1..33].copy_from_slice(&x.to_be_bytes());
            out[33..].copy_from_slice(&y.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EccError> {
        if bytes.len() != PUBLIC_KEY_LEN {
            return Err(EccError::InvalidLength { expected: PUBLIC_KEY_LEN, actual: bytes.len() });
        }
        if bytes[0] != 0x04 {
            return Err(EccError::InvalidPublicKey);
        }
        let coord = |range: std::ops::Range<usize>| {
            let v = U256::from_be_slice(&bytes[range]).expect("32 bytes");
            FieldElement::from_canonical(v).ok_or(EccError::InvalidPublicKey)
        };
        let point = CurvePoint::from_affine(coord(1..33)?, coord(33..65)?).ok_or(EccError::InvalidPublicKey)?;
        PublicKey::from_point(point)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", self.to_hex())
    }
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = hex::decode(&s).map_err(serde::de::Error::custom)?;
        PublicKey::from_bytes(&bytes).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::field::GROUP_ORDER;

    fn be(v: U256) -> [u8; 32] {
        v.to_be_bytes()
    }

    #[test]
    fn entropy_mapping() {
        assert_eq!(generate_private_key(&be(U256::ONE)), Ok(Scalar::ONE));
        assert_eq!(generate_private_key(&be(GROUP_ORDER)), Err(EccError::ZeroKey));
        assert_eq!(generate_private_key(&[0u8; 32]), Err(EccError::ZeroKey));
        let n_plus_5 = GROUP_ORDER.overflowing_add(&U256::from_u64(5)).0;
        assert_eq!(generate_private_key(&be(n_plus_5)), Ok(Scalar::from_u64(5)));
    }

    #[test]
    fn key_one_encodes_generator() {
        let pk = derive_public_key(&Scalar::ONE).unwrap();
        assert_eq!(
            pk.to_hex(),
            "0479be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798\
             483ada7726a3c4655da4fbfc0e1108a8fd17b448a68554199c47d08ffb10d4b8"
        );
        assert_eq!(derive_public_key(&Scalar::ZERO), Err(EccError::ZeroKey));
    }

    #[test]
    fn key_two_pow_255() {
        // reference point from python-ecdsa
        let k = Scalar::new(U256::ONE << 255);
        let pk = derive_public_key(&k).unwrap();
        assert_eq!(
            pk.to_hex(),
            "04b23790a42be63e1b251ad6c94fdef07271ec0aada31db6c3e8bd32043f8be384\
             fc6b694919d55edbe8d50f88aa81f94517f004f4149ecb58d10a473deb19880e"
        );
    }

    #[test]
    fn parse_rejects_bad_encodings() {
        let pk = derive_public_key(&Scalar::from_u64(77)).unwrap();
        let bytes = pk.to_bytes();
        assert_eq!(PublicKey::from_bytes(&bytes), Ok(pk));
        assert!(PublicKey::from_bytes(&bytes[..64]).is_err());
        let mut wrong_prefix = bytes;
        wrong_prefix[0] = 0x02;
        assert_eq!(PublicKey::from_bytes(&wrong_prefix), Err(EccError::InvalidPublicKey));
        let mut off_curve = bytes;
        off_curve[64] ^= 1;
        assert_eq!(PublicKey::from_bytes(&off_curve), Err(EccError::InvalidPublicKey));
    }
}
