use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::u256::{Modulus, U256};

/// `p = 2^256 - 2^32 - 2^9 - 2^8 - 2^7 - 2^6 - 2^4 - 1`
pub const FIELD_PRIME: U256 = U256([
    0xFFFF_FFFE_FFFF_FC2F,
    0xFFFF_FFFF_FFFF_FFFF,
    0xFFFF_FFFF_FFFF_FFFF,
    0xFFFF_FFFF_FFFF_FFFF,
]);

/// Order of the group generated by the base point (SEC 2, secp256k1).
pub const GROUP_ORDER: U256 = U256([
    0xBFD2_5E8C_D036_4141,
    0xBAAE_DCE6_AF48_A03B,
    0xFFFF_FFFF_FFFF_FFFE,
    0xFFFF_FFFF_FFFF_FFFF,
]);

const FIELD: Modulus = Modulus::new(FIELD_PRIME, U256([0x1_0000_03D1, 0, 0, 0]));
const ORDER: Modulus = Modulus::new(
    GROUP_ORDER,
    U256([0x402D_A173_2FC9_BEBF, 0x4551_2319_50B7_5FC4, 0x1, 0]),
);

/// An element of the prime field F_p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement(U256);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(U256::ZERO);
    pub const ONE: FieldElement = FieldElement(U256::ONE);

    /// Reduces `v` modulo p.
    pub fn new(v: U256) -> Self {
        FieldElement(FIELD.reduce(&v))
    }

    /// `None` unless `v < p`.
    pub fn from_canonical(v: U256) -> Option<Self> {
        (v < FIELD_PRIME).then_some(FieldElement(v))
    }

    pub fn from_u64(v: u64) -> Self {
        FieldElement(U256::from_u64(v))
    }

    pub fn value(&self) -> U256 {
        self.0
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        self.0.to_be_bytes()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    pub fn pow(&self, exp: &U256) -> Self {
        FieldElement(FIELD.pow(&self.0, exp))
    }

    /// Multiplicative inverse, `a^(p-2)`. Zero maps to zero.
    pub fn invert(&self) -> Self {
        FieldElement(FIELD.inv(&self.0))
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        FieldElement(FIELD.add(&self.0, &rhs.0))
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        FieldElement(FIELD.sub(&self.0, &rhs.0))
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        FieldElement(FIELD.mul(&self.0, &rhs.0))
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        FieldElement(FIELD.neg(&self.0))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({})", self.0.to_hex())
    }
}

/// An integer modulo the group order n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Scalar(U256);

impl Scalar {
    pub const ZERO: Scalar = Scalar(U256::ZERO);
    pub const ONE: Scalar = Scalar(U256::ONE);

    /// Reduces `v` modulo n.
    pub fn new(v: U256) -> Self {
        Scalar(ORDER.reduce(&v))
    }

    /// `None` unless `v < n`.
    pub fn from_canonical(v: U256) -> Option<Self> {
        (v < GROUP_ORDER).then_some(Scalar(v))
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(U256::from_u64(v))
    }

    pub fn from_be_bytes_reduced(bytes: &[u8; 32]) -> Self {
        Self::new(U256::from_be_bytes(bytes))
    }

    pub fn value(&self) -> U256 {
        self.0
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        self.0.to_be_bytes()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn invert(&self) -> Self {
        Scalar(ORDER.inv(&self.0))
    }
}

impl Add for Scalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Scalar(ORDER.add(&self.0, &rhs.0))
    }
}

impl Sub for Scalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Scalar(ORDER.sub(&self.0, &rhs.0))
    }
}

impl Mul for Scalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Scalar(ORDER.mul(&self.0, &rhs.0))
    }
}

impl Neg for Scalar {
    type Output = Self;
    fn neg(self) -> Self {
        Scalar(ORDER.neg(&self.0))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.0.to_hex())
    }
}
