//! Fixed-width 256-bit unsigned integers and pseudo-Mersenne modular arithmetic.
//!
//! Limbs are little-endian `u64`s. Nothing here is constant-time.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Shl, Shr};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct U256(pub [u64; 4]);

impl U256 {
    pub const ZERO: U256 = U256([0; 4]);
    pub const ONE: U256 = U256([1, 0, 0, 0]);
    pub const MAX: U256 = U256([u64::MAX; 4]);

    pub const fn from_u64(v: u64) -> Self {
        U256([v, 0, 0, 0])
    }

    pub fn from_be_bytes(bytes: &[u8; 32]) -> Self {
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            let start = 32 - 8 * (i + 1);
            *limb = u64::from_be_bytes(bytes[start..start + 8].try_into().unwrap());
        }
        U256(limbs)
    }

    /// Big-endian bytes of at most 32 bytes; shorter input is left-padded with zeros.
    pub fn from_be_slice(bytes: &[u8]) -> Option<Self> {
        if bytes.len() > 32 {
            return None;
        }
        let mut buf = [0u8; 32];
        buf[32 - bytes.len()..].copy_from_slice(bytes);
        Some(Self::from_be_bytes(&buf))
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, limb) in self.0.iter().enumerate() {
            let start = 32 - 8 * (i + 1);
            out[start..start + 8].copy_from_slice(&limb.to_be_bytes());
        }
        out
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let s = s.trim_start_matches("0x");
        if s.is_empty() || s.len() > 64 {
            return None;
        }
        let padded = format!("{s:0>64}");
        let mut buf = [0u8; 32];
        hex::decode_to_slice(padded, &mut buf).ok()?;
        Some(Self::from_be_bytes(&buf))
    }

    /// Parses a decimal string; `None` on a non-digit or on overflow.
    pub fn from_dec_str(s: &str) -> Option<Self> {
        if s.is_empty() {
            return None;
        }
        let mut acc = U256::ZERO;
        for ch in s.chars() {
            let digit = ch.to_digit(10)? as u64;
            let (scaled, carry) = acc.mul_u64(10);
            if carry != 0 {
                return None;
            }
            let (sum, overflow) = scaled.overflowing_add(&U256::from_u64(digit));
            if overflow {
                return None;
            }
            acc = sum;
        }
        Some(acc)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_be_bytes())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Number of significant bits.
    pub fn bits(&self) -> usize {
        for i in (0..4).rev() {
            if self.0[i] != 0 {
                return 64 * i + 64 - self.0[i].leading_zeros() as usize;
            }
        }
        0
    }

    pub fn low_u64(&self) -> u64 {
        self.0[0]
    }

    pub fn overflowing_add(&self, rhs: &U256) -> (U256, bool) {
        let mut out = [0u64; 4];
        let mut carry = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (s1, c1) = self.0[i].overflowing_add(rhs.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *slot = s2;
            carry = c1 || c2;
        }
        (U256(out), carry)
    }

    pub fn overflowing_sub(&self, rhs: &U256) -> (U256, bool) {
        let mut out = [0u64; 4];
        let mut borrow = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            *slot = d2;
            borrow = b1 || b2;
        }
        (U256(out), borrow)
    }

    pub fn checked_add(&self, rhs: &U256) -> Option<U256> {
        match self.overflowing_add(rhs) {
            (v, false) => Some(v),
            _ => None,
        }
    }

    pub fn checked_sub(&self, rhs: &U256) -> Option<U256> {
        match self.overflowing_sub(rhs) {
            (v, false) => Some(v),
            _ => None,
        }
    }

    /// Full 512-bit product.
    pub fn mul_wide(&self, rhs: &U256) -> [u64; 8] {
        let mut out = [0u64; 8];
        for i in 0..4 {
            let mut carry: u128 = 0;
            for j in 0..4 {
                let cur = out[i + j] as u128 + (self.0[i] as u128) * (rhs.0[j] as u128) + carry;
                out[i + j] = cur as u64;
                carry = cur >> 64;
            }
            out[i + 4] = carry as u64;
        }
        out
    }

    /// Product with a 64-bit factor, returning the low 256 bits and the overflow limb.
    pub fn mul_u64(&self, rhs: u64) -> (U256, u64) {
        let mut out = [0u64; 4];
        let mut carry: u128 = 0;
        for (i, slot) in out.iter_mut().enumerate() {
            let cur = (self.0[i] as u128) * (rhs as u128) + carry;
            *slot = cur as u64;
            carry = cur >> 64;
        }
        (U256(out), carry as u64)
    }

    /// Quotient and remainder by a nonzero divisor (binary long division).
    pub fn div_rem(&self, divisor: &U256) -> (U256, U256) {
        assert!(!divisor.is_zero(), "division by zero");
        if self < divisor {
            return (U256::ZERO, *self);
        }
        let mut quotient = U256::ZERO;
        let mut rem = U256::ZERO;
        for i in (0..self.bits()).rev() {
            let top = rem.bit(255);
            rem = rem << 1;
            if self.bit(i) {
                rem.0[0] |= 1;
            }
            if top || rem >= *divisor {
                rem = rem.overflowing_sub(divisor).0;
                quotient.0[i / 64] |= 1 << (i % 64);
            }
        }
        (quotient, rem)
    }
}

impl Ord for U256 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for U256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Shl<u32> for U256 {
    type Output = U256;

    fn shl(self, shift: u32) -> U256 {
        if shift >= 256 {
            return U256::ZERO;
        }
        let limbs = (shift / 64) as usize;
        let bits = shift % 64;
        let mut out = [0u64; 4];
        for i in (limbs..4).rev() {
            let src = i - limbs;
            out[i] = self.0[src] << bits;
            if bits > 0 && src > 0 {
                out[i] |= self.0[src - 1] >> (64 - bits);
            }
        }
        U256(out)
    }
}

impl Shr<u32> for U256 {
    type Output = U256;

    fn shr(self, shift: u32) -> U256 {
        if shift >= 256 {
            return U256::ZERO;
        }
        let limbs = (shift / 64) as usize;
        let bits = shift % 64;
        let mut out = [0u64; 4];
        for i in 0..4 - limbs {
            let src = i + limbs;
            out[i] = self.0[src] >> bits;
            if bits > 0 && src + 1 < 4 {
                out[i] |= self.0[src + 1] << (64 - bits);
            }
        }
        U256(out)
    }
}

impl fmt::Debug for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

impl fmt::Display for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

/// A modulus of the form `2^256 - c` with `c` well below `2^255`.
///
/// Wide products reduce by folding the high half back in as `hi * c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub m: U256,
    c: U256,
}

impl Modulus {
    pub const fn new(m: U256, c: U256) -> Self {
        Modulus { m, c }
    }

    /// `2^256 - m`.
    pub fn fold_constant(&self) -> U256 {
        self.c
    }

    pub fn reduce(&self, v: &U256) -> U256 {
        let mut r = *v;
        while r >= self.m {
            r = r.overflowing_sub(&self.m).0;
        }
        r
    }

    pub fn reduce_wide(&self, wide: &[u64; 8]) -> U256 {
        let mut acc = *wide;
        loop {
            let hi = U256([acc[4], acc[5], acc[6], acc[7]]);
            if hi.is_zero() {
                break;
            }
            let folded = hi.mul_wide(&self.c);
            let mut carry = false;
            for i in 0..8 {
                let low = if i < 4 { acc[i] } else { 0 };
                let (s1, c1) = folded[i].overflowing_add(low);
                let (s2, c2) = s1.overflowing_add(carry as u64);
                acc[i] = s2;
                carry = c1 || c2;
            }
        }
        self.reduce(&U256([acc[0], acc[1], acc[2], acc[3]]))
    }

    pub fn add(&self, a: &U256, b: &U256) -> U256 {
        let (s, carry) = a.overflowing_add(b);
        if carry || s >= self.m {
            s.overflowing_sub(&self.m).0
        } else {
            s
        }
    }

    pub fn sub(&self, a: &U256, b: &U256) -> U256 {
        let (d, borrow) = a.overflowing_sub(b);
        if borrow {
            d.overflowing_add(&self.m).0
        } else {
            d
        }
    }

    pub fn neg(&self, a: &U256) -> U256 {
        if a.is_zero() {
            U256::ZERO
        } else {
            self.m.overflowing_sub(a).0
        }
    }

    pub fn mul(&self, a: &U256, b: &U256) -> U256 {
        self.reduce_wide(&a.mul_wide(b))
    }

    pub fn pow(&self, base: &U256, exp: &U256) -> U256 {
        let mut result = U256::ONE;
        for i in (0..exp.bits()).rev() {
            result = self.mul(&result, &result);
            if exp.bit(i) {
                result = self.mul(&result, base);
            }
        }
        result
    }

    /// Inverse by Fermat's little theorem (`a^(m-2)`); the modulus must be prime.
    pub fn inv(&self, a: &U256) -> U256 {
        let exp = self.m.overflowing_sub(&U256::from_u64(2)).0;
        self.pow(a, &exp)
    }
}
