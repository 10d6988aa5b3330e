use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ConsensusError;
use crate::hashing::Digest256;
use crate::u256::U256;

/// Proof-of-work threshold: a header is valid iff its hash, read big-endian, is ≤ this.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Target(U256);

impl Target {
    pub const MAX: Target = Target(U256::MAX);

    /// `None` for zero, which no hash could meet.
    pub fn new(threshold: U256) -> Option<Target> {
        (!threshold.is_zero()).then_some(Target(threshold))
    }

    /// The threshold 2^(256 - d) - 1: hashes must start with `d` zero bits.
    pub fn from_leading_zero_bits(d: u32) -> Option<Target> {
        match d {
            0 => Some(Target::MAX),
            1..=255 => Some(Target(U256::MAX >> d)),
            _ => None,
        }
    }

    pub fn value(&self) -> U256 {
        self.0
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        self.0.to_be_bytes()
    }

    pub fn from_be_bytes(bytes: &[u8; 32]) -> Option<Target> {
        Target::new(U256::from_be_bytes(bytes))
    }

    pub fn is_met_by(&self, hash: &Digest256) -> bool {
        U256::from_be_bytes(hash.as_bytes()) <= self.0
    }

    /// Expected hashes per success, 2^256 / (threshold + 1), as a float.
    pub fn expected_attempts(&self) -> f64 {
        let limbs = self.0 .0;
        let mut t = 0.0;
        for (i, limb) in limbs.iter().enumerate() {
            t += *limb as f64 * 2f64.powi(64 * i as i32);
        }
        2f64.powi(256) / (t + 1.0)
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Target({})", self.0.to_hex())
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_hex())
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_hex())
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        U256::from_hex(&s).and_then(Target::new).ok_or_else(|| serde::de::Error::custom("invalid target"))
    }
}

/// Difficulty schedule shared by every node of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Easiest target a retarget may produce.
    pub pow_limit: Target,
    pub retarget_interval: u64,
    pub target_spacing_s: u64,
    /// Bound on the per-retarget adjustment factor in either direction.
    pub clamp_factor: u64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams { pow_limit: Target::MAX, retarget_interval: 2016, target_spacing_s: 600, clamp_factor: 4 }
    }
}

impl ChainParams {
    /// Seconds one retarget window should take: 1,209,600 with the defaults.
    pub fn expected_timespan(&self) -> u64 {
        self.retarget_interval * self.target_spacing_s
    }

    pub fn is_retarget_height(&self, height: u64) -> bool {
        height > 0 && height % self.retarget_interval == 0
    }
}

/// Scales `prev` by `actual / expected`, the ratio clamped to [1/clamp, clamp].
///
/// Integer arithmetic, multiplying before dividing; the result is clamped to
/// [1, pow_limit].
pub fn retarget(prev: Target, actual_timespan_s: i64, params: &ChainParams) -> Result<Target, ConsensusError> {
    if actual_timespan_s <= 0 {
        return Err(ConsensusError::NonPositiveTimespan(actual_timespan_s));
    }
    let expected = params.expected_timespan();
    let clamp = params.clamp_factor.max(1);
    let actual = (actual_timespan_s as u64).clamp(expected / clamp, expected.saturating_mul(clamp));

    let (low, high) = prev.0.mul_u64(actual);
    let mut limbs = [low.0[0], low.0[1], low.0[2], low.0[3], high];
    let mut rem: u128 = 0;
    for limb in limbs.iter_mut().rev() {
        let cur = (rem << 64) | *limb as u128;
        *limb = (cur / expected as u128) as u64;
        rem = cur % expected as u128;
    }
    let scaled = if limbs[4] != 0 { U256::MAX } else { U256([limbs[0], limbs[1], limbs[2], limbs[3]]) };
    let bounded = scaled.max(U256::ONE).min(params.pow_limit.0);
    Ok(Target(bounded))
}
