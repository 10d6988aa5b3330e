//! Block subsidy schedule.
//!
//! The subsidy starts at 50 coins and is halved by an integer right shift of its
//! satoshi value every 210,000 blocks. Rounding in the low epochs makes the limit
//! 2,099,999,997,690,000 satoshis, slightly below 21 million coins.

use super::amount::{Amount, COIN};

pub const INITIAL_REWARD: u64 = 50 * COIN;
pub const HALVING_INTERVAL: u64 = 210_000;

/// Blocks per year at one block every ten minutes (365 * 144).
pub const BLOCKS_PER_YEAR: u64 = 52_560;

/// First epoch whose shifted subsidy is zero (`5e9 < 2^33`).
pub const LAST_EPOCH: u64 = 33;

pub fn epoch_of(height: u64) -> u64 {
    height / HALVING_INTERVAL
}

pub fn reward_at_height(height: u64) -> Amount {
    let epoch = epoch_of(height);
    let sat = if epoch >= 64 { 0 } else { INITIAL_REWARD >> epoch };
    Amount::from_sat(sat).expect("subsidy below MAX_MONEY")
}

/// Total subsidy of blocks `0..height`, summed per epoch.
pub fn cumulative_supply(height: u64) -> Amount {
    let mut total: u64 = 0;
    for epoch in 0..LAST_EPOCH {
        let start = epoch * HALVING_INTERVAL;
        if start >= height {
            break;
        }
        let blocks = height.min(start + HALVING_INTERVAL) - start;
        total += blocks * (INITIAL_REWARD >> epoch);
    }
    Amount::from_sat(total).expect("supply is bounded")
}

/// Supply after every subsidy has been paid.
pub fn final_supply() -> Amount {
    cumulative_supply(LAST_EPOCH * HALVING_INTERVAL)
}

/// New coins per year relative to the existing supply, as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IssuanceRate {
    pub numerator: u128,
    pub denominator: u128,
}

impl IssuanceRate {
    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Whether `lo <= rate <= hi`, with both bounds as fractions `(num, den)`.
    pub fn within(&self, lo: (u128, u128), hi: (u128, u128)) -> bool {
        self.numerator * lo.1 >= lo.0 * self.denominator && self.numerator * hi.1 <= hi.0 * self.denominator
    }
}

/// `reward * BLOCKS_PER_YEAR / supply` at the first block of `epoch`; `None` for epoch 0.
pub fn annualized_issuance(epoch: u64) -> Option<IssuanceRate> {
    let start = epoch.checked_mul(HALVING_INTERVAL)?;
    let supply = cumulative_supply(start).to_sat();
    if supply == 0 {
        return None;
    }
    Some(IssuanceRate {
        numerator: reward_at_height(start).to_sat() as u128 * BLOCKS_PER_YEAR as u128,
        denominator: supply as u128,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_supply(height: u64) -> u64 {
        (0..height).map(|h| reward_at_height(h).to_sat()).sum()
    }

    #[test]
    fn rewards() {
        assert_eq!(reward_at_height(0).to_sat(), 5_000_000_000);
        assert_eq!(reward_at_height(209_999).to_sat(), 5_000_000_000);
        assert_eq!(reward_at_height(210_000).to_sat(), 2_500_000_000);
        assert_eq!(reward_at_height(420_000).to_sat(), 1_250_000_000);
        assert_eq!(reward_at_height(210_000 * 32).to_sat(), 1);
        assert_eq!(reward_at_height(210_000 * 33).to_sat(), 0);
        assert_eq!(reward_at_height(u64::MAX).to_sat(), 0);
    }

    #[test]
    fn halving_relation() {
        for epoch in 0..32 {
            for offset in [0, 1, 123_456, 209_999] {
                let h = epoch * HALVING_INTERVAL + offset;
                assert_eq!(reward_at_height(h + HALVING_INTERVAL).to_sat(), reward_at_height(h).to_sat() / 2);
            }
        }
    }

    #[test]
    fn supply_matches_brute_force() {
        for h in [0, 1, 2, 209_999, 210_000, 210_001, 390_000, 420_000, 1_000_000] {
            assert_eq!(cumulative_supply(h).to_sat(), brute_force_supply(h), "h = {h}");
        }
        assert_eq!(cumulative_supply(210_000).to_sat(), 10_500_000 * COIN);
        assert_eq!(cumulative_supply(390_000).to_sat(), 15_000_000 * COIN);
    }

    #[test]
    fn final_supply_value() {
        assert_eq!(final_supply().to_sat(), brute_force_supply(LAST_EPOCH * HALVING_INTERVAL));
        assert_eq!(final_supply().to_sat(), 2_099_999_997_690_000);
        assert_eq!(cumulative_supply(u64::MAX / 2), final_supply());
        assert!(final_supply().to_sat() < 21_000_000 * COIN);
    }

    #[test]
    fn supply_monotone() {
        let mut prev = Amount::ZERO;
        for h in (0..7_000_000).step_by(70_001) {
            let s = cumulative_supply(h);
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn issuance_after_second_halving() {
        let rate = annualized_issuance(2).unwrap();
        // 12.5 * 52,560 / 15,750,000
        assert_eq!(rate.numerator * 15_750_000 * COIN as u128, 1_250_000_000u128 * 52_560 * rate.denominator);
        assert!((rate.as_f64() - 0.041_714_285_7).abs() < 1e-9);
        assert!(rate.within((35, 1000), (45, 1000)));
        assert_eq!(annualized_issuance(0), None);
    }
}
