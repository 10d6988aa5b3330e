use std::fmt;
use std::iter::Sum;

use serde::{Deserialize, Serialize};

/// Satoshis per coin.
pub const COIN: u64 = 100_000_000;

/// 21 million coins, the ceiling no amount or supply may exceed.
pub const MAX_MONEY: u64 = 21_000_000 * COIN;

/// A value in satoshis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);
    pub const MAX: Amount = Amount(MAX_MONEY);

    /// `None` above [`MAX_MONEY`].
    pub const fn from_sat(sat: u64) -> Option<Amount> {
        if sat <= MAX_MONEY {
            Some(Amount(sat))
        } else {
            None
        }
    }

    pub const fn from_coins(coins: u64) -> Option<Amount> {
        match coins.checked_mul(COIN) {
            Some(sat) => Amount::from_sat(sat),
            None => None,
        }
    }

    pub const fn to_sat(self) -> u64 {
        self.0
    }

    pub fn checked_add(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_add(rhs.0).and_then(Amount::from_sat)
    }

    pub fn checked_sub(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    /// Sums amounts, `None` if the total exceeds [`MAX_MONEY`].
    pub fn checked_sum<I: IntoIterator<Item = Amount>>(iter: I) -> Option<Amount> {
        iter.into_iter().try_fold(Amount::ZERO, Amount::checked_add)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:08}", self.0 / COIN, self.0 % COIN)
    }
}

/// Panics if the total exceeds [`MAX_MONEY`]; use [`Amount::checked_sum`] on untrusted input.
impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        Amount::checked_sum(iter).expect("amount sum exceeds MAX_MONEY")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(Amount::from_sat(MAX_MONEY), Some(Amount::MAX));
        assert_eq!(Amount::from_sat(MAX_MONEY + 1), None);
        assert_eq!(Amount::from_coins(10_000).unwrap().to_sat(), 1_000_000_000_000);
        assert_eq!(Amount::MAX.checked_add(Amount::from_sat(1).unwrap()), None);
        assert_eq!(Amount::ZERO.checked_sub(Amount::from_sat(1).unwrap()), None);
    }

    #[test]
    fn display_in_coins() {
        assert_eq!(Amount::from_sat(1_250_000_000).unwrap().to_string(), "12.50000000");
        assert_eq!(Amount::from_sat(1).unwrap().to_string(), "0.00000001");
    }
}
