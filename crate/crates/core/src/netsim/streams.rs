//! Independent random streams derived from one seed, so that e.g. changing the
//! topology never shifts a miner's block times.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn derive(&self, label: &str, index: u64) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(label.as_bytes());
        h.update(index.to_le_bytes());
        ChaCha8Rng::from_seed(h.finalize().into())
    }

    pub fn topology(&self, attempt: u64) -> ChaCha8Rng {
        self.derive("topology", attempt)
    }

    pub fn miner(&self, miner: usize) -> ChaCha8Rng {
        self.derive("miner", miner as u64)
    }

    /// Delays on the directed link `from -> to`.
    pub fn link(&self, from: usize, to: usize) -> ChaCha8Rng {
        self.derive("link", ((from as u64) << 32) | to as u64)
    }

    /// Streams for repetition `trial`; trial 0 is this set itself.
    pub fn trial(&self, trial: u64) -> Streams {
        if trial == 0 {
            return *self;
        }
        let mut rng = self.derive("trial", trial);
        Streams { seed: rand::Rng::random(&mut rng) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let s = Streams::new(5);
        let a: u64 = s.miner(0).random();
        assert_eq!(a, Streams::new(5).miner(0).random::<u64>());
        assert_ne!(a, s.miner(1).random::<u64>());
        assert_ne!(a, s.link(0, 0).random::<u64>());
        assert_ne!(s.link(0, 1).random::<u64>(), s.link(1, 0).random::<u64>());
        assert_eq!(s.trial(0), s);
        assert_ne!(s.trial(1), s.trial(2));
    }
}
