//! Seeded, splittable randomness with optional forced outcomes.
//!
//! Every random draw in the simulator goes through a [`RandomStream`]. A
//! stream is a ChaCha8 generator seeded from a `u64`, plus a queue of forced
//! Bell outcomes that are consumed, in order, by the next random Bell
//! measurements instead of sampling.
//!
//! Child streams come from [`RandomStream::split`]: the child seed is the
//! first `u64` of a ChaCha8 generator keyed by the parent seed and running on
//! stream number `index + 1`. The function depends only on `(seed, index)`,
//! so children can be derived in any order or in parallel.

use std::collections::VecDeque;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bell::BellLabel;

/// Weights below this are treated as impossible branches.
pub const ZERO_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandomError {
    #[error("forced outcome {label} has probability {weight:e}")]
    ImpossibleForcedOutcome { label: BellLabel, weight: f64 },
    #[error("outcome weights sum to {0}, expected 1")]
    BadWeights(f64),
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
    forced: VecDeque<BellLabel>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            forced: VecDeque::new(),
        }
    }

    /// Queues forced Bell outcomes for the next random measurements.
    pub fn with_forced<I: IntoIterator<Item = BellLabel>>(mut self, labels: I) -> Self {
        self.forced.extend(labels);
        self
    }

    pub fn push_forced(&mut self, label: BellLabel) {
        self.forced.push_back(label);
    }

    /// Forces the very next random Bell outcome, ahead of anything queued.
    pub fn force_next(&mut self, label: BellLabel) {
        self.forced.push_front(label);
    }

    pub fn forced_remaining(&self) -> usize {
        self.forced.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed of child stream `index`.
    pub fn split_seed(seed: u64, index: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index.wrapping_add(1));
        rng.next_u64()
    }

    /// Independent child stream. Forced outcomes are not inherited.
    pub fn split(&self, index: u64) -> Self {
        Self::new(Self::split_seed(self.seed, index))
    }

    /// Uniform Bell outcome, or the next forced one.
    pub fn uniform_label(&mut self) -> BellLabel {
        match self.forced.pop_front() {
            Some(label) => label,
            None => BellLabel::ALL[self.rng.random_range(0..4)],
        }
    }

    /// Samples a label with the given Born weights, or takes the next forced
    /// one provided its weight is nonzero.
    pub fn weighted_label(&mut self, weights: [f64; 4]) -> Result<BellLabel, RandomError> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(RandomError::BadWeights(total));
        }
        if let Some(label) = self.forced.pop_front() {
            let weight = weights[label.index()];
            if weight <= ZERO_WEIGHT {
                return Err(RandomError::ImpossibleForcedOutcome { label, weight });
            }
            return Ok(label);
        }
        let u: f64 = self.rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = BellLabel::ALL[0];
        for label in BellLabel::ALL {
            let w = weights[label.index()];
            if w <= ZERO_WEIGHT {
                continue;
            }
            acc += w;
            last = label;
            if u < acc {
                return Ok(label);
            }
        }
        Ok(last)
    }

    /// The underlying generator, for non-Bell draws (subset selection and the like).
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = RandomStream::new(42);
        let mut b = RandomStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform_label(), b.uniform_label());
        }
    }

    #[test]
    fn split_is_pure_and_distinct() {
        let root = RandomStream::new(7);
        assert_eq!(root.split(3).seed(), RandomStream::split_seed(7, 3));
        assert_ne!(root.split(3).seed(), root.split(4).seed());
        assert_ne!(root.split(0).seed(), 7);
        let mut used = RandomStream::new(7);
        used.uniform_label();
        assert_eq!(used.split(3).seed(), root.split(3).seed());
    }

    #[test]
    fn forced_labels_come_first() {
        let forced = ["11", "00"].map(|s| s.parse::<BellLabel>().unwrap());
        let mut s = RandomStream::new(1).with_forced(forced);
        assert_eq!(s.forced_remaining(), 2);
        assert_eq!(s.uniform_label(), forced[0]);
        assert_eq!(s.weighted_label([0.25; 4]).unwrap(), forced[1]);
        assert_eq!(s.forced_remaining(), 0);
    }

    #[test]
    fn impossible_forced_outcome_is_rejected() {
        let mut s = RandomStream::new(1).with_forced([BellLabel::PHI_PLUS]);
        let err = s.weighted_label([0.0, 0.0, 1.0, 0.0]).unwrap_err();
        assert!(matches!(err, RandomError::ImpossibleForcedOutcome { .. }));
    }

    #[test]
    fn weighted_never_picks_zero_weight() {
        let mut s = RandomStream::new(9);
        for _ in 0..1000 {
            let l = s.weighted_label([0.5, 0.0, 0.5, 0.0]).unwrap();
            assert!(l == BellLabel::PHI_PLUS || l == BellLabel::PSI_PLUS);
        }
        assert!(s.weighted_label([0.5, 0.1, 0.0, 0.0]).is_err());
    }
}
