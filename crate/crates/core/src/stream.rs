//! Seeded randomness with a replay contract.
//!
//! Every stochastic choice the engine makes — cell selection, prompt
//! mutation, scripted-agent refusal and obedience draws — pulls from a
//! single [`SeededStream`] in a documented order. ChaCha8 is used as the
//! generator because its output is specified independently of platform,
//! architecture, and library version, which is what makes byte-identical
//! replays a contract rather than an accident.
//!
//! Draw-order contract for a campaign (see the orchestrator): one `f64`
//! draw per cell selection, then per branch one strategy draw (mixed mode
//! only) plus one index draw for the prompt, then agent draws in decision
//! order within the episode. Changing this order is a breaking change to
//! replay compatibility and must bump the ledger schema version.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream derived from a `u64` seed.
///
/// Wraps ChaCha8 and exposes only the handful of draw shapes the engine
/// needs, so every consumer goes through the same audited surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededStream {
    /// Creates a stream positioned at the start of the sequence for `seed`.
    #[must_use]
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    #[must_use]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform index draw in `[0, n)`. `n` must be nonzero.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index draw over an empty range");
        self.rng.gen_range(0..n)
    }

    /// Bernoulli draw: true with probability `p`.
    ///
    /// `p <= 0.0` never fires and `p >= 1.0` always fires, but the
    /// underlying uniform draw is consumed either way so that replays stay
    /// aligned when probabilities are tuned between runs of the same shape.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform choice from a nonempty slice.
    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.next_index(items.len())]
    }
}
