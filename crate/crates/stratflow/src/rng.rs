//! Deterministic randomness: one root seed per experiment, independent
//! sub-streams per consumer so that adding a consumer does not perturb the
//! draws of the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Well-known stream ids used by the experiment runner.
pub mod streams {
    /// Initialization draws (e.g. random starting points).
    pub const INIT: u64 = 0;
    /// Ball sampling for subgradient enlargements.
    pub const GOLDSTEIN: u64 = 1;
    /// Additive / stochastic noise.
    pub const NOISE: u64 = 2;
    /// Monte Carlo checks layered on top of a run.
    pub const CHECKS: u64 = 3;
}

/// Handle identifying one deterministic random stream.
///
/// Identical `(seed, stream)` pairs always produce identical draw sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Same root seed, different sub-stream.
    pub fn stream(&self, stream: u64) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }

    /// Materialize the generator for this handle.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
