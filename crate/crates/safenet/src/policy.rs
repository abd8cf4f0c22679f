//! Branch policies that need an RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safenet_core::plan::BranchPolicy;

/// Picks uniformly among successors; reproducible for a fixed seed.
#[derive(Debug, Clone)]
pub struct SeededBranch {
    rng: ChaCha8Rng,
}

impl SeededBranch {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl BranchPolicy for SeededBranch {
    fn choose(&mut self, _node: usize, successors: &[usize]) -> usize {
        self.rng.gen_range(0..successors.len())
    }
}
