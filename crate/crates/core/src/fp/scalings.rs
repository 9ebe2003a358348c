use crate::budget::SpaceUsage;
use crate::error::Result;
use crate::hash::{PInverseSampler, PairwiseHash};
use crate::seed;

/// Hash state drawn once per copy: the p-inverse scalings, the bucket hash
/// of the level search and the universe hash of the large-scaling sketches.
#[derive(Clone, Debug)]
pub struct Scalings {
    pub sampler: PInverseSampler,
    pub bucket: PairwiseHash,
    pub universe: PairwiseHash,
}

impl Scalings {
    pub fn new(p: f64, k: usize, seed_value: u64) -> Result<Self> {
        Ok(Scalings {
            sampler: PInverseSampler::new(p, k, seed::derive(seed_value, 1))?,
            bucket: PairwiseHash::from_seed(seed::derive(seed_value, 2)),
            universe: PairwiseHash::from_seed(seed::derive(seed_value, 3)),
        })
    }

    pub fn k(&self) -> usize {
        self.sampler.repetitions()
    }

    pub fn p(&self) -> f64 {
        self.sampler.p()
    }
}

impl SpaceUsage for Scalings {
    fn bits(&self) -> u64 {
        192 + 2 * PairwiseHash::BITS + self.sampler.index_bits()
    }
}
