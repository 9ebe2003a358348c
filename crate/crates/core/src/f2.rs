//! Block-pair second-moment estimator for random-order streams.
//!
//! The stream is cut into blocks of `b` updates. Each block's colliding pairs
//! `K_i = Σ_j C(f_j(B_i), 2)` are counted exactly, and the total over `T`
//! complete blocks is rescaled to the whole stream:
//! `Y = 2K(m² − m) / ((b² − b)T) + m`.

use crate::budget::{id_bits, width, SpaceUsage};
use crate::error::{Error, Result};

/// `ceil(c_b · max(1/(ε² log₂ n), 2) · log₂(1/δ))`.
pub fn block_size_with(c_b: f64, eps: f64, delta: f64, n: u64) -> usize {
    let log_n = (n.max(2) as f64).log2();
    let raw = c_b * (1.0 / (eps * eps * log_n)).max(2.0) * (1.0 / delta).log2();
    (raw - 1e-9).ceil().max(2.0) as usize
}

pub const DEFAULT_BLOCK_CONST: f64 = 8.0;

pub fn choose_block_size(eps: f64, delta: f64, n: u64) -> usize {
    block_size_with(DEFAULT_BLOCK_CONST, eps, delta, n)
}

#[derive(Clone, Debug)]
pub struct RandF2 {
    block: usize,
    buffer: Vec<u64>,
    pairs: u128,
    blocks: u64,
    seen: u64,
    id_bits: u64,
}

impl RandF2 {
    pub fn new(block: usize, n: u64) -> Self {
        assert!(block >= 2, "blocks need at least two updates");
        RandF2 { block, buffer: Vec::with_capacity(block), pairs: 0, blocks: 0, seen: 0, id_bits: id_bits(n + 1) }
    }

    pub fn with_accuracy(eps: f64, delta: f64, n: u64) -> Self {
        Self::new(choose_block_size(eps, delta, n), n)
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn complete_blocks(&self) -> u64 {
        self.blocks
    }

    pub fn update(&mut self, item: u64) {
        self.seen += 1;
        self.buffer.push(item);
        if self.buffer.len() == self.block {
            self.buffer.sort_unstable();
            let mut k = 0u128;
            for run in self.buffer.chunk_by(|a, b| a == b) {
                let f = run.len() as u128;
                k += f * (f - 1) / 2;
            }
            self.pairs += k;
            self.blocks += 1;
            self.buffer.clear();
        }
    }

    /// `Y` for a stream of the length seen so far.
    pub fn estimate(&self) -> Result<f64> {
        if self.blocks == 0 {
            return Err(Error::InsufficientData);
        }
        let m = self.seen as f64;
        let b = self.block as f64;
        Ok(2.0 * self.pairs as f64 * (m * m - m) / ((b * b - b) * self.blocks as f64) + m)
    }
}

impl SpaceUsage for RandF2 {
    fn bits(&self) -> u64 {
        // buffer at capacity, then the magnitude of each counter
        let pairs = 128 - self.pairs.leading_zeros() as u64;
        self.block as u64 * self.id_bits + pairs.max(1) + width(self.blocks) + width(self.seen) + width(self.block as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_size_examples() {
        assert_eq!(choose_block_size(1.0, 0.5, 1 << 16), 16);
        assert_eq!(choose_block_size(0.1, 0.1, 1 << 20), 133);
    }

    #[test]
    fn degenerate_streams_are_exact() {
        let mut same = RandF2::new(10, 5);
        let mut distinct = RandF2::new(10, 1000);
        for i in 0..100 {
            same.update(3);
            distinct.update(i + 1);
        }
        assert_eq!(same.estimate().unwrap(), 10_000.0);
        assert_eq!(distinct.estimate().unwrap(), 100.0);
    }

    #[test]
    fn no_complete_block_is_an_error() {
        let mut f = RandF2::new(10, 5);
        f.update(1);
        assert!(matches!(f.estimate(), Err(Error::InsufficientData)));
    }
}
