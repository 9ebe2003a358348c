//! CountSketch, plain and with capped counters.

use super::cells::Cells;
use crate::budget::{width, SpaceUsage};
use crate::hash::PairwiseHash;
use crate::seed;

const MAX_ROWS: usize = 31;

/// Odd row count `≥ ln(1/δ)`, at least three.
pub fn rows_for(delta: f64) -> usize {
    let r = (1.0 / delta).ln().ceil().max(3.0) as usize;
    (r | 1).min(MAX_ROWS)
}

#[derive(Clone, Debug)]
struct Rows {
    hashes: Vec<PairwiseHash>,
    width: usize,
}

impl Rows {
    fn new(rows: usize, width: usize, seed_value: u64) -> Self {
        assert!((1..=MAX_ROWS).contains(&rows), "row count {rows} out of range");
        assert!(width >= 1);
        let hashes = (0..rows).map(|j| PairwiseHash::from_seed(seed::derive(seed_value, j as u64))).collect();
        Rows { hashes, width }
    }

    /// Cell index and sign of `key` in row `j`.
    #[inline]
    fn locate(&self, j: usize, key: u64) -> (usize, i64) {
        let h = self.hashes[j].hash(key);
        let bucket = ((h as u128 * self.width as u128) >> 64) as usize;
        let sign = if h & 1 == 1 { -1 } else { 1 };
        (j * self.width + bucket, sign)
    }

    fn len(&self) -> usize {
        self.hashes.len() * self.width
    }

    fn bits(&self) -> u64 {
        self.hashes.len() as u64 * PairwiseHash::BITS
    }
}

fn median(vals: &mut [i64]) -> i64 {
    vals.sort_unstable();
    vals[vals.len() / 2]
}

/// Signed-counter sketch answering point queries within `ε·sqrt(F₂)`.
#[derive(Clone, Debug)]
pub struct CountSketch {
    rows: Rows,
    cells: Cells,
    max_abs: u64,
}

impl CountSketch {
    pub fn new(rows: usize, width: usize, seed_value: u64) -> Self {
        Self::build(rows, width, seed_value, false)
    }

    /// Storage grows with the number of touched cells.
    pub fn sparse(rows: usize, width: usize, seed_value: u64) -> Self {
        Self::build(rows, width, seed_value, true)
    }

    /// Width `ceil(3/ε²)` and `rows_for(δ)` rows.
    pub fn with_accuracy(eps: f64, delta: f64, seed_value: u64) -> Self {
        Self::new(rows_for(delta), (3.0 / (eps * eps)).ceil() as usize, seed_value)
    }

    fn build(rows: usize, width: usize, seed_value: u64, sparse: bool) -> Self {
        let rows = Rows::new(rows, width, seed_value);
        let cells = Cells::new(rows.len(), sparse);
        CountSketch { rows, cells, max_abs: 0 }
    }

    pub fn row_count(&self) -> usize {
        self.rows.hashes.len()
    }

    pub fn width(&self) -> usize {
        self.rows.width
    }

    #[inline]
    pub fn update(&mut self, key: u64, weight: i64) {
        let len = self.rows.len();
        for j in 0..self.rows.hashes.len() {
            let (idx, sign) = self.rows.locate(j, key);
            let c = self.cells.slot(idx, len);
            *c += sign * weight;
            self.max_abs = self.max_abs.max(c.unsigned_abs());
        }
    }

    pub fn estimate(&self, key: u64) -> i64 {
        let mut vals = [0i64; MAX_ROWS];
        let d = self.rows.hashes.len();
        for (j, v) in vals.iter_mut().enumerate().take(d) {
            let (idx, sign) = self.rows.locate(j, key);
            *v = sign * self.cells.get(idx);
        }
        median(&mut vals[..d])
    }

    /// Median over rows of the sum of squared counters.
    pub fn f2_estimate(&self) -> f64 {
        let d = self.rows.hashes.len();
        let mut sums = vec![0f64; d];
        for (idx, c) in self.cells.values() {
            sums[idx / self.rows.width] += (c as f64) * (c as f64);
        }
        sums.sort_unstable_by(f64::total_cmp);
        sums[d / 2]
    }
}

impl SpaceUsage for CountSketch {
    fn bits(&self) -> u64 {
        self.cells.bits(self.rows.len(), width(self.max_abs) + 1) + self.rows.bits()
    }
}

const OVERFLOW: i64 = i64::MIN;

/// CountSketch whose counters hold at most `cap_bits` magnitude bits; a
/// counter that would exceed the cap is replaced by a permanent ∞ marker.
#[derive(Clone, Debug)]
pub struct BoundedCountSketch {
    rows: Rows,
    cells: Cells,
    cap_bits: u32,
    limit: i64,
}

impl BoundedCountSketch {
    pub fn new(rows: usize, width: usize, cap_bits: u32, seed_value: u64) -> Self {
        Self::build(rows, width, cap_bits, seed_value, false)
    }

    pub fn sparse(rows: usize, width: usize, cap_bits: u32, seed_value: u64) -> Self {
        Self::build(rows, width, cap_bits, seed_value, true)
    }

    fn build(rows: usize, width: usize, cap_bits: u32, seed_value: u64, sparse: bool) -> Self {
        assert!((1..63).contains(&cap_bits), "cap of {cap_bits} bits out of range");
        let rows = Rows::new(rows, width, seed_value);
        let cells = Cells::new(rows.len(), sparse);
        BoundedCountSketch { rows, cells, cap_bits, limit: (1i64 << cap_bits) - 1 }
    }

    /// `ceil(log₂log₂ n + log₂(1/ε)) + 4`.
    pub fn default_cap_bits(n: u64, eps: f64) -> u32 {
        let ll = (n.max(4) as f64).log2().log2();
        ((ll + (1.0 / eps).log2()).ceil().max(0.0) as u32) + 4
    }

    pub fn cap_bits(&self) -> u32 {
        self.cap_bits
    }

    #[inline]
    pub fn update(&mut self, key: u64, weight: i64) {
        let len = self.rows.len();
        for j in 0..self.rows.hashes.len() {
            let (idx, sign) = self.rows.locate(j, key);
            let c = self.cells.slot(idx, len);
            if *c == OVERFLOW {
                continue;
            }
            let next = *c + sign * weight;
            *c = if next.abs() > self.limit { OVERFLOW } else { next };
        }
    }

    /// Median-of-rows estimate, or `None` (∞) when a majority of the rows
    /// hit an overflowed counter.
    pub fn query(&self, key: u64) -> Option<i64> {
        let mut vals = [0i64; MAX_ROWS];
        let d = self.rows.hashes.len();
        for (j, v) in vals.iter_mut().enumerate().take(d) {
            let (idx, sign) = self.rows.locate(j, key);
            let c = self.cells.get(idx);
            *v = if c == OVERFLOW { i64::MAX } else { sign * c };
        }
        let m = median(&mut vals[..d]);
        (m != i64::MAX).then_some(m)
    }
}

impl SpaceUsage for BoundedCountSketch {
    fn bits(&self) -> u64 {
        // magnitude, sign and overflow flag per counter
        self.cells.bits(self.rows.len(), self.cap_bits as u64 + 2) + self.rows.bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_is_exact() {
        let mut cs = CountSketch::new(5, 8, 1);
        let mut sp = CountSketch::sparse(5, 8, 1);
        for _ in 0..37 {
            cs.update(42, 1);
            sp.update(42, 1);
        }
        assert_eq!(cs.estimate(42), 37);
        assert_eq!(sp.estimate(42), 37);
        assert_eq!(cs.f2_estimate(), 37.0 * 37.0);
        assert!(sp.bits() < cs.bits());
    }

    #[test]
    fn bounded_overflow() {
        let mut b = BoundedCountSketch::new(3, 4, 4, 7);
        for _ in 0..15 {
            b.update(3, 1);
        }
        assert_eq!(b.query(3), Some(15));
        b.update(3, 1);
        assert_eq!(b.query(3), None);
        b.update(3, -10);
        assert_eq!(b.query(3), None);
    }
}
