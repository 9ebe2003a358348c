//! Constant-factor and `(1±ε)` turnstile `F_p` via p-stable projections.
//!
//! Row `j` accumulates `Σ_i f_i·Y_{ij}` where `Y_{ij}` is a p-stable variate
//! read from a pairwise hash of the key `(i, j)`, scrambled by a fixed
//! bijection so sign and magnitude bits do not follow the affine structure.
//! The estimate is `(median_j |row_j| / median|Y|)^p`.

use std::sync::Arc;

use crate::budget::{width, SpaceUsage};
use crate::hash::{addmod, PairHash};
use crate::seed;
use crate::stable::{self, StableTable};

#[derive(Clone, Debug)]
pub struct TurnstileFp {
    p: f64,
    rows: usize,
    hash: PairHash,
    table: Arc<StableTable>,
    sketch: Vec<f64>,
    cap: Option<f64>,
    mass: f64,
    failed: bool,
}

/// Odd row count `ceil(c·ln(2/δ)/ε²)`.
pub fn rows_for(eps: f64, delta: f64, c: f64) -> usize {
    let r = (c * (2.0 / delta).ln() / (eps * eps)).ceil().max(1.0) as usize;
    r | 1
}

impl TurnstileFp {
    pub const ROW_CONST: f64 = 4.0;

    pub fn new(p: f64, eps: f64, delta: f64, seed_value: u64) -> Self {
        Self::with_rows(p, rows_for(eps, delta, Self::ROW_CONST), seed_value)
    }

    pub fn with_rows(p: f64, rows: usize, seed_value: u64) -> Self {
        assert!(p > 0.0 && p < 2.0, "p = {p} must lie in (0, 2)");
        assert!(rows >= 1);
        TurnstileFp {
            p,
            rows,
            hash: PairHash::from_seed(seed_value),
            table: stable::table(p),
            sketch: vec![0.0; rows],
            cap: None,
            mass: 0.0,
            failed: false,
        }
    }

    /// Fail permanently once the absolute update mass exceeds `cap`.
    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    #[inline]
    pub fn update(&mut self, item: u64, weight: f64) {
        if self.failed {
            return;
        }
        self.mass += weight.abs();
        if self.cap.is_some_and(|c| self.mass > c) {
            self.failed = true;
            self.sketch = Vec::new();
            return;
        }
        let step = self.hash.step();
        let mut h = self.hash.base(item);
        for s in self.sketch.iter_mut() {
            *s += weight * self.table.variate(seed::mix64(h));
            h = addmod(h, step);
        }
    }

    /// `None` after the cap was exceeded.
    pub fn query(&self) -> Option<f64> {
        if self.failed {
            return None;
        }
        let mut abs: Vec<f64> = self.sketch.iter().map(|v| v.abs()).collect();
        let mid = abs.len() / 2;
        let (_, med, _) = abs.select_nth_unstable_by(mid, f64::total_cmp);
        Some((*med / self.table.median_abs()).powf(self.p))
    }
}

impl SpaceUsage for TurnstileFp {
    fn bits(&self) -> u64 {
        self.sketch.len() as u64 * 64 + PairHash::BITS + width(self.mass as u64) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stream_is_zero() {
        assert_eq!(TurnstileFp::new(0.5, 0.5, 0.1, 1).query(), Some(0.0));
    }

    #[test]
    fn cap_fails_at_threshold() {
        let mut t = TurnstileFp::new(1.0, 0.5, 0.1, 1).with_cap(3.0);
        for _ in 0..3 {
            t.update(1, 1.0);
        }
        assert!(t.query().is_some());
        t.update(2, 1.0);
        assert!(t.query().is_none());
    }
}
