//! Symmetric p-stable variates.
//!
//! Variates are drawn by the Chambers–Mallows–Stuck transform. For sketches
//! that need one variate per `(item, row)` from a hash value, a per-`p`
//! quantile table of `|Y|` is built once (from a fixed-seed CMS sample) and
//! inverted by interpolation, with a Pareto continuation past the last grid
//! point.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng as _;

use crate::seed;

/// Chambers–Mallows–Stuck: `u1, u2 ∈ (0, 1)` to a standard symmetric
/// `p`-stable value.
pub fn cms(p: f64, u1: f64, u2: f64) -> f64 {
    let theta = PI * (u1 - 0.5);
    let w = -u2.ln();
    if (p - 1.0).abs() < 1e-12 {
        return theta.tan();
    }
    let a = (p * theta).sin() / theta.cos().powf(1.0 / p);
    let b = (((1.0 - p) * theta).cos() / w).powf((1.0 - p) / p);
    a * b
}

const GRID: usize = 4096;
const SAMPLES: usize = 1 << 20;
const TABLE_SEED: u64 = 0x5354_4142_4C45;

/// Interpolated quantile function of `|Y|` for one `p`.
#[derive(Debug)]
pub struct StableTable {
    p: f64,
    grid: Vec<f64>,
    median: f64,
}

impl StableTable {
    fn build(p: f64) -> Self {
        let mut rng = seed::rng(TABLE_SEED ^ p.to_bits());
        let mut xs: Vec<f64> = (0..SAMPLES)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(f64::EPSILON..1.0);
                cms(p, u1, u2).abs()
            })
            .collect();
        xs.sort_unstable_by(f64::total_cmp);
        let step = SAMPLES / GRID;
        let mut grid: Vec<f64> = (0..GRID).map(|j| xs[j * step]).collect();
        grid[0] = 0.0;
        let median = xs[SAMPLES / 2];
        StableTable { p, grid, median }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Median of `|Y|`, the calibration constant for median estimators.
    pub fn median_abs(&self) -> f64 {
        self.median
    }

    /// Quantile of `|Y|` at `v ∈ [0, 1)`.
    #[inline]
    pub fn abs_quantile(&self, v: f64) -> f64 {
        let pos = v * GRID as f64;
        let j = pos as usize;
        if j + 1 < GRID {
            let lo = self.grid[j];
            lo + (pos - j as f64) * (self.grid[j + 1] - lo)
        } else {
            let tail = (1.0 - v).max(f64::MIN_POSITIVE) * GRID as f64;
            self.grid[GRID - 1] * tail.powf(-1.0 / self.p)
        }
    }

    /// Signed variate from a 64-bit hash: low bit is the sign, high 53 bits
    /// the uniform.
    #[inline]
    pub fn variate(&self, h: u64) -> f64 {
        let v = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let y = self.abs_quantile(v);
        if h & 1 == 1 {
            -y
        } else {
            y
        }
    }
}

/// Shared table for `p`, built on first use.
pub fn table(p: f64) -> Arc<StableTable> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<StableTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("stable table cache poisoned");
    guard.entry(p.to_bits()).or_insert_with(|| Arc::new(StableTable::build(p))).clone()
}
