//! Pairwise-independent hashing over the prime field `F_P` with
//! `P = 2^64 - 59`, p-inverse scalings, level assignment and the quantile
//! estimator that turns scaled maxima back into a moment.

use std::sync::Arc;


use crate::error::{Error, Result};
use crate::seed;

/// Largest prime below `2^64`.
pub const MODULUS: u64 = 0xFFFF_FFFF_FFFF_FFC5;
const FOLD: u64 = 59;

#[inline]
fn reduce(x: u128) -> u64 {
    let t = (x >> 64) * FOLD as u128 + (x as u64) as u128;
    let t = (t >> 64) * FOLD as u128 + (t as u64) as u128;
    let mut r = t as u64;
    if t >> 64 != 0 || r >= MODULUS {
        r = r.wrapping_sub(MODULUS);
    }
    r
}

#[inline]
pub fn mulmod(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

#[inline]
pub fn addmod(a: u64, b: u64) -> u64 {
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= MODULUS {
        s.wrapping_sub(MODULUS)
    } else {
        s
    }
}

/// `x ↦ (a·x + b) mod P` with `a ∈ [1, P-1]`, `b ∈ [0, P-1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseHash {
    a: u64,
    b: u64,
}

impl PairwiseHash {
    pub fn from_seed(seed: u64) -> Self {
        let mut g = seed::SplitMix::new(seed);
        PairwiseHash { a: g.below(1, MODULUS), b: g.below(0, MODULUS) }
    }

    pub fn with_coefficients(a: u64, b: u64) -> Self {
        assert!(a % MODULUS != 0, "multiplier must be nonzero mod P");
        PairwiseHash { a: a % MODULUS, b: b % MODULUS }
    }

    #[inline]
    pub fn hash(&self, x: u64) -> u64 {
        addmod(mulmod(self.a, x % MODULUS), self.b)
    }

    /// Hash reduced into `[0, range)`; the reduction bias is at most `range / P`.
    #[inline]
    pub fn bucket(&self, x: u64, range: u64) -> u64 {
        self.hash(x) % range
    }

    pub const BITS: u64 = 128;
}

/// Pairwise-independent hash of `(item, repetition)` keys:
/// `(a1·i + a2·r + b) mod P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairHash {
    a1: u64,
    a2: u64,
    b: u64,
}

impl PairHash {
    pub fn from_seed(seed: u64) -> Self {
        let mut g = seed::SplitMix::new(seed);
        PairHash {
            a1: g.below(1, MODULUS),
            a2: g.below(1, MODULUS),
            b: g.below(0, MODULUS),
        }
    }

    #[inline]
    pub fn base(&self, item: u64) -> u64 {
        addmod(mulmod(self.a1, item % MODULUS), self.b)
    }

    #[inline]
    pub fn step(&self) -> u64 {
        self.a2
    }

    #[inline]
    pub fn offset(&self, r: u64) -> u64 {
        mulmod(self.a2, r % MODULUS)
    }

    #[inline]
    pub fn hash(&self, item: u64, r: u64) -> u64 {
        addmod(self.base(item), self.offset(r))
    }

    pub const BITS: u64 = 192;
}

/// Uniform value in `(0, 1]` carried by a field element: `(h + 1) / P`.
#[inline]
pub fn unit(h: u64) -> f64 {
    (h as f64 + 1.0) / MODULUS as f64
}

/// `floor(u^{-1/p})`, the p-inverse variate for a uniform `u ∈ (0, 1]`.
#[inline]
pub fn p_inverse_of_unit(u: f64, p: f64) -> f64 {
    if u >= 1.0 {
        return 1.0;
    }
    let q = 1.0 / p;
    let x = if q == q.trunc() && q <= 8.0 { (1.0 / u).powi(q as i32) } else { u.powf(-q) };
    x.floor().max(1.0)
}

/// Pairwise p-inverse scalings `X_i^{(r)}` for `r ∈ 0..k`, computed on demand.
#[derive(Clone, Debug)]
pub struct PInverseSampler {
    p: f64,
    k: usize,
    hash: PairHash,
    index: Arc<OffsetIndex>,
}

impl PInverseSampler {
    pub fn new(p: f64, k: usize, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p < 2.0) {
            return Err(Error::Config(format!("p = {p} must lie in (0, 2)")));
        }
        if k == 0 {
            return Err(Error::Config("need at least one repetition".into()));
        }
        let hash = PairHash::from_seed(seed);
        let index = Arc::new(OffsetIndex::new(&hash, k));
        Ok(PInverseSampler { p, k, hash, index })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn repetitions(&self) -> usize {
        self.k
    }

    pub fn unit(&self, item: u64, r: usize) -> f64 {
        unit(self.hash.hash(item, r as u64))
    }

    /// The scaling `X_i^{(r)} ≥ 1`.
    pub fn value(&self, item: u64, r: usize) -> f64 {
        p_inverse_of_unit(self.unit(item, r), self.p)
    }

    /// `X_i^{(r)}` truncated at `cap`.
    pub fn value_capped(&self, item: u64, r: usize, cap: u64) -> u64 {
        let x = self.value(item, r);
        if x >= cap as f64 {
            cap
        } else {
            x as u64
        }
    }

    /// One pass of the scaling transform: `((a, r), X_a^{(r)})` for every `r`.
    pub fn expand(&self, item: u64) -> impl Iterator<Item = ((u64, usize), f64)> + '_ {
        (0..self.k).map(move |r| ((item, r), self.value(item, r)))
    }

    /// Largest hash value `h` whose variate is at least `x`.
    fn hash_ceiling(&self, x: f64) -> Option<u64> {
        let x = x.ceil().max(1.0);
        if x <= 1.0 {
            return Some(MODULUS - 1);
        }
        let bound = MODULUS as f64 * x.powf(-self.p);
        if bound < 1.0 {
            return None;
        }
        Some((bound.floor() as u64).saturating_sub(1).min(MODULUS - 1))
    }

    /// Calls `f(r, X)` for every repetition with `lo ≤ X_item^{(r)} < hi`
    /// (`hi = ∞` when `None`). Membership is rechecked on the exact value.
    pub fn for_each_between<F: FnMut(usize, f64)>(&self, item: u64, lo: f64, hi: Option<f64>, mut f: F) {
        let Some(top) = self.hash_ceiling(lo) else { return };
        let bottom = match hi {
            None => 0,
            Some(h) => match self.hash_ceiling(h) {
                None => 0,
                Some(c) if c >= top => return,
                Some(c) => c + 1,
            },
        };
        let base = self.hash.base(item);
        self.index.scan(base, bottom.saturating_sub(2), top.saturating_add(2).min(MODULUS - 1), |r| {
            let x = self.value(item, r);
            if x >= lo && hi.map_or(true, |h| x < h) {
                f(r, x);
            }
        });
    }

    pub fn index_bits(&self) -> u64 {
        self.index.bits()
    }
}

/// Repetition offsets `a2·r mod P` sorted, so the repetitions whose hash
/// `(base + offset) mod P` falls in a window are found by binary search.
#[derive(Debug)]
pub struct OffsetIndex {
    entries: Vec<(u64, u32)>,
}

impl OffsetIndex {
    fn new(hash: &PairHash, k: usize) -> Self {
        let mut entries: Vec<(u64, u32)> = (0..k as u64).map(|r| (hash.offset(r), r as u32)).collect();
        entries.sort_unstable();
        OffsetIndex { entries }
    }

    fn bits(&self) -> u64 {
        self.entries.len() as u64 * 96
    }

    fn range<F: FnMut(usize)>(&self, lo: u64, hi: u64, f: &mut F) {
        let start = self.entries.partition_point(|e| e.0 < lo);
        for e in &self.entries[start..] {
            if e.0 > hi {
                break;
            }
            f(e.1 as usize);
        }
    }

    /// Repetitions with `(base + offset) mod P ∈ [lo, hi]`.
    fn scan<F: FnMut(usize)>(&self, base: u64, lo: u64, hi: u64, mut f: F) {
        let shift = (MODULUS - base) % MODULUS;
        let start = addmod(shift, lo);
        let span = hi - lo;
        let end = start as u128 + span as u128;
        if end < MODULUS as u128 {
            self.range(start, end as u64, &mut f);
        } else {
            self.range(start, MODULUS - 1, &mut f);
            self.range(0, (end - MODULUS as u128) as u64, &mut f);
        }
    }
}

/// Nearest even integer at least `c / (p² ε²)`.
pub fn even_repetitions(c: f64, p: f64, eps: f64) -> usize {
    let raw = (c / (p * p * eps * eps)).ceil().max(2.0) as usize;
    raw + raw % 2
}

/// Repetition count that makes the scaled quantile concentrate within ε.
pub fn default_repetitions(p: f64, eps: f64) -> usize {
    even_repetitions(160.0, p, eps)
}

/// Scale `C`, prior `L` and critical level `w₀` for level assignment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelParams {
    pub scale: f64,
    pub prior: f64,
    pub p: f64,
    pub critical: u32,
    pub top: u32,
}

impl LevelParams {
    /// `C = max(16, log₂²n / ε²)` and `w₀ = ceil(d₀ (log₂log₂ n + log₂ 1/ε))`.
    pub fn new(p: f64, eps: f64, n: u64, prior: f64, d0: f64) -> Self {
        let log_n = (n.max(2) as f64).log2();
        let scale = (log_n * log_n / (eps * eps)).max(16.0);
        let critical = (d0 * (log_n.log2().max(0.0) + (1.0 / eps).log2())).ceil().max(0.0) as u32;
        Self::with_scale(p, scale, prior, critical)
    }

    pub fn with_scale(p: f64, scale: f64, prior: f64, critical: u32) -> Self {
        let top = top_level(p, scale * prior);
        LevelParams { scale, prior, p, critical, top }
    }

    pub fn cl(&self) -> f64 {
        self.scale * self.prior
    }

    /// Level 0 holds `X ≥ CL`; level `w ≥ 1` holds `CL/2^{w/p} < X ≤ CL/2^{(w-1)/p}`.
    /// `None` below the last tracked level.
    pub fn level_of(&self, x: f64) -> Option<u32> {
        let w = level_unbounded(self.p, self.cl(), x);
        (w <= self.top).then_some(w)
    }

    /// Smallest real `X` belonging to levels `0..=w`.
    pub fn lower_edge(&self, w: u32) -> f64 {
        if w == 0 {
            self.cl()
        } else {
            self.cl() / 2f64.powf(w as f64 / self.p)
        }
    }
}

pub fn top_level(p: f64, cl: f64) -> u32 {
    ((p * cl.max(1.0).log2()).ceil() + 1.0) as u32
}

fn level_unbounded(p: f64, cl: f64, x: f64) -> u32 {
    if x >= cl {
        return 0;
    }
    let w = (p * (cl / x).log2()).floor() + 1.0;
    let mut w = w.max(1.0) as u32;
    // Guard the band edges against rounding in the logarithm.
    let upper = |w: u32| cl / 2f64.powf((w as f64 - 1.0) / p);
    let lower = |w: u32| cl / 2f64.powf(w as f64 / p);
    while w > 1 && x > upper(w) {
        w -= 1;
    }
    while x <= lower(w) {
        w += 1;
    }
    w
}

/// The `(k/2)`-th largest of `values`, padding with zeros up to `k`.
pub fn quantile_estimate(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::Config(format!("repetition count {k} must be even and positive")));
    }
    let rank = k / 2;
    if values.len() < rank {
        return Ok(0.0);
    }
    let mut v = values.to_vec();
    let idx = rank - 1;
    v.select_nth_unstable_by(idx, |a, b| b.total_cmp(a));
    Ok(v[idx])
}

/// Moment estimate from the quantile: `R^p / 2`.
pub fn moment_from_quantile(r: f64, p: f64) -> f64 {
    r.powf(p) / 2.0
}
