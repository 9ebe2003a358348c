//! Uniform position subsampling and the concentration envelopes that a
//! `k`-position subsample of a length-`m` stream obeys. These serve as
//! statistical oracles for the estimators built on top of windows.

use rand::seq::index;

use crate::seed;
use crate::stream::{count_items, moment_of_counts, Stream};

/// `k` distinct positions of `0..m`, sorted, drawn uniformly.
pub fn sample_positions(m: usize, k: usize, seed_value: u64) -> Vec<usize> {
    assert!(k <= m, "cannot sample {k} of {m} positions");
    let mut rng = seed::rng(seed_value);
    let mut v = index::sample(&mut rng, m, k).into_vec();
    v.sort_unstable();
    v
}

/// The subsequence of `stream` at `k` uniformly random positions.
pub fn subsample(stream: &Stream, k: usize, seed_value: u64) -> Stream {
    let ups = stream.updates();
    let picked = sample_positions(ups.len(), k, seed_value).into_iter().map(|i| ups[i]).collect();
    Stream::new(stream.universe(), picked).expect("subsample keeps the universe")
}

/// Deviation bound for an item's relative frequency in a subsample:
/// `4 sqrt(ln(1/δ)/k) · max(sqrt(f/m), sqrt(ln(1/δ)/k))`.
pub fn frequency_deviation_bound(f: f64, m: f64, k: f64, delta: f64) -> f64 {
    let l = (1.0 / delta).ln() / k;
    4.0 * l.sqrt() * (f / m).sqrt().max(l.sqrt())
}

/// Whether the subsample frequency `fs` violates the deviation bound.
pub fn frequency_deviates(fs: f64, f: f64, m: f64, k: f64, delta: f64) -> bool {
    (fs / k - f / m).abs() >= frequency_deviation_bound(f, m, k, delta)
}

/// Aggregate analogue for a set of items with total count `f_set`: the same
/// bound applied to the set's subsample count.
pub fn set_deviates(fs_set: f64, f_set: f64, m: f64, k: f64, delta: f64) -> bool {
    frequency_deviates(fs_set, f_set, m, k, delta)
}

/// Expected distinct count of a `k`-subsample lies between these two sums
/// (returned in increasing order).
pub fn distinct_bracket(counts: &[u64], m: u64, k: u64) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for &f in counts.iter().filter(|&&f| f > 0) {
        let f_ = f as f64;
        let rest = (m - f) as f64;
        let q1 = if rest > 0.0 { (1.0 - k as f64 / rest).max(0.0) } else { 0.0 };
        a += 1.0 - q1.powf(f_);
        b += 1.0 - (1.0 - k as f64 / m as f64).powf(f_);
    }
    (a.min(b), a.max(b))
}

/// Exact expected distinct count of a uniform `k`-subsample of `m`
/// positions: `Σ_i 1 - C(m-f_i, k)/C(m, k)`.
pub fn expected_distinct(counts: &[u64], m: u64, k: u64) -> f64 {
    counts
        .iter()
        .filter(|&&f| f > 0)
        .map(|&f| {
            if m - f < k {
                return 1.0;
            }
            // C(m-f,k)/C(m,k) = Π_{j<f} (m-k-j)/(m-j)
            let mut miss = 1.0f64;
            for j in 0..f {
                miss *= (m - k - j) as f64 / (m - j) as f64;
            }
            1.0 - miss
        })
        .sum()
}

/// Upper bound on the expected second moment of a `k`-subsample:
/// `k + k²/m² · F₂`.
pub fn f2_mean_bound(f2: f64, m: f64, k: f64) -> f64 {
    k + k * k / (m * m) * f2
}

/// Lower envelope for `F_p` of a `k`-subsample (`p ≥ 1`).
pub fn moment_lower_envelope(fp: f64, m: f64, k: f64, n: f64, p: f64, delta: f64) -> f64 {
    let l = (20.0 * n / delta).ln();
    let lead = (5.0 * m * m / (k * k) * l.powf(1.0 - p)).min(1.0);
    lead * k.powf(p) / (5.0 * m).powf(p) * fp - 4.0 * l
}

/// Upper envelope for `F_p` of a `k`-subsample (`p ∈ [1, 2]`).
pub fn moment_upper_envelope(fp: f64, m: f64, k: f64, n: f64, p: f64, delta: f64) -> f64 {
    let l = (20.0 * n / delta).ln();
    (17.0 * l).powf(p) * (k / m * fp + 4.0 * l)
}

/// `F_p` of a stream's `k`-subsample.
pub fn subsample_moment(stream: &Stream, k: usize, p: f64, seed_value: u64) -> f64 {
    let s = subsample(stream, k, seed_value);
    moment_of_counts(count_items(s.updates()).values().copied(), p)
}
