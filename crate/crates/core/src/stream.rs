//! Streams over a universe `[1, n]`, exact frequency oracles, seeded
//! random-order generation and one-pass cursors.

use rand::Rng as _;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::seed;

/// An insertion-only stream: an ordered sequence of item ids in `[1, n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    n: u64,
    updates: Vec<u64>,
}

impl Stream {
    pub fn new(n: u64, updates: Vec<u64>) -> Result<Self> {
        if let Some(&item) = updates.iter().find(|&&a| a == 0 || a > n) {
            return Err(Error::ItemOutOfRange { item, n });
        }
        Ok(Stream { n, updates })
    }

    pub fn empty(n: u64) -> Self {
        Stream { n, updates: Vec::new() }
    }

    pub fn universe(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn updates(&self) -> &[u64] {
        &self.updates
    }

    pub fn into_updates(self) -> Vec<u64> {
        self.updates
    }

    pub fn cursor(&self) -> Cursor<'_> {
        Cursor::new(&self.updates)
    }

    pub fn frequencies(&self) -> FrequencyVector {
        FrequencyVector::from_items(self.n, &self.updates)
    }

    /// `F_p = Σ f_i^p` over items with nonzero count; `0^0` is taken as 0.
    pub fn exact_moment(&self, p: f64) -> f64 {
        exact_moment_of(&self.updates, p)
    }

    /// Fisher–Yates shuffle driven by ChaCha8 seeded with `seed`.
    pub fn shuffle(&self, seed: u64) -> Stream {
        let mut updates = self.updates.clone();
        shuffle_in_place(&mut updates, seed);
        Stream { n: self.n, updates }
    }

    /// Positions `t1..=t2`, 1-based and inclusive.
    pub fn slice(&self, t1: usize, t2: usize) -> Result<StreamSlice<'_>> {
        if t1 == 0 || t1 > t2 || t2 > self.len() {
            return Err(Error::BadSlice { t1, t2, m: self.len() });
        }
        Ok(StreamSlice { source: self, t1, t2 })
    }

    /// Updates whose item satisfies `member`, in their original order.
    pub fn induce<F: Fn(u64) -> bool>(&self, member: F) -> Stream {
        Stream {
            n: self.n,
            updates: self.updates.iter().copied().filter(|&a| member(a)).collect(),
        }
    }

    pub fn prefix(&self, len: usize) -> Stream {
        let len = len.min(self.len());
        Stream { n: self.n, updates: self.updates[..len].to_vec() }
    }

    pub fn weighted(&self) -> WeightedStream {
        WeightedStream {
            n: self.n,
            updates: self.updates.iter().map(|&a| (a, 1.0)).collect(),
        }
    }
}

pub fn shuffle_in_place(items: &mut [u64], seed: u64) {
    let mut rng = seed::rng(seed);
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// `F_p` of a sequence of unit-weight updates.
pub fn exact_moment_of(updates: &[u64], p: f64) -> f64 {
    let counts = count_items(updates);
    moment_of_counts(counts.values().copied(), p)
}

pub fn count_items(updates: &[u64]) -> FxHashMap<u64, u64> {
    let mut counts: FxHashMap<u64, u64> = FxHashMap::default();
    for &a in updates {
        *counts.entry(a).or_insert(0) += 1;
    }
    counts
}

pub fn moment_of_counts<I: IntoIterator<Item = u64>>(counts: I, p: f64) -> f64 {
    let mut total = 0.0;
    for c in counts {
        if c == 0 {
            continue;
        }
        total += if p == 0.0 {
            1.0
        } else if p == 1.0 {
            c as f64
        } else if p == 2.0 {
            (c as f64) * (c as f64)
        } else {
            (c as f64).powf(p)
        };
    }
    total
}

/// A contiguous view `S^{t1:t2}` of a stream.
#[derive(Clone, Copy, Debug)]
pub struct StreamSlice<'a> {
    source: &'a Stream,
    t1: usize,
    t2: usize,
}

impl<'a> StreamSlice<'a> {
    pub fn start(&self) -> usize {
        self.t1
    }

    pub fn end(&self) -> usize {
        self.t2
    }

    pub fn updates(&self) -> &'a [u64] {
        &self.source.updates[self.t1 - 1..self.t2]
    }

    pub fn to_stream(&self) -> Stream {
        Stream { n: self.source.n, updates: self.updates().to_vec() }
    }
}

/// A stream of signed, real-weighted updates.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStream {
    n: u64,
    updates: Vec<(u64, f64)>,
}

impl WeightedStream {
    pub fn new(n: u64, updates: Vec<(u64, f64)>) -> Result<Self> {
        if let Some(&(item, _)) = updates.iter().find(|(a, _)| *a == 0 || *a > n) {
            return Err(Error::ItemOutOfRange { item, n });
        }
        Ok(WeightedStream { n, updates })
    }

    pub fn universe(&self) -> u64 {
        self.n
    }

    pub fn updates(&self) -> &[(u64, f64)] {
        &self.updates
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn frequencies(&self) -> FrequencyVector {
        let mut counts: FxHashMap<u64, f64> = FxHashMap::default();
        for &(a, w) in &self.updates {
            *counts.entry(a).or_insert(0.0) += w;
        }
        FrequencyVector { n: self.n, counts }
    }

    pub fn exact_moment(&self, p: f64) -> Result<f64> {
        self.frequencies().moment(p)
    }
}

/// Exact per-item weight sums. Exempt from space accounting: this is the
/// ground-truth oracle.
#[derive(Clone, Debug, Default)]
pub struct FrequencyVector {
    n: u64,
    counts: FxHashMap<u64, f64>,
}

impl FrequencyVector {
    pub fn from_items(n: u64, updates: &[u64]) -> Self {
        let counts = count_items(updates).into_iter().map(|(a, c)| (a, c as f64)).collect();
        FrequencyVector { n, counts }
    }

    pub fn universe(&self) -> u64 {
        self.n
    }

    pub fn get(&self, item: u64) -> f64 {
        self.counts.get(&item).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> usize {
        self.counts.values().filter(|&&c| c != 0.0).count()
    }

    /// Nonzero `(item, count)` pairs sorted by item id.
    pub fn entries(&self) -> Vec<(u64, f64)> {
        let mut v: Vec<(u64, f64)> =
            self.counts.iter().filter(|(_, &c)| c != 0.0).map(|(&a, &c)| (a, c)).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    pub fn moment(&self, p: f64) -> Result<f64> {
        let integral = p.fract() == 0.0;
        let mut total = 0.0;
        for &c in self.counts.values() {
            if c == 0.0 {
                continue;
            }
            if c < 0.0 && !integral {
                return Err(Error::Domain { p });
            }
            total += if p == 0.0 {
                1.0
            } else if integral {
                c.powi(p as i32)
            } else {
                c.powf(p)
            };
        }
        Ok(total)
    }
}

/// One-pass reader over a stream. Positions only move forward; a window
/// handed out by [`Cursor::advance`] is consumed.
#[derive(Debug)]
pub struct Cursor<'a> {
    data: &'a [u64],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(data: &'a [u64]) -> Self {
        Cursor { data, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    /// Consumes exactly `min(len, remaining)` updates.
    pub fn advance(&mut self, len: usize) -> &'a [u64] {
        let end = (self.pos + len).min(self.data.len());
        let out = &self.data[self.pos..end];
        self.pos = end;
        out
    }
}

impl Iterator for Cursor<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let a = *self.data.get(self.pos)?;
        self.pos += 1;
        Some(a)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining(), Some(self.remaining()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    /// Counts as equal as possible: `m / n` each, remainder to the lowest ids.
    Uniform,
    /// Counts proportional to `1 / rank^skew`, rounded by largest remainder.
    Zipf { skew: f64 },
    /// `heavy_count` items at `heavy_freq` each, plus `background` updates
    /// spread evenly over the remaining ids.
    PlantedHeavy { heavy_count: u64, heavy_freq: u64, background: u64 },
    /// Planted heavy items over a Zipf background on the remaining ids.
    Mixture { skew: f64, heavy_count: u64, heavy_freq: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: u64,
    pub m: u64,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Exact per-item counts; index `i` holds the count of item `i + 1`.
    pub fn profile(&self) -> Result<Vec<u64>> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(Error::Profile("n and m must be at least 1".into()));
        }
        let counts = match self.kind {
            GeneratorKind::Uniform => {
                let base = m / n;
                let extra = m % n;
                (0..n).map(|i| base + u64::from(i < extra)).collect()
            }
            GeneratorKind::Zipf { skew } => {
                if !(skew >= 0.0) {
                    return Err(Error::Profile(format!("skew {skew} must be nonnegative")));
                }
                zipf_counts(n, m, skew)
            }
            GeneratorKind::PlantedHeavy { heavy_count, heavy_freq, background } => {
                if heavy_count > n {
                    return Err(Error::Profile("more heavy items than universe ids".into()));
                }
                if heavy_count * heavy_freq + background != m {
                    return Err(Error::Profile(format!(
                        "{heavy_count} x {heavy_freq} + {background} != m = {m}"
                    )));
                }
                let rest = n - heavy_count;
                if rest == 0 && background > 0 {
                    return Err(Error::Profile("no ids left for background".into()));
                }
                let mut counts = vec![heavy_freq; heavy_count as usize];
                if rest > 0 {
                    let base = background / rest;
                    let extra = background % rest;
                    counts.extend((0..rest).map(|i| base + u64::from(i < extra)));
                }
                counts
            }
            GeneratorKind::Mixture { skew, heavy_count, heavy_freq } => {
                let planted = heavy_count * heavy_freq;
                if heavy_count >= n || planted > m {
                    return Err(Error::Profile("planted mass exceeds the stream".into()));
                }
                let mut counts = vec![heavy_freq; heavy_count as usize];
                counts.extend(zipf_counts(n - heavy_count, m - planted, skew));
                counts
            }
        };
        debug_assert_eq!(counts.iter().sum::<u64>(), m);
        Ok(counts)
    }
}

fn zipf_counts(n: u64, m: u64, skew: f64) -> Vec<u64> {
    let weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-skew)).collect();
    let total: f64 = weights.iter().sum();
    let mut counts = Vec::with_capacity(n as usize);
    let mut rema = Vec::with_capacity(n as usize);
    let mut assigned = 0u64;
    for (i, w) in weights.iter().enumerate() {
        let exact = w / total * m as f64;
        let c = exact.floor() as u64;
        counts.push(c);
        rema.push((exact - c as f64, i));
        assigned += c;
    }
    rema.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rema.iter().take((m - assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Lays out the exact profile of `spec` and shuffles it with `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<Stream> {
    let counts = spec.profile()?;
    let mut updates = Vec::with_capacity(spec.m as usize);
    for (i, &c) in counts.iter().enumerate() {
        updates.extend(std::iter::repeat(i as u64 + 1).take(c as usize));
    }
    shuffle_in_place(&mut updates, spec.seed);
    Ok(Stream { n: spec.n, updates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(items: &[u64]) -> Stream {
        Stream::new(10, items.to_vec()).unwrap()
    }

    #[test]
    fn moments_of_small_streams() {
        assert_eq!(s(&[1, 1, 2]).exact_moment(2.0), 5.0);
        assert_eq!(s(&[]).exact_moment(1.5), 0.0);
        assert_eq!(s(&[1, 1, 2]).exact_moment(0.0), 2.0);
    }

    #[test]
    fn rejects_items_outside_universe() {
        assert!(Stream::new(3, vec![1, 4]).is_err());
        assert!(Stream::new(3, vec![0]).is_err());
    }

    #[test]
    fn negative_weight_needs_integer_exponent() {
        let w = WeightedStream::new(4, vec![(1, -2.0), (2, 1.0)]).unwrap();
        assert_eq!(w.exact_moment(2.0).unwrap(), 5.0);
        assert!(w.exact_moment(0.5).is_err());
    }

    #[test]
    fn slice_and_induce() {
        let st = s(&[1, 2, 1, 3]);
        assert_eq!(st.induce(|a| a == 1 || a == 3).updates(), &[1, 1, 3]);
        assert_eq!(st.slice(1, 4).unwrap().to_stream(), st);
        assert_eq!(st.slice(2, 3).unwrap().updates(), &[2, 1]);
        assert!(st.slice(0, 2).is_err());
        assert!(st.slice(3, 2).is_err());
        assert!(st.slice(1, 5).is_err());
    }

    #[test]
    fn single_update_shuffle() {
        assert_eq!(s(&[7]).shuffle(99).updates(), &[7]);
    }

    #[test]
    fn cursor_takes_at_most_remaining() {
        let st = s(&[1, 2, 3, 4, 5]);
        let mut c = st.cursor();
        assert_eq!(c.advance(2), &[1, 2]);
        assert_eq!(c.next(), Some(3));
        assert_eq!(c.advance(10), &[4, 5]);
        assert_eq!(c.remaining(), 0);
        assert_eq!(c.consumed(), 5);
    }

    #[test]
    fn planted_heavy_profile() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::PlantedHeavy { heavy_count: 1, heavy_freq: 50, background: 50 },
            n: 100,
            m: 100,
            seed: 3,
        };
        assert_eq!(generate(&spec).unwrap().exact_moment(2.0), 2550.0);
        let bad = GeneratorSpec { m: 99, ..spec };
        assert!(generate(&bad).is_err());
    }

    #[test]
    fn uniform_single_item() {
        let spec = GeneratorSpec { kind: GeneratorKind::Uniform, n: 1, m: 20, seed: 0 };
        assert!(generate(&spec).unwrap().updates().iter().all(|&a| a == 1));
    }
}
