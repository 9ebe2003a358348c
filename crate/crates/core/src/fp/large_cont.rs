//! Level-by-level search for pairs with small scalings (levels above `w₀`).
//!
//! [`LargeContWithLen`] walks the levels in increasing order. For each level
//! it spends three consecutive windows of the stream:
//!
//! 1. a length window, counting each `(bucket, repetition)` substream;
//! 2. a search window, running a heavy-hitter search on every substream
//!    seen in the length window;
//! 3. a frequency window, counting the search's candidates.
//!
//! All substreams of a level share the same windows. Candidate values
//! `X·f̂` are kept as quantized exponents in a top-`k` heap. [`LargeCont`]
//! keeps two instances with doubling length guesses.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::hhr::Hhr;
use super::scalings::Scalings;
use crate::budget::{width, SpaceUsage};
use crate::hash::LevelParams;
use crate::seed;

/// `floor(ln v / ln(1+ε))`.
pub fn quantize(v: f64, eps: f64) -> i32 {
    (v.ln() / eps.ln_1p()).floor() as i32
}

/// `(1+ε)^e`.
pub fn reconstruct(e: i32, eps: f64) -> f64 {
    (e as f64 * eps.ln_1p()).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Length,
    Search,
    Frequency,
}

/// Shape of the level loop shared by every instance of one estimator.
#[derive(Clone, Debug)]
pub struct LevelPlan {
    pub levels: LevelParams,
    pub eps: f64,
    pub n: u64,
    pub gamma: u64,
    pub window_mult: f64,
    pub level_budget: f64,
    pub inner_trunks: usize,
    pub inner_floor: f64,
    pub heaviness: f64,
}

impl LevelPlan {
    fn level_count(&self) -> u32 {
        self.levels.top.saturating_sub(self.levels.critical)
    }
}

#[derive(Clone, Debug)]
pub struct LargeContWithLen {
    shared: Arc<Scalings>,
    plan: Arc<LevelPlan>,
    guess: f64,
    seed: u64,
    level: u32,
    band: (f64, Option<f64>),
    phase: Phase,
    left: u64,
    window: u64,
    share: u64,
    lengths: FxHashMap<u64, u32>,
    searches: FxHashMap<u64, Hhr>,
    pending: usize,
    queries: FxHashMap<u64, (u64, Vec<u32>)>,
    heap: BinaryHeap<Reverse<i32>>,
    consumed: u64,
    search_consumed: u64,
    done: bool,
    peak_bits: u64,
    scratch: Vec<(usize, f64)>,
}

fn pair_key(t: u64, r: usize) -> u64 {
    t << 32 | r as u64
}

impl LargeContWithLen {
    pub fn new(shared: Arc<Scalings>, plan: Arc<LevelPlan>, guess: f64, seed_value: u64) -> Self {
        let levels = plan.level_count();
        let share = if levels == 0 {
            0
        } else {
            ((plan.level_budget * guess) / (3.0 * levels as f64)).floor() as u64
        };
        let mut s = LargeContWithLen {
            level: plan.levels.critical,
            band: (0.0, None),
            shared,
            plan,
            guess,
            seed: seed_value,
            phase: Phase::Length,
            left: 0,
            window: 0,
            share: share.max(1),
            lengths: FxHashMap::default(),
            searches: FxHashMap::default(),
            pending: 0,
            queries: FxHashMap::default(),
            heap: BinaryHeap::new(),
            consumed: 0,
            search_consumed: 0,
            done: levels == 0,
            peak_bits: 0,
            scratch: Vec::new(),
        };
        if !s.done {
            s.start_level();
        }
        s
    }

    pub fn guess(&self) -> f64 {
        self.guess
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Updates consumed by the level windows.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Updates consumed by the search windows.
    pub fn search_consumed(&self) -> u64 {
        self.search_consumed
    }

    pub fn current_level(&self) -> u32 {
        self.level
    }

    /// Length and frequency window of level `w`:
    /// `min(m̂·mult·C / (ε² 2^{w/p}), share)`.
    fn window_for(&self, w: u32) -> u64 {
        let lp = &self.plan.levels;
        let z = self.guess * self.plan.window_mult * lp.scale
            / (self.plan.eps * self.plan.eps * 2f64.powf(w as f64 / lp.p));
        (z.ceil() as u64).clamp(1, self.share)
    }

    fn start_level(&mut self) {
        self.level += 1;
        let lp = &self.plan.levels;
        self.band = (lp.lower_edge(self.level), Some(lp.lower_edge(self.level - 1).floor() + 1.0));
        self.phase = Phase::Length;
        self.window = self.window_for(self.level);
        self.left = self.window;
        self.lengths.clear();
    }

    fn start_search(&mut self) {
        self.phase = Phase::Search;
        self.left = self.share;
        let plan = &self.plan;
        let lp = &plan.levels;
        let w = self.level as f64;
        // moment prior of one (bucket, repetition) substream at this level
        let prior = (2f64.powf(w) / (plan.gamma as f64 * lp.scale.powf(lp.p))).max(1.0);
        let trunks = plan.inner_trunks as u64;
        let mut keys: Vec<_> = self.lengths.iter().map(|(&k, &c)| (k, c)).collect();
        keys.sort_unstable();
        self.searches.clear();
        let x_top = self.band.1.unwrap_or(f64::INFINITY);
        let floor = (self.heap.len() >= self.shared.k()).then(|| self.heap.peek().map(|m| m.0)).flatten();
        for (k, cnt) in keys {
            // no pair of this substream can displace the heap's minimum
            if let Some(f) = floor {
                if quantize(x_top * cnt as f64 / self.window as f64, plan.eps) <= f {
                    continue;
                }
            }
            let horizon = cnt as f64 * self.guess / self.window as f64;
            // expected substream updates in the search window, halved so the
            // search finishes with high probability
            let avail = 0.5 * cnt as f64 * self.share as f64 / self.window as f64;
            if avail < trunks as f64 {
                // fewer expected updates than trunks: the search cannot finish
                continue;
            }
            let ideal = (horizon * horizon / prior.powf(2.0 / lp.p)).max(plan.inner_floor);
            let trunk = ideal.min(avail / trunks as f64).floor().max(1.0) as u64;
            let s = seed::derive(self.seed, (self.level as u64) << 40 ^ k);
            self.searches
                .insert(k, Hhr::with_shape(trunk, trunks as usize, plan.heaviness / 2.0, plan.n, s, true));
        }
        self.pending = self.searches.len();
        self.lengths.clear();
    }

    fn start_frequency(&mut self) {
        self.phase = Phase::Frequency;
        self.left = self.window;
        self.queries.clear();
        let mut keys: Vec<_> = self.searches.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            let Some(found) = self.searches[&k].result() else { continue };
            let r = (k & 0xFFFF_FFFF) as u32;
            for item in found {
                self.queries.entry(item).or_insert_with(|| (0, Vec::new())).1.push(r);
            }
        }
        self.searches.clear();
    }

    fn finish_level(&mut self) {
        let eps = self.plan.eps;
        let k = self.shared.k();
        let mut items: Vec<_> = self.queries.drain().collect();
        items.sort_unstable_by_key(|e| e.0);
        for (item, (count, reps)) in items {
            if count == 0 {
                continue;
            }
            let rate = count as f64 / self.window as f64;
            for r in reps {
                let e = quantize(self.shared.sampler.value(item, r as usize) * rate, eps);
                if self.heap.len() < k {
                    self.heap.push(Reverse(e));
                } else if self.heap.peek().is_some_and(|m| e > m.0) {
                    self.heap.pop();
                    self.heap.push(Reverse(e));
                }
            }
        }
        if self.level >= self.plan.levels.top {
            self.done = true;
        } else {
            self.start_level();
        }
    }

    pub fn update(&mut self, item: u64) {
        if self.done {
            return;
        }
        self.consumed += 1;
        match self.phase {
            Phase::Length => {
                let (lo, hi) = self.band;
                let gamma = self.plan.gamma;
                let t = self.shared.bucket.bucket(item, gamma);
                let lengths = &mut self.lengths;
                self.shared.sampler.for_each_between(item, lo, hi, |r, x| {
                    if x > lo {
                        *lengths.entry(pair_key(t, r)).or_insert(0) += 1;
                    }
                });
            }
            Phase::Search => {
                self.search_consumed += 1;
                let (lo, hi) = self.band;
                let t = self.shared.bucket.bucket(item, self.plan.gamma);
                let mut scratch = std::mem::take(&mut self.scratch);
                scratch.clear();
                self.shared.sampler.for_each_between(item, lo, hi, |r, x| {
                    if x > lo {
                        scratch.push((r, x));
                    }
                });
                for &(r, _) in &scratch {
                    if let Some(h) = self.searches.get_mut(&pair_key(t, r)) {
                        if !h.is_complete() && h.update(item) {
                            self.pending -= 1;
                        }
                    }
                }
                self.scratch = scratch;
            }
            Phase::Frequency => {
                if let Some(q) = self.queries.get_mut(&item) {
                    q.0 += 1;
                }
            }
        }
        self.left -= 1;
        if self.phase == Phase::Search && self.pending == 0 {
            self.left = 0;
        }
        if self.left == 0 {
            self.peak_bits = self.peak_bits.max(self.bits());
            match self.phase {
                Phase::Length => self.start_search(),
                Phase::Search => self.start_frequency(),
                Phase::Frequency => self.finish_level(),
            }
        }
    }

    /// Heap contents as values `(1+ε)^e · total`, where `total` is the
    /// length of the stream the estimate refers to. `None` until every
    /// level finished.
    pub fn values(&self, total: f64) -> Option<Vec<f64>> {
        if !self.done {
            return None;
        }
        let mut v: Vec<f64> =
            self.heap.iter().map(|Reverse(e)| reconstruct(*e, self.plan.eps) * total).collect();
        v.sort_unstable_by(|a, b| b.total_cmp(a));
        Some(v)
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak_bits.max(self.bits())
    }
}

impl SpaceUsage for LargeContWithLen {
    fn bits(&self) -> u64 {
        let rep_bits = width(self.shared.k() as u64 - 1);
        let key_bits = width(self.plan.gamma.max(1) - 1) + rep_bits;
        let lengths = self.lengths.values().map(|&c| key_bits + width(c as u64)).sum::<u64>();
        let searches = self.searches.values().map(|h| key_bits + h.bits()).sum::<u64>();
        let id = crate::budget::id_bits(self.plan.n + 1);
        let queries = self
            .queries
            .values()
            .map(|(c, reps)| id + width(*c) + reps.len() as u64 * rep_bits)
            .sum::<u64>();
        lengths + searches + queries + self.heap.len() as u64 * 32 + 6 * 64
    }
}

/// Two level-search instances with doubling length guesses.
#[derive(Clone, Debug)]
pub struct LargeCont {
    shared: Arc<Scalings>,
    plan: Arc<LevelPlan>,
    seed: u64,
    first: LargeContWithLen,
    second: LargeContWithLen,
    guess: f64,
    seen: u64,
    rotations: u32,
    consumed_retired: u64,
    search_retired: u64,
    peak_bits: u64,
}

impl LargeCont {
    pub fn new(shared: Arc<Scalings>, plan: LevelPlan, seed_value: u64) -> Self {
        let plan = Arc::new(plan);
        let first = LargeContWithLen::new(shared.clone(), plan.clone(), 2.0, seed::derive(seed_value, 0));
        let second = LargeContWithLen::new(shared.clone(), plan.clone(), 2.0, seed::derive(seed_value, 1));
        LargeCont {
            shared,
            plan,
            seed: seed_value,
            first,
            second,
            guess: 2.0,
            seen: 0,
            rotations: 0,
            consumed_retired: 0,
            search_retired: 0,
            peak_bits: 0,
        }
    }

    pub fn update(&mut self, item: u64) {
        self.seen += 1;
        self.first.update(item);
        self.second.update(item);
        if 2.0 * self.guess <= self.seen as f64 {
            self.peak_bits = self.peak_bits();
            self.guess = self.seen as f64;
            self.rotations += 1;
            let fresh = LargeContWithLen::new(
                self.shared.clone(),
                self.plan.clone(),
                self.guess,
                seed::derive(self.seed, self.rotations as u64 + 1),
            );
            let retired = std::mem::replace(&mut self.first, std::mem::replace(&mut self.second, fresh));
            self.consumed_retired = self.consumed_retired.max(retired.consumed());
            self.search_retired = self.search_retired.max(retired.search_consumed());
        }
    }

    /// Length guess of the instance that answers queries.
    pub fn answering_guess(&self) -> f64 {
        self.first.guess()
    }

    pub fn rotations(&self) -> u32 {
        self.rotations
    }

    /// Largest number of updates any single instance spent in level windows.
    pub fn consumed(&self) -> u64 {
        self.consumed_retired.max(self.first.consumed()).max(self.second.consumed())
    }

    pub fn search_consumed(&self) -> u64 {
        self.search_retired.max(self.first.search_consumed()).max(self.second.search_consumed())
    }

    pub fn values(&self, total: f64) -> Option<Vec<f64>> {
        self.first.values(total).or_else(|| self.second.values(total))
    }

    /// Upper bound on the live bits ever held: the sum of the two current
    /// instances' peaks, maximized over rotations.
    pub fn peak_bits(&self) -> u64 {
        self.peak_bits.max(self.first.peak_bits() + self.second.peak_bits() + 3 * 64)
    }
}

impl SpaceUsage for LargeCont {
    fn bits(&self) -> u64 {
        self.first.bits() + self.second.bits() + 3 * 64
    }
}
