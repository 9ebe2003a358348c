//! ℓ₂ heavy hitters: a CountSketch plus a small table of tracked candidates.
//!
//! An item enters the table with its sketch estimate at entry time and is
//! counted exactly afterwards, so long-tracked heavy items have near-exact
//! frequencies. When the table is full, a newcomer replaces the smallest
//! candidate if its sketch estimate is larger.

use rustc_hash::FxHashMap;

use super::countsketch::{rows_for, CountSketch};
use crate::budget::{id_bits, width, SpaceUsage};

#[derive(Clone, Copy, Debug)]
struct Candidate {
    item: u64,
    entry: i64,
    since: i64,
}

impl Candidate {
    fn estimate(&self) -> i64 {
        self.entry + self.since
    }
}

#[derive(Clone, Debug)]
pub struct L2HeavyHitters {
    eps: f64,
    sketch: CountSketch,
    candidates: Vec<Candidate>,
    slots: FxHashMap<u64, usize>,
    capacity: usize,
    updates: u64,
    id_bits: u64,
}

impl L2HeavyHitters {
    /// Dense sketch of width `ceil(6/ε²)` with `rows_for(δ)` rows.
    pub fn new(eps: f64, delta: f64, n: u64, seed_value: u64) -> Self {
        Self::build(eps, delta, n, seed_value, false)
    }

    /// Same contract; storage grows with the number of touched counters.
    pub fn sparse(eps: f64, delta: f64, n: u64, seed_value: u64) -> Self {
        Self::build(eps, delta, n, seed_value, true)
    }

    fn build(eps: f64, delta: f64, n: u64, seed_value: u64, sparse: bool) -> Self {
        assert!(eps > 0.0 && eps <= 1.0, "accuracy must lie in (0, 1]");
        let w = (6.0 / (eps * eps)).ceil() as usize;
        let d = rows_for(delta);
        let sketch = if sparse { CountSketch::sparse(d, w, seed_value) } else { CountSketch::new(d, w, seed_value) };
        L2HeavyHitters {
            eps,
            sketch,
            candidates: Vec::new(),
            slots: FxHashMap::default(),
            capacity: (4.0 / (eps * eps)).ceil() as usize + 1,
            updates: 0,
            id_bits: id_bits(n + 1),
        }
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn update(&mut self, item: u64, weight: i64) {
        self.updates += 1;
        self.sketch.update(item, weight);
        if let Some(&pos) = self.slots.get(&item) {
            self.candidates[pos].since += weight;
            return;
        }
        let est = self.sketch.estimate(item);
        if est <= 0 {
            return;
        }
        if self.candidates.len() < self.capacity {
            self.slots.insert(item, self.candidates.len());
            self.candidates.push(Candidate { item, entry: est, since: 0 });
            return;
        }
        let (pos, min) = self
            .candidates
            .iter()
            .enumerate()
            .min_by_key(|(_, c)| c.estimate())
            .map(|(i, c)| (i, c.estimate()))
            .expect("table is full");
        if est > min {
            self.slots.remove(&self.candidates[pos].item);
            self.slots.insert(item, pos);
            self.candidates[pos] = Candidate { item, entry: est, since: 0 };
        }
    }

    /// Every tracked item with its estimate, sorted by item.
    pub fn candidates(&self) -> Vec<(u64, f64)> {
        let mut v: Vec<_> = self.candidates.iter().map(|c| (c.item, c.estimate() as f64)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    /// Tracked items whose estimate clears `(ε/2)·sqrt(F̂₂)`.
    pub fn query(&self) -> Vec<(u64, f64)> {
        let f2 = self.sketch.f2_estimate();
        let floor = 0.5 * self.eps * f2.sqrt();
        self.candidates().into_iter().filter(|&(_, f)| f > 0.0 && f >= floor).collect()
    }

    pub fn f2_estimate(&self) -> f64 {
        self.sketch.f2_estimate()
    }
}

impl SpaceUsage for L2HeavyHitters {
    fn bits(&self) -> u64 {
        let per = self.id_bits + 2 * width(self.updates) + 2;
        self.sketch.bits() + self.candidates.len() as u64 * per + width(self.updates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_exact() {
        let mut h = L2HeavyHitters::new(0.25, 0.05, 100, 3);
        for _ in 0..50 {
            h.update(7, 1);
        }
        assert_eq!(h.query(), vec![(7, 50.0)]);
    }

    #[test]
    fn empty_is_empty() {
        let h = L2HeavyHitters::sparse(0.5, 0.05, 100, 3);
        assert!(h.query().is_empty());
    }
}
