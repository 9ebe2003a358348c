//! Misra–Gries frequent items.

use rustc_hash::FxHashMap;

use crate::budget::{id_bits, width, SpaceUsage};

/// Deterministic summary that keeps every item with `f ≥ c·m`.
#[derive(Clone, Debug)]
pub struct MisraGries {
    slots: usize,
    counters: FxHashMap<u64, u64>,
    updates: u64,
    id_bits: u64,
}

impl MisraGries {
    /// `ceil(1/c)` slots; `n` is the universe size used for accounting.
    pub fn new(c: f64, n: u64) -> Self {
        assert!(c > 0.0 && c <= 1.0, "threshold must lie in (0, 1]");
        let slots = (1.0 / c - 1e-12).ceil() as usize;
        MisraGries { slots, counters: FxHashMap::default(), updates: 0, id_bits: id_bits(n + 1) }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn update(&mut self, item: u64) {
        self.updates += 1;
        if let Some(c) = self.counters.get_mut(&item) {
            *c += 1;
        } else if self.counters.len() < self.slots {
            self.counters.insert(item, 1);
        } else {
            self.counters.retain(|_, c| {
                *c -= 1;
                *c > 0
            });
        }
    }

    /// Tracked items with their (under-)counts, sorted by item.
    pub fn counters(&self) -> Vec<(u64, u64)> {
        let mut v: Vec<_> = self.counters.iter().map(|(&i, &c)| (i, c)).collect();
        v.sort_unstable();
        v
    }

    pub fn query(&self) -> Vec<u64> {
        self.counters().into_iter().map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        self.counters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }
}

impl SpaceUsage for MisraGries {
    fn bits(&self) -> u64 {
        let per = self.id_bits + width(self.updates);
        self.slots as u64 * per + width(self.updates)
    }
}
