use rustc_hash::FxHashMap;

use crate::budget::SpaceUsage;
use crate::sketch::{rows_for, TurnstileFp};

/// Moment sketch for short streams: fails for good once the stream outgrows
/// its length cap, and frees its state when it does.
///
/// Below the cap the sketch is linear in the frequency vector, so the rows
/// are materialized only at query time from the counts seen so far. Space is
/// charged as the full row array.
#[derive(Clone, Debug)]
pub struct SmallApprox {
    p: f64,
    rows: usize,
    seed: u64,
    counts: Option<FxHashMap<u64, u64>>,
    cap: u64,
    seen: u64,
}

impl SmallApprox {
    pub const DELTA: f64 = 0.01;

    pub fn new(p: f64, eps: f64, cap: u64, seed_value: u64) -> Self {
        SmallApprox {
            p,
            rows: rows_for(eps, Self::DELTA, TurnstileFp::ROW_CONST),
            seed: seed_value,
            counts: Some(FxHashMap::default()),
            cap,
            seen: 0,
        }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn failed(&self) -> bool {
        self.counts.is_none()
    }

    #[inline]
    pub fn update(&mut self, item: u64) {
        let Some(c) = self.counts.as_mut() else { return };
        self.seen += 1;
        if self.seen > self.cap {
            self.counts = None;
        } else {
            *c.entry(item).or_insert(0) += 1;
        }
    }

    fn materialize(&self, counts: &FxHashMap<u64, u64>) -> TurnstileFp {
        let mut t = TurnstileFp::with_rows(self.p, self.rows, self.seed);
        let mut items: Vec<_> = counts.iter().collect();
        items.sort_unstable();
        for (&a, &f) in items {
            t.update(a, f as f64);
        }
        t
    }

    pub fn query(&self) -> Option<f64> {
        self.counts.as_ref().and_then(|c| self.materialize(c).query())
    }
}

impl SpaceUsage for SmallApprox {
    fn bits(&self) -> u64 {
        let Some(c) = self.counts.as_ref() else { return 64 };
        let sketch = self.rows as u64 * 64 + crate::hash::PairHash::BITS + crate::budget::width(self.seen) + 1;
        64 + sketch.max(c.len() as u64 * 128)
    }
}
