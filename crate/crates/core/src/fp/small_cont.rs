//! Brute-force tracking of pairs with large scalings (levels `0..=w₀`).
//!
//! Per level `w` a bounded CountSketch counts the level's updates under a
//! hash of the item ids into a small universe. Per `(w, r)` an ℓ₂ detector
//! tracks the substream's candidates until it exhausts a memory quota; the
//! number of updates it consumed is kept for rescaling.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::scalings::Scalings;
use crate::budget::{width, SpaceUsage};
use crate::hash::LevelParams;
use crate::seed;
use crate::sketch::{BoundedCountSketch, L2HeavyHitters};

#[derive(Clone, Debug)]
struct Detector {
    hh: L2HeavyHitters,
    total: u64,
    window: u64,
    frozen: bool,
}

#[derive(Clone, Debug)]
pub struct SmallCont {
    shared: Arc<Scalings>,
    levels: LevelParams,
    threshold: f64,
    n: u64,
    seed: u64,
    detector_eps: f64,
    quota: u64,
    universe: u64,
    cs_rows: usize,
    cs_width: usize,
    cap_bits: u32,
    sketches: Vec<Option<BoundedCountSketch>>,
    detectors: FxHashMap<u64, Detector>,
    audit: Option<FxHashMap<(u32, u64), u64>>,
    collision: bool,
    scratch: Vec<(usize, f64, u32)>,
}

fn key(w: u32, r: usize) -> u64 {
    (w as u64) << 32 | r as u64
}

impl SmallCont {
    /// Tracks levels `0..=levels.critical`.
    pub fn new(
        shared: Arc<Scalings>,
        levels: LevelParams,
        eps: f64,
        n: u64,
        detector_eps: f64,
        quota_const: f64,
        seed_value: u64,
    ) -> Self {
        let w0 = levels.critical;
        let threshold = levels.lower_edge(w0);
        let lw = (w0.max(2) as f64).log2();
        let ll = (n.max(4) as f64).log2().log2() + (1.0 / eps).log2();
        let quota = (quota_const * w0.max(2) as f64 * lw * ll).ceil() as u64;
        let universe = ((w0.max(2) as f64 / eps).powi(4)).ceil().min(u64::MAX as f64 / 2.0) as u64;
        SmallCont {
            shared,
            levels,
            threshold,
            n,
            seed: seed_value,
            detector_eps,
            quota,
            universe: universe.max(16),
            cs_rows: 5,
            cs_width: (3.0 / (eps * eps)).ceil() as usize,
            cap_bits: BoundedCountSketch::default_cap_bits(n, eps),
            sketches: vec![None; w0 as usize + 1],
            detectors: FxHashMap::default(),
            audit: cfg!(debug_assertions).then(FxHashMap::default),
            collision: false,
            scratch: Vec::new(),
        }
    }

    pub fn critical(&self) -> u32 {
        self.levels.critical
    }

    /// Smallest scaling tracked here.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn quota(&self) -> u64 {
        self.quota
    }

    pub fn tracked_pairs(&self) -> usize {
        self.detectors.len()
    }

    fn hashed(&self, item: u64) -> u64 {
        self.shared.universe.bucket(item, self.universe)
    }

    pub fn update(&mut self, item: u64) {
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.clear();
        let w0 = self.levels.critical;
        let levels = self.levels;
        self.shared.sampler.for_each_between(item, self.threshold, None, |r, x| {
            if let Some(w) = levels.level_of(x).filter(|&w| w <= w0) {
                scratch.push((r, x, w));
            }
        });
        if scratch.is_empty() {
            self.scratch = scratch;
            return;
        }
        let g = self.hashed(item);
        let mut touched: u64 = 0;
        for &(r, _, w) in &scratch {
            if w < 64 && touched & (1 << w) != 0 {
                // level already counted for this update
            } else {
                if w < 64 {
                    touched |= 1 << w;
                }
                let (rows, width, cap) = (self.cs_rows, self.cs_width, self.cap_bits);
                let s = seed::derive(self.seed, w as u64);
                self.sketches[w as usize]
                    .get_or_insert_with(|| BoundedCountSketch::sparse(rows, width, cap, s))
                    .update(g, 1);
                if let Some(a) = self.audit.as_mut() {
                    let prev = *a.entry((w, g)).or_insert(item);
                    self.collision |= prev != item;
                }
            }
            let (eps, n, quota) = (self.detector_eps, self.n, self.quota);
            let ds = seed::derive(self.seed, key(w, r) ^ 0x8000_0000_0000_0000);
            let d = self.detectors.entry(key(w, r)).or_insert_with(|| Detector {
                hh: L2HeavyHitters::sparse(eps, 0.05, n, ds),
                total: 0,
                window: 0,
                frozen: false,
            });
            d.total += 1;
            if !d.frozen {
                d.hh.update(item, 1);
                d.window += 1;
                if d.hh.bits() > quota {
                    d.frozen = true;
                }
            }
        }
        self.scratch = scratch;
    }

    /// Scaled values `X_i^{(r)}·f̂_i` of every tracked candidate, or `None`
    /// when the collision audit tripped. Frequencies come from the detector
    /// while it never froze; otherwise from the level sketch when finite,
    /// else from the detector's window rescaled to the pair's substream.
    pub fn values(&self) -> Option<Vec<f64>> {
        if self.collision {
            return None;
        }
        let mut out = Vec::new();
        let mut keys: Vec<_> = self.detectors.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            let d = &self.detectors[&k];
            let (w, r) = ((k >> 32) as u32, (k & 0xFFFF_FFFF) as usize);
            for (i, f_win) in d.hh.candidates() {
                let f = if !d.frozen {
                    f_win
                } else {
                    match self.sketches[w as usize].as_ref().and_then(|cs| cs.query(self.hashed(i))) {
                        Some(v) if v > 0 => v as f64,
                        Some(_) => continue,
                        None => f_win * d.total as f64 / d.window.max(1) as f64,
                    }
                };
                if f > 0.0 {
                    out.push(self.shared.sampler.value(i, r) * f);
                }
            }
        }
        Some(out)
    }
}

impl SpaceUsage for SmallCont {
    fn bits(&self) -> u64 {
        let sketches: u64 = self.sketches.iter().flatten().map(|s| s.bits()).sum();
        let dets: u64 = self
            .detectors
            .values()
            .map(|d| d.hh.bits() + 2 * width(d.total) + 1 + 32)
            .sum();
        sketches + dets + 4 * 64
    }
}
