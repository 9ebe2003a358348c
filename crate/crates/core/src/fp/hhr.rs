//! Heavy-hitter search on a random-order stream.
//!
//! The stream is read as `t` trunks of `m₁` updates. An ℓ₂ heavy-hitter
//! sketch runs on each trunk, and every trunk's output set is fed into a
//! Misra–Gries summary; items reported by a constant fraction of trunks
//! survive.

use crate::budget::SpaceUsage;
use crate::seed;
use crate::sketch::{L2HeavyHitters, MisraGries};
use crate::stream::Cursor;

#[derive(Clone, Debug, PartialEq)]
pub struct HhrConfig {
    pub p: f64,
    pub n: u64,
    /// Length prior `m̂`.
    pub length: f64,
    /// Moment prior `F`.
    pub prior: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl HhrConfig {
    pub fn new(p: f64, n: u64, length: f64, prior: f64) -> Self {
        HhrConfig { p, n, length, prior, c0: 0.5, c1: 4.0, c2: 0.25, c3: 3.0 }
    }

    fn log_n(&self) -> f64 {
        (self.n.max(2) as f64).log2()
    }

    /// `max(m̂² / F^{2/p}, (log₂ n)^{c₃})`.
    pub fn trunk_len(&self) -> u64 {
        let main = self.length * self.length / self.prior.max(1.0).powf(2.0 / self.p);
        main.max(self.log_n().powf(self.c3)).ceil() as u64
    }

    /// `ceil(c₁ log₂ n)`.
    pub fn trunks(&self) -> usize {
        (self.c1 * self.log_n()).ceil() as usize
    }
}

#[derive(Clone, Debug)]
pub struct Hhr {
    trunk_len: u64,
    trunks: usize,
    c2: f64,
    n: u64,
    seed: u64,
    sparse: bool,
    current: Option<L2HeavyHitters>,
    filled: u64,
    done: usize,
    survivors: MisraGries,
    consumed: u64,
}

impl Hhr {
    pub fn new(cfg: &HhrConfig, seed_value: u64) -> Self {
        Self::with_shape(cfg.trunk_len(), cfg.trunks(), cfg.c2, cfg.n, seed_value, false)
    }

    /// Explicit trunk length and count; `sparse` selects sparse trunk sketches.
    pub fn with_shape(trunk_len: u64, trunks: usize, c2: f64, n: u64, seed_value: u64, sparse: bool) -> Self {
        assert!(trunk_len >= 1 && trunks >= 1);
        Hhr {
            trunk_len,
            trunks,
            c2,
            n,
            seed: seed_value,
            sparse,
            current: None,
            filled: 0,
            done: 0,
            survivors: MisraGries::new(c2, n),
            consumed: 0,
        }
    }

    pub fn trunk_len(&self) -> u64 {
        self.trunk_len
    }

    pub fn trunks(&self) -> usize {
        self.trunks
    }

    /// Updates required before a result is available.
    pub fn horizon(&self) -> u64 {
        self.trunk_len * self.trunks as u64
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn is_complete(&self) -> bool {
        self.done == self.trunks
    }

    fn fresh_trunk(&self) -> L2HeavyHitters {
        let s = seed::derive(self.seed, self.done as u64);
        if self.sparse {
            L2HeavyHitters::sparse(self.c2, 0.01, self.n, s)
        } else {
            L2HeavyHitters::new(self.c2, 0.01, self.n, s)
        }
    }

    /// Feeds one update; returns `true` once all trunks are done.
    pub fn update(&mut self, item: u64) -> bool {
        if self.is_complete() {
            return true;
        }
        self.consumed += 1;
        if self.current.is_none() {
            self.current = Some(self.fresh_trunk());
        }
        let trunk = self.current.as_mut().expect("trunk allocated");
        trunk.update(item, 1);
        self.filled += 1;
        if self.filled == self.trunk_len {
            for (i, _) in trunk.query() {
                self.survivors.update(i);
            }
            self.current = None;
            self.filled = 0;
            self.done += 1;
        }
        self.is_complete()
    }

    /// Surviving candidates, or `None` while trunks remain.
    pub fn result(&self) -> Option<Vec<u64>> {
        self.is_complete().then(|| self.survivors.query())
    }
}

impl SpaceUsage for Hhr {
    fn bits(&self) -> u64 {
        self.survivors.bits() + self.current.as_ref().map_or(0, |t| t.bits()) + 4 * 64
    }
}

/// Runs the search on `cursor`; `None` when the stream ends before the last
/// trunk completes.
pub fn hhr_run(cfg: &HhrConfig, cursor: &mut Cursor<'_>, seed_value: u64) -> Option<Vec<u64>> {
    let mut h = Hhr::new(cfg, seed_value);
    for item in cursor.by_ref() {
        if h.update(item) {
            return h.result();
        }
    }
    h.result()
}
