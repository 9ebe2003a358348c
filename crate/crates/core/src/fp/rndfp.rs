use std::sync::Arc;

use rayon::prelude::*;

use super::c2fp::C2Fp;
use super::config::FpConfig;
use super::scalings::Scalings;
use crate::budget::{BitBudget, PeakTracker, SpaceUsage};
use crate::error::{Error, Result};
use crate::seed;
use crate::sketch::TurnstileFp;

const CHECKPOINT: u64 = 4096;

/// One independent copy: two rotating [`C2Fp`] instances and a
/// constant-factor moment sketch that supplies their priors.
#[derive(Clone, Debug)]
pub struct RndFpCopy {
    p: f64,
    eps: f64,
    delta: f64,
    n: u64,
    cfg: Arc<FpConfig>,
    shared: Arc<Scalings>,
    seed: u64,
    first: C2Fp,
    second: C2Fp,
    coarse: TurnstileFp,
    start_mark: u64,
    seen: u64,
    moment_prior: f64,
    growth: f64,
    first_start: u64,
    second_start: u64,
    rotations: u32,
    peak: PeakTracker,
}

impl RndFpCopy {
    pub fn new(p: f64, eps: f64, delta: f64, n: u64, cfg: Arc<FpConfig>, seed_value: u64) -> Result<Self> {
        let inner = eps / 3.0;
        let k = cfg.repetitions(p, inner);
        let shared = Arc::new(Scalings::new(p, k, seed::derive(seed_value, 0))?);
        let make = |tag| C2Fp::new(p, inner, delta, n, 1.0, 1.0, shared.clone(), &cfg, seed::derive(seed_value, tag));
        let first = make(100);
        let second = make(101);
        let coarse_rows = crate::sketch::turnstile::rows_for(cfg.coarse_eps, delta / 3.0, TurnstileFp::ROW_CONST);
        let coarse = TurnstileFp::with_rows(p, coarse_rows, seed::derive(seed_value, 2));
        let growth = cfg.growth(n, eps, delta);
        let mut c = RndFpCopy {
            p,
            eps,
            delta,
            n,
            cfg,
            shared,
            seed: seed_value,
            first,
            second,
            coarse,
            start_mark: 1,
            seen: 0,
            moment_prior: 1.0,
            growth,
            first_start: 0,
            second_start: 0,
            rotations: 0,
            peak: PeakTracker::default(),
        };
        c.checkpoint();
        Ok(c)
    }

    fn checkpoint(&mut self) {
        let live = self.first.peak_bits() + self.second.peak_bits() + self.coarse.bits() + self.shared.bits() + 6 * 64;
        self.peak.observe(live);
    }

    #[inline]
    pub fn update(&mut self, item: u64) {
        self.seen += 1;
        self.first.update(item);
        self.second.update(item);
        self.coarse.update(item, 1.0);
        if self.seen as f64 >= self.growth * self.start_mark as f64 {
            self.checkpoint();
            self.rotations += 1;
            self.moment_prior = self.coarse.query().unwrap_or(1.0).max(1.0);
            self.start_mark = self.seen;
            let fresh = C2Fp::new(
                self.p,
                self.eps / 3.0,
                self.delta,
                self.n,
                self.start_mark as f64,
                self.moment_prior,
                self.shared.clone(),
                &self.cfg,
                seed::derive(self.seed, 101 + self.rotations as u64),
            );
            self.first = std::mem::replace(&mut self.second, fresh);
            self.first_start = self.second_start;
            self.second_start = self.seen;
            self.checkpoint();
        } else if self.seen % CHECKPOINT == 0 {
            self.checkpoint();
        }
    }

    pub fn query(&self) -> Option<f64> {
        self.first.query()
    }

    /// Stream position after which the answering instance started reading.
    pub fn a1_start(&self) -> u64 {
        self.first_start
    }

    /// Stream length when the most recent rotation happened.
    pub fn rotation_mark(&self) -> u64 {
        self.start_mark
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn rotations(&self) -> u32 {
        self.rotations
    }

    pub fn answering(&self) -> &C2Fp {
        &self.first
    }

    pub fn peak_bits(&self) -> u64 {
        let live = self.first.peak_bits() + self.second.peak_bits() + self.coarse.bits() + self.shared.bits() + 6 * 64;
        self.peak.peak().max(live)
    }

    /// Largest number of updates a level search consumed.
    pub fn level_consumed(&self) -> u64 {
        self.first.large_cont().consumed().max(self.second.large_cont().consumed())
    }

    pub fn search_consumed(&self) -> u64 {
        self.first.large_cont().search_consumed().max(self.second.large_cont().search_consumed())
    }

    pub fn budget(&self, name: &str) -> BitBudget {
        BitBudget::node(
            name,
            vec![
                self.first.budget("answering"),
                self.second.budget("standby"),
                BitBudget::leaf("coarse", self.coarse.bits()),
                BitBudget::leaf("hashes", self.shared.bits()),
            ],
        )
        .with_peak(self.peak_bits())
    }
}

/// Random-order `F_p` estimator: median of independent copies, or the exact
/// stream length when `p = 1`.
#[derive(Clone, Debug)]
pub struct RndFp {
    p: f64,
    copies: Vec<RndFpCopy>,
    seen: u64,
}

impl RndFp {
    pub fn new(p: f64, eps: f64, delta: f64, n: u64, seed_value: u64, cfg: FpConfig) -> Result<Self> {
        if !(p > 0.0 && p < 2.0) {
            return Err(Error::Domain { p });
        }
        if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("need 0 < ε, δ < 1, got ε = {eps}, δ = {delta}")));
        }
        if n == 0 {
            return Err(Error::Config("universe must be nonempty".into()));
        }
        cfg.validate()?;
        let copies = if p == 1.0 {
            Vec::new()
        } else {
            let r = cfg.copies(delta);
            let cfg = Arc::new(cfg);
            (0..r)
                .map(|j| RndFpCopy::new(p, eps, delta, n, cfg.clone(), seed::derive(seed_value, j as u64)))
                .collect::<Result<_>>()?
        };
        Ok(RndFp { p, copies, seen: 0 })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn copies(&self) -> &[RndFpCopy] {
        &self.copies
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn update(&mut self, item: u64) {
        self.seen += 1;
        for c in &mut self.copies {
            c.update(item);
        }
    }

    /// Feeds a batch, running copies on the current rayon pool.
    pub fn update_all(&mut self, items: &[u64]) {
        self.seen += items.len() as u64;
        self.copies.par_iter_mut().for_each(|c| {
            for &a in items {
                c.update(a);
            }
        });
    }

    /// Median of the copies that did not fail; `None` if all failed.
    pub fn query(&self) -> Option<f64> {
        if self.p == 1.0 {
            return Some(self.seen as f64);
        }
        let mut v: Vec<f64> = self.copies.iter().filter_map(|c| c.query()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_unstable_by(f64::total_cmp);
        let mid = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
    }

    pub fn peak_bits(&self) -> u64 {
        self.copies.iter().map(|c| c.peak_bits()).sum::<u64>() + 64
    }

    pub fn search_consumed(&self) -> u64 {
        self.copies.iter().map(|c| c.search_consumed()).max().unwrap_or(0)
    }

    pub fn level_consumed(&self) -> u64 {
        self.copies.iter().map(|c| c.level_consumed()).max().unwrap_or(0)
    }

    pub fn budget(&self) -> BitBudget {
        let children = self.copies.iter().enumerate().map(|(i, c)| c.budget(&format!("copy{i}"))).collect();
        let mut b = BitBudget::node("rndfp", children);
        b.live += 64;
        b.peak = b.peak.max(b.live);
        b
    }
}

impl SpaceUsage for RndFp {
    fn bits(&self) -> u64 {
        self.copies.iter().map(|c| c.first.bits() + c.second.bits() + c.coarse.bits() + c.shared.bits()).sum::<u64>()
            + 64
    }
}
