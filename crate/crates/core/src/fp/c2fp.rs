use std::sync::Arc;

use super::config::FpConfig;
use super::large_cont::{LargeCont, LevelPlan};
use super::scalings::Scalings;
use super::small_approx::SmallApprox;
use super::small_cont::SmallCont;
use crate::budget::{BitBudget, SpaceUsage};
use crate::hash::{moment_from_quantile, quantile_estimate, LevelParams};
use crate::seed;

/// Moment estimator given constant-factor priors on the stream length and
/// moment.
#[derive(Clone, Debug)]
pub struct C2Fp {
    p: f64,
    k: usize,
    shared: Arc<Scalings>,
    length_prior: f64,
    moment_prior: f64,
    levels: LevelParams,
    short: SmallApprox,
    small: SmallCont,
    large: LargeCont,
    seen: u64,
}

impl C2Fp {
    /// `eps` is this estimator's own accuracy; `length_prior` and
    /// `moment_prior` bound the stream length and moment from below.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: f64,
        eps: f64,
        delta: f64,
        n: u64,
        length_prior: f64,
        moment_prior: f64,
        shared: Arc<Scalings>,
        cfg: &FpConfig,
        seed_value: u64,
    ) -> Self {
        let k = shared.k();
        let scale = cfg.scale(n, eps, delta);
        let prior = moment_prior.max(1.0).powf(1.0 / p);
        let cl = scale * prior;
        let log_n = (n.max(4) as f64).log2();
        let formula = (cfg.d0 * p * (log_n.log2() + (1.0 / eps).log2())).ceil().max(0.0) as u32;
        let quota_threshold = (n as f64 / cfg.pair_quota).max(1.0).powf(1.0 / p);
        let by_quota = if cl > quota_threshold { (p * (cl / quota_threshold).log2()).floor() as u32 } else { 0 };
        let levels = LevelParams::with_scale(p, scale, prior, formula.min(by_quota));
        let cap = (cfg.short_cap * log_n / (eps * eps)).ceil() as u64;
        let short = SmallApprox::new(p, eps, cap, seed::derive(seed_value, 10));
        let small = SmallCont::new(
            shared.clone(),
            levels,
            eps,
            n,
            cfg.detector_eps,
            cfg.detector_quota,
            seed::derive(seed_value, 11),
        );
        let plan = LevelPlan {
            levels,
            eps,
            n,
            gamma: k as u64,
            window_mult: cfg.window_mult,
            level_budget: cfg.level_budget,
            inner_trunks: cfg.inner_trunks,
            inner_floor: cfg.inner_floor,
            heaviness: cfg.heaviness,
        };
        let large = LargeCont::new(shared.clone(), plan, seed::derive(seed_value, 12));
        C2Fp { p, k, shared, length_prior, moment_prior, levels, short, small, large, seen: 0 }
    }

    pub fn levels(&self) -> &LevelParams {
        &self.levels
    }

    pub fn priors(&self) -> (f64, f64) {
        (self.length_prior, self.moment_prior)
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn scalings(&self) -> &Scalings {
        &self.shared
    }

    pub fn small_cont(&self) -> &SmallCont {
        &self.small
    }

    pub fn large_cont(&self) -> &LargeCont {
        &self.large
    }

    #[inline]
    pub fn update(&mut self, item: u64) {
        self.seen += 1;
        self.short.update(item);
        self.small.update(item);
        self.large.update(item);
    }

    /// Values from both scaling ranges, or `None` if either path failed.
    pub fn scaled_values(&self) -> Option<Vec<f64>> {
        let mut v = self.small.values()?;
        v.extend(self.large.values(self.seen as f64)?);
        Some(v)
    }

    pub fn query(&self) -> Option<f64> {
        if let Some(v) = self.short.query() {
            return Some(v);
        }
        let v = self.scaled_values()?;
        let r = quantile_estimate(&v, self.k).ok()?;
        Some(moment_from_quantile(r, self.p))
    }

    /// Live bits, with the level search charged at its peak.
    pub fn peak_bits(&self) -> u64 {
        self.short.bits() + self.small.bits() + self.large.peak_bits()
    }

    pub fn budget(&self, name: &str) -> BitBudget {
        BitBudget::node(
            name,
            vec![
                BitBudget::leaf("short", self.short.bits()),
                BitBudget::leaf("large-scalings", self.small.bits()),
                BitBudget::leaf("level-search", self.large.bits()).with_peak(self.large.peak_bits()),
            ],
        )
    }
}

impl SpaceUsage for C2Fp {
    fn bits(&self) -> u64 {
        self.short.bits() + self.small.bits() + self.large.bits() + 3 * 64
    }
}
