use crate::error::{Error, Result};
use crate::hash::even_repetitions;

/// Tunable constants of the pipeline. Defaults were calibrated once on the
/// acceptance mixtures and then frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct FpConfig {
    /// `k = even ≥ repetition_const / (p² ε²)` at the inner accuracy.
    pub repetition_const: f64,
    /// Critical level `w₀ = ceil(d₀·p·(log₂log₂ n + log₂ 1/ε))`.
    pub d0: f64,
    /// Expected number of tracked large-scaling pairs, in units of `k`.
    pub pair_quota: f64,
    /// Level scale `C`; `None` means `max(16, log₂²(n/δ)/ε²)`.
    pub scale: Option<f64>,
    /// Rotation factor of the top-level estimator; `None` means
    /// `max(16, log₂(n/δ)/ε)`.
    pub growth: Option<f64>,
    /// Window multiplier for per-level length and frequency windows.
    pub window_mult: f64,
    /// Fraction of the length guess the level loop may consume.
    pub level_budget: f64,
    /// Heaviness threshold of the level heavy-hitter search.
    pub heaviness: f64,
    /// Trunks per level heavy-hitter search.
    pub inner_trunks: usize,
    /// Minimum trunk length of the level heavy-hitter search.
    pub inner_floor: f64,
    /// Short-stream path fails once its length exceeds
    /// `short_cap · log₂ n / ε²`.
    pub short_cap: f64,
    /// Accuracy of the constant-factor moment sketch.
    pub coarse_eps: f64,
    /// Accuracy of the per-pair heavy-hitter detectors.
    pub detector_eps: f64,
    /// Detector memory quota constant.
    pub detector_quota: f64,
    /// Independent copies; `None` means `ceil(6 log₂(1/δ))`.
    pub copies: Option<usize>,
}

impl Default for FpConfig {
    fn default() -> Self {
        FpConfig {
            repetition_const: 0.25,
            d0: 4.0,
            pair_quota: 4.0,
            scale: None,
            growth: None,
            window_mult: 16.0,
            level_budget: 0.5,
            heaviness: 0.5,
            inner_trunks: 4,
            inner_floor: 16.0,
            short_cap: 1.0,
            coarse_eps: 1.0,
            detector_eps: 0.5,
            detector_quota: 8.0,
            copies: None,
        }
    }
}

impl FpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("repetition_const", self.repetition_const),
            ("pair_quota", self.pair_quota),
            ("window_mult", self.window_mult),
            ("level_budget", self.level_budget),
            ("heaviness", self.heaviness),
            ("inner_floor", self.inner_floor),
            ("short_cap", self.short_cap),
            ("coarse_eps", self.coarse_eps),
            ("detector_eps", self.detector_eps),
            ("detector_quota", self.detector_quota),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.d0 < 0.0 || self.level_budget > 1.0 || self.inner_trunks == 0 || self.copies == Some(0) {
            return Err(Error::Config("invalid pipeline constants".into()));
        }
        Ok(())
    }

    pub fn repetitions(&self, p: f64, eps: f64) -> usize {
        even_repetitions(self.repetition_const, p, eps)
    }

    pub fn scale(&self, n: u64, eps: f64, delta: f64) -> f64 {
        self.scale.unwrap_or_else(|| {
            let l = (n.max(2) as f64 / delta).log2();
            (l * l / (eps * eps)).max(16.0)
        })
    }

    pub fn growth(&self, n: u64, eps: f64, delta: f64) -> f64 {
        self.growth.unwrap_or_else(|| ((n.max(2) as f64 / delta).log2() / eps).max(16.0))
    }

    pub fn copies(&self, delta: f64) -> usize {
        self.copies.unwrap_or_else(|| (6.0 * (1.0 / delta).log2()).ceil().max(1.0) as usize)
    }
}
