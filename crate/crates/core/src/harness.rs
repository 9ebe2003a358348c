//! Experiment driver: stream sources, Monte-Carlo trials, success-rate
//! summaries, CSV emission and the space audit.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::budget::{id_bits, width, SpaceUsage};
use crate::derand::{deterministic_fp, Answer, DerandConfig};
use crate::error::{Error, Result};
use crate::f2::RandF2;
use crate::fp::{FpConfig, RndFp};
use crate::io::read_stream;
use crate::seed;
use crate::stream::{count_items, generate, GeneratorKind, GeneratorSpec, Stream};

/// Version tag written in every CSV preamble.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    F2Rand,
    FpRand,
    FpDet,
    Oracle,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::F2Rand => "f2rand",
            Algo::FpRand => "fprand",
            Algo::FpDet => "fpdet",
            Algo::Oracle => "oracle",
        }
    }

    pub fn schema_id(self) -> String {
        format!("streammoments.{}.v{SCHEMA_VERSION}", self.name())
    }

    /// Success rate the acceptance suite asks of this algorithm.
    pub fn target_rate(self) -> f64 {
        match self {
            Algo::F2Rand => 0.85,
            Algo::FpRand => 0.80,
            Algo::FpDet => 0.75,
            Algo::Oracle => 1.0,
        }
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            Algo::F2Rand => &["trial", "Y", "exactF2", "relerr", "bits"],
            Algo::FpRand => &["trial", "estimate", "exact", "relerr", "bits_peak", "updates_consumed_by_hhr", "failed"],
            Algo::FpDet => &["trial", "estimate", "exact", "relerr", "bits_peak", "answer", "failed"],
            Algo::Oracle => &["trial", "estimate", "exact", "relerr"],
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f2rand" => Ok(Algo::F2Rand),
            "fprand" => Ok(Algo::FpRand),
            "fpdet" => Ok(Algo::FpDet),
            "oracle" => Ok(Algo::Oracle),
            _ => Err(Error::Config(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Parses `uniform`, `zipf:S`, `planted:COUNT:FREQ` (the rest of the
/// stream spread evenly) or `mixture:S:COUNT:FREQ`.
pub fn parse_generator(s: &str, m: u64) -> Result<GeneratorKind> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("generator `{s}`: field {i} missing or not a number")))
    };
    let kind = match parts[0] {
        "uniform" if parts.len() == 1 => GeneratorKind::Uniform,
        "zipf" if parts.len() == 2 => GeneratorKind::Zipf { skew: num(1)? },
        "planted" if parts.len() == 3 => {
            let (heavy_count, heavy_freq) = (num(1)? as u64, num(2)? as u64);
            let background = m
                .checked_sub(heavy_count * heavy_freq)
                .ok_or_else(|| Error::Config("planted mass exceeds m".into()))?;
            GeneratorKind::PlantedHeavy { heavy_count, heavy_freq, background }
        }
        "mixture" if parts.len() == 4 => {
            GeneratorKind::Mixture { skew: num(1)?, heavy_count: num(2)? as u64, heavy_freq: num(3)? as u64 }
        }
        _ => return Err(Error::Config(format!("unrecognized generator `{s}`"))),
    };
    Ok(kind)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Generated(GeneratorSpec),
    File { path: PathBuf, n: Option<u64> },
}

impl Source {
    pub fn load(&self) -> Result<Stream> {
        match self {
            Source::Generated(g) => generate(g),
            Source::File { path, n } => read_stream(path, *n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub algo: Algo,
    pub source: Source,
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub copies: Option<usize>,
    /// Shuffle the source before every trial. A file given without
    /// shuffling is replayed in its own order.
    pub shuffle: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("need at least one trial".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("need ε, δ in (0, 1); got {} and {}", self.eps, self.delta)));
        }
        match self.algo {
            Algo::FpRand | Algo::FpDet if !(self.p > 0.0 && self.p < 2.0) => Err(Error::Domain { p: self.p }),
            Algo::Oracle if !(self.p >= 0.0) => Err(Error::Domain { p: self.p }),
            _ => Ok(()),
        }
    }

    /// Relative error a trial may show and still count as a success:
    /// `ε` for the second moment, `p·ε·(1+ε)` for the quantile estimators.
    pub fn tolerance(&self) -> f64 {
        match self.algo {
            Algo::F2Rand => self.eps,
            Algo::FpRand | Algo::FpDet => self.p * self.eps * (1.0 + self.eps),
            Algo::Oracle => 0.0,
        }
    }

    fn exponent(&self) -> f64 {
        if self.algo == Algo::F2Rand {
            2.0
        } else {
            self.p
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: u64,
    pub estimate: Option<f64>,
    pub exact: f64,
    pub bits_peak: u64,
    pub consumed: u64,
    pub note: &'static str,
}

impl TrialRow {
    pub fn failed(&self) -> bool {
        self.estimate.is_none()
    }

    pub fn relerr(&self) -> Option<f64> {
        let e = self.estimate?;
        Some(if self.exact == 0.0 { e.abs() } else { (e - self.exact).abs() / self.exact })
    }
}

/// Wilson score interval for `k` successes out of `n` at `z` standard
/// deviations.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let ph = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub trials: u64,
    pub successes: u64,
    pub failures: u64,
    pub tolerance: f64,
    pub rate: f64,
    pub ci: (f64, f64),
    pub target: f64,
}

impl Summary {
    pub fn of(rows: &[TrialRow], tolerance: f64, target: f64) -> Self {
        let trials = rows.len() as u64;
        let successes = rows.iter().filter(|r| r.relerr().is_some_and(|e| e <= tolerance + 1e-12)).count() as u64;
        let failures = rows.iter().filter(|r| r.failed()).count() as u64;
        Summary {
            trials,
            successes,
            failures,
            tolerance,
            rate: successes as f64 / trials.max(1) as f64,
            ci: wilson(successes, trials, 1.96),
            target,
        }
    }

    pub fn passed(&self) -> bool {
        self.rate >= self.target
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub spec: ExperimentSpec,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

/// Runs `f` on a pool capped by `STREAMMOMENTS_THREADS` when set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("STREAMMOMENTS_THREADS") {
        Ok(v) => {
            let threads: usize = v
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| Error::Config(format!("STREAMMOMENTS_THREADS=`{v}` is not a positive integer")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// One CSV row per trial; trial `t` shuffles with seed `base + t`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.validate()?;
    let base = spec.source.load()?;
    let exact = base.exact_moment(spec.exponent());
    let rows = with_pool(|| {
        (0..spec.trials).into_par_iter().map(|t| run_trial(spec, &base, exact, t)).collect::<Result<Vec<_>>>()
    })??;
    let summary = Summary::of(&rows, spec.tolerance(), spec.algo.target_rate());
    Ok(Outcome { spec: spec.clone(), rows, summary })
}

fn run_trial(spec: &ExperimentSpec, base: &Stream, exact: f64, t: u64) -> Result<TrialRow> {
    let trial_seed = spec.seed.wrapping_add(t);
    let shuffled;
    let stream = if spec.shuffle {
        shuffled = base.shuffle(trial_seed);
        &shuffled
    } else {
        base
    };
    let n = stream.universe();
    let row = |estimate, bits_peak, consumed, note| TrialRow { trial: t, estimate, exact, bits_peak, consumed, note };
    Ok(match spec.algo {
        Algo::Oracle => row(Some(stream.exact_moment(spec.p)), 0, 0, ""),
        Algo::F2Rand => {
            let mut est = RandF2::with_accuracy(spec.eps, spec.delta, n);
            for &a in stream.updates() {
                est.update(a);
            }
            row(est.estimate().ok(), est.bits(), 0, "")
        }
        Algo::FpRand => {
            let cfg = FpConfig { copies: spec.copies, ..FpConfig::default() };
            let mut est = RndFp::new(spec.p, spec.eps, spec.delta, n, seed::derive(trial_seed, 1), cfg)?;
            for &a in stream.updates() {
                est.update(a);
            }
            row(est.query(), est.peak_bits(), est.level_consumed().max(est.search_consumed()), "")
        }
        Algo::FpDet => {
            let cfg = FpConfig { copies: spec.copies, ..FpConfig::default() };
            let out = deterministic_fp(spec.p, spec.eps, spec.delta, n, &mut stream.cursor(), &DerandConfig::default(), cfg)?;
            let note = match out.answer {
                Answer::Exact => "exact",
                Answer::Tracked => "tracked",
                Answer::Seeded => "seeded",
            };
            row(Some(out.estimate), out.peak_bits, 0, note)
        }
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

/// Writes `# schema=<id>`, the column header, one row per trial and a
/// `# summary` trailer.
pub fn write_csv<W: Write>(out: W, outcome: &Outcome) -> Result<()> {
    let algo = outcome.spec.algo;
    let mut raw = out;
    writeln!(raw, "# schema={}", algo.schema_id())?;
    let mut w = csv::Writer::from_writer(raw);
    w.write_record(algo.columns())?;
    for r in &outcome.rows {
        let rec: Vec<String> = match algo {
            Algo::F2Rand => vec![
                r.trial.to_string(),
                fmt_opt(r.estimate),
                format!("{}", r.exact),
                fmt_opt(r.relerr()),
                r.bits_peak.to_string(),
            ],
            Algo::FpRand => vec![
                r.trial.to_string(),
                fmt_opt(r.estimate),
                format!("{}", r.exact),
                fmt_opt(r.relerr()),
                r.bits_peak.to_string(),
                r.consumed.to_string(),
                u8::from(r.failed()).to_string(),
            ],
            Algo::FpDet => vec![
                r.trial.to_string(),
                fmt_opt(r.estimate),
                format!("{}", r.exact),
                fmt_opt(r.relerr()),
                r.bits_peak.to_string(),
                r.note.to_string(),
                u8::from(r.failed()).to_string(),
            ],
            Algo::Oracle => {
                vec![r.trial.to_string(), fmt_opt(r.estimate), format!("{}", r.exact), fmt_opt(r.relerr())]
            }
        };
        w.write_record(&rec)?;
    }
    let mut raw = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let s = &outcome.summary;
    writeln!(
        raw,
        "# summary trials={} successes={} failures={} tolerance={} rate={} wilson95=[{:.4},{:.4}] target={}",
        s.trials, s.successes, s.failures, s.tolerance, s.rate, s.ci.0, s.ci.1, s.target
    )?;
    Ok(())
}

/// Bits of an exact table holding one `(id, count)` pair per distinct item.
pub fn naive_table_bits(stream: &Stream) -> u64 {
    let counts = count_items(stream.updates());
    let cbits = width(counts.values().copied().max().unwrap_or(1));
    counts.len() as u64 * (id_bits(stream.universe() + 1) + cbits)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub algo: Algo,
    pub eps: f64,
    pub bits_peak: u64,
    pub reference_bits: u64,
    pub estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    /// Least-squares slope of `ln bits` against `ln 1/ε` over the
    /// randomized-moment rows.
    pub exponent: f64,
    pub naive_bits: u64,
    pub exact: f64,
}

pub const AUDIT_GRID: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Least-squares slope of `ys` on `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Peak bits of a single-copy moment estimator over `grid`, plus one
/// second-moment row and one oracle row.
pub fn audit_space(spec: &ExperimentSpec, grid: &[f64]) -> Result<AuditReport> {
    let stream = spec.source.load()?;
    let n = stream.universe();
    let naive_bits = naive_table_bits(&stream);
    let exact = stream.exact_moment(spec.p);
    let rows = with_pool(|| {
        grid.par_iter()
            .map(|&eps| {
                let cfg = FpConfig { copies: Some(1), ..FpConfig::default() };
                let mut est = RndFp::new(spec.p, eps, spec.delta, n, spec.seed, cfg)?;
                for &a in stream.updates() {
                    est.update(a);
                }
                Ok(AuditRow { algo: Algo::FpRand, eps, bits_peak: est.peak_bits(), reference_bits: naive_bits, estimate: est.query() })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.eps).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.bits_peak as f64).ln()).collect();
    let exponent = if rows.len() >= 2 { slope(&xs, &ys) } else { f64::NAN };
    let mut rows = rows;
    let mut f2 = RandF2::with_accuracy(spec.eps, spec.delta, n);
    for &a in stream.updates() {
        f2.update(a);
    }
    let b = f2.block() as u64;
    rows.push(AuditRow {
        algo: Algo::F2Rand,
        eps: spec.eps,
        bits_peak: f2.bits(),
        reference_bits: 2 * b * id_bits(n + 1),
        estimate: f2.estimate().ok(),
    });
    rows.push(AuditRow { algo: Algo::Oracle, eps: 0.0, bits_peak: naive_bits, reference_bits: naive_bits, estimate: Some(exact) });
    Ok(AuditReport { rows, exponent, naive_bits, exact })
}

pub fn write_audit_csv<W: Write>(out: W, report: &AuditReport) -> Result<()> {
    let mut raw = out;
    writeln!(raw, "# schema=streammoments.audit.v{SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(raw);
    w.write_record(["algo", "epsilon", "bits_peak", "reference_bits", "estimate", "note"])?;
    for r in &report.rows {
        let note = match r.algo {
            Algo::Oracle => "exempt",
            Algo::F2Rand => "reference=2b*log2(n)",
            _ => "reference=naive table",
        };
        w.write_record([
            r.algo.name().to_string(),
            format!("{}", r.eps),
            r.bits_peak.to_string(),
            r.reference_bits.to_string(),
            fmt_opt(r.estimate),
            note.to_string(),
        ])?;
    }
    let mut raw = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    writeln!(raw, "# exponent={:.4} naive_bits={} exact={}", report.exponent, report.naive_bits, report.exact)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_rate() {
        let (lo, hi) = wilson(80, 100, 1.96);
        assert!(lo < 0.8 && hi > 0.8);
        assert!((lo - 0.7111).abs() < 1e-3 && (hi - 0.8666).abs() < 1e-3);
        assert_eq!(wilson(0, 0, 1.96), (0.0, 1.0));
    }

    #[test]
    fn generator_strings() {
        assert_eq!(parse_generator("uniform", 10).unwrap(), GeneratorKind::Uniform);
        assert_eq!(parse_generator("zipf:1.5", 10).unwrap(), GeneratorKind::Zipf { skew: 1.5 });
        assert_eq!(
            parse_generator("planted:2:3", 10).unwrap(),
            GeneratorKind::PlantedHeavy { heavy_count: 2, heavy_freq: 3, background: 4 }
        );
        assert!(parse_generator("planted:5:3", 10).is_err());
        assert!(parse_generator("zipf", 10).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 4.0, 16.0].iter().map(|v| v.ln()).collect();
        assert!((slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
