//! Deterministic moment estimation on random-order streams.
//!
//! No generator is consulted anywhere in this module. Randomness is
//! harvested from the arrival order: the parities of first-arrival
//! positions of rarely seen items are close to fair coins. A first batch of
//! bits picks a prime that compresses the ids of the next batch of items; a
//! second batch seeds the randomized estimator, which then runs on the
//! rest of the stream.

use rustc_hash::FxHashMap;

use crate::budget::{id_bits, width, BitBudget, SpaceUsage};
use crate::error::{Error, Result};
use crate::fp::{FpConfig, RndFp};
use crate::stream::{moment_of_counts, Cursor};

/// Constants of the prefix ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct DerandConfig {
    /// Head size `s = ceil(head_const · (log₂log₂ n + log₂ 1/δ))`.
    pub head_const: f64,
    /// Later-set size `|R| = ceil(later_const · log₂ n / δ)`.
    pub later_const: f64,
    /// Fraction of the observed items whose parities become bits.
    pub fraction: f64,
    /// Snapshot cap `small_const · log₂²n / ε²`.
    pub small_const: f64,
}

impl Default for DerandConfig {
    fn default() -> Self {
        DerandConfig { head_const: 8.0, later_const: 1.0, fraction: 0.5, small_const: 1.0 }
    }
}

/// Sizes derived from `(n, ε, δ)` and a [`DerandConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerParams {
    pub n: u64,
    pub delta: f64,
    pub head: usize,
    pub later: usize,
    pub small_cap: u64,
    pub fraction: f64,
}

impl LedgerParams {
    pub fn new(n: u64, eps: f64, delta: f64, cfg: &DerandConfig) -> Result<Self> {
        if n < 2 || !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("need n ≥ 2 and ε, δ in (0, 1); got n = {n}, ε = {eps}, δ = {delta}")));
        }
        if !(cfg.fraction > 0.0 && cfg.fraction <= 1.0) || cfg.head_const <= 0.0 || cfg.later_const <= 0.0 {
            return Err(Error::Config("ledger constants must be positive, fraction in (0, 1]".into()));
        }
        let log_n = (n as f64).log2();
        let head = (cfg.head_const * (log_n.log2().max(0.0) + (1.0 / delta).log2())).ceil().max(1.0) as usize;
        let later = (cfg.later_const * log_n / delta).ceil().max(1.0) as usize;
        let small_cap = (cfg.small_const * log_n * log_n / (eps * eps)).ceil().max(1.0) as u64;
        Ok(LedgerParams { n, delta, head, later, small_cap, fraction: cfg.fraction })
    }

    /// `|L| = floor(fraction · t)` for `t` observed items.
    pub fn small_set(&self, t: usize) -> usize {
        (self.fraction * t as f64).floor() as usize
    }
}

/// One observed item: id (or residue), approximate count and first
/// arrival position (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observed {
    pub id: u64,
    pub count: u64,
    pub first: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitSource {
    Head,
    Later,
    Explicit,
}

/// Parities of first arrivals of the `|L|` smallest-count items, in id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedBits {
    bits: Vec<bool>,
    /// Number of items the small set was chosen from.
    pub observed: usize,
    pub source: BitSource,
}

impl ExtractedBits {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Integer formed by the first `len` bits, first bit least significant.
    pub fn prefix_value(&self, len: usize) -> u64 {
        assert!(len <= 64 && len <= self.bits.len());
        self.bits[..len].iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i)
    }
}

/// Sorts by approximate count (ties by id), keeps the `take` smallest,
/// re-sorts them by id and emits their first-arrival parities.
pub fn extract_bits(items: &[Observed], take: usize) -> Result<ExtractedBits> {
    extract_from(items, take, BitSource::Explicit)
}

fn extract_from(items: &[Observed], take: usize, source: BitSource) -> Result<ExtractedBits> {
    if take == 0 || take > items.len() {
        return Err(Error::InsufficientPrefix { have: items.len(), need: take.max(1) });
    }
    let mut v = items.to_vec();
    v.sort_unstable_by_key(|o| (o.count, o.id));
    v.truncate(take);
    v.sort_unstable_by_key(|o| o.id);
    Ok(ExtractedBits { bits: v.iter().map(|o| o.first % 2 == 1).collect(), observed: items.len(), source })
}

/// Seed for the randomized phase. Only this module can build one, and only
/// from extracted bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSource(u64);

impl SeedSource {
    fn from_bits(bits: &ExtractedBits) -> Self {
        SeedSource(bits.prefix_value(bits.len().min(64)))
    }

    pub fn seed(&self) -> u64 {
        self.0
    }
}

/// Primes in `[P₀, 2P₀]` with `P₀ = ceil((log₂ n / δ)³)`.
#[derive(Clone, Debug)]
pub struct PrimeSieve {
    base: u64,
    primes: Vec<u64>,
}

const SIEVE_LIMIT: u64 = 1 << 31;

impl PrimeSieve {
    pub fn new(n: u64, delta: f64) -> Result<Self> {
        let base = ((n.max(2) as f64).log2() / delta).powi(3).ceil() as u64;
        Self::over(base.max(2))
    }

    /// Primes in `[base, 2·base]`.
    pub fn over(base: u64) -> Result<Self> {
        if base > SIEVE_LIMIT {
            return Err(Error::Config(format!("prime range starting at {base} is too large to sieve")));
        }
        let hi = 2 * base;
        let root = (hi as f64).sqrt() as u64 + 1;
        let mut small = vec![true; root as usize + 1];
        let mut seeds = Vec::new();
        for i in 2..=root {
            if small[i as usize] {
                seeds.push(i);
                let mut j = i * i;
                while j <= root {
                    small[j as usize] = false;
                    j += i;
                }
            }
        }
        let mut mark = vec![true; (hi - base + 1) as usize];
        for &q in &seeds {
            let mut j = (base.div_ceil(q) * q).max(q * q);
            while j <= hi {
                mark[(j - base) as usize] = false;
                j += q;
            }
        }
        let primes = mark
            .iter()
            .enumerate()
            .filter(|&(i, &m)| m && base + i as u64 >= 2)
            .map(|(i, _)| base + i as u64)
            .collect();
        Ok(PrimeSieve { base, primes })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn count(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `ceil(log₂ Π)`.
    pub fn index_bits(&self) -> usize {
        width(self.primes.len().saturating_sub(1) as u64) as usize
    }

    /// Bits consumed when available: `ceil(log₂ Π) + max(4, ceil(log₂(10/δ)))`,
    /// which keeps the modular bias of the index within `δ/10`.
    pub fn preferred_bits(&self, delta: f64) -> usize {
        self.index_bits() + ((10.0 / delta).log2().ceil() as usize).max(4)
    }

    /// The `(v mod Π)`-th prime, `v` read from the first `len` bits.
    pub fn pick(&self, bits: &ExtractedBits, len: usize) -> Result<u64> {
        let need = self.index_bits();
        if bits.len() < need || len < need || len > bits.len() {
            return Err(Error::InsufficientBits { have: bits.len().min(len), need });
        }
        let v = bits.prefix_value(len.min(64));
        Ok(self.primes[(v % self.primes.len() as u64) as usize])
    }

    pub fn sample(&self, bits: &ExtractedBits, delta: f64) -> Result<u64> {
        self.pick(bits, self.preferred_bits(delta).min(bits.len()).min(64))
    }
}

/// Samples a prime for the universe hash from extracted bits.
pub fn sample_prime(bits: &ExtractedBits, n: u64, delta: f64) -> Result<u64> {
    PrimeSieve::new(n, delta)?.sample(bits, delta)
}

/// Count of a later item at the largest doubling horizon where it was
/// still small. `span` is the horizon length counted from `s₁ + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Horizon {
    pub index: u32,
    pub span: u64,
    pub count: u64,
}

#[derive(Clone, Debug)]
struct Head {
    id: u64,
    count: u64,
    first: u64,
}

#[derive(Clone, Debug)]
struct Later {
    residue: u64,
    first: u64,
    live: u64,
    horizon: Option<Horizon>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LedgerPhase {
    /// Collecting the first `s` distinct items.
    Head,
    /// Collecting `|R|` further distinct items.
    Later,
    /// Ledger complete; only counts of known items advance.
    Tracking,
}

/// Everything the deterministic algorithm remembers about the prefix.
#[derive(Clone, Debug)]
pub struct PrefixLedger {
    params: LedgerParams,
    sieve_base: u64,
    pos: u64,
    head: Vec<Head>,
    head_index: FxHashMap<u64, usize>,
    s1: Option<u64>,
    prime: Option<u64>,
    head_bits: Option<ExtractedBits>,
    later: Vec<Later>,
    later_index: FxHashMap<u64, usize>,
    next_horizon: u64,
    horizon_index: u32,
    complete_at: Option<u64>,
    untracked: u64,
}

impl PrefixLedger {
    /// Fails when the head cannot supply enough bits for the prime index.
    pub fn new(params: LedgerParams, sieve: &PrimeSieve) -> Result<Self> {
        let have = params.small_set(params.head);
        if have < sieve.index_bits() {
            return Err(Error::InsufficientBits { have, need: sieve.index_bits() });
        }
        Ok(PrefixLedger {
            sieve_base: sieve.base(),
            params,
            pos: 0,
            head: Vec::new(),
            head_index: FxHashMap::default(),
            s1: None,
            prime: None,
            head_bits: None,
            later: Vec::new(),
            later_index: FxHashMap::default(),
            next_horizon: 1,
            horizon_index: 1,
            complete_at: None,
            untracked: 0,
        })
    }

    pub fn params(&self) -> &LedgerParams {
        &self.params
    }

    pub fn phase(&self) -> LedgerPhase {
        if self.s1.is_none() {
            LedgerPhase::Head
        } else if self.complete_at.is_none() {
            LedgerPhase::Later
        } else {
            LedgerPhase::Tracking
        }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Position at which the `s`-th distinct item arrived.
    pub fn s1(&self) -> Option<u64> {
        self.s1
    }

    /// Prefix length `m′` once the ledger is complete.
    pub fn complete_at(&self) -> Option<u64> {
        self.complete_at
    }

    pub fn prime(&self) -> Option<u64> {
        self.prime
    }

    pub fn head_bits(&self) -> Option<&ExtractedBits> {
        self.head_bits.as_ref()
    }

    pub fn distinct(&self) -> usize {
        self.head.len() + self.later.len()
    }

    pub fn untracked(&self) -> u64 {
        self.untracked
    }

    /// Feeds one update. Needs the sieve the ledger was built against.
    pub fn update(&mut self, item: u64, sieve: &PrimeSieve) {
        debug_assert_eq!(sieve.base(), self.sieve_base);
        self.pos += 1;
        if let Some(&i) = self.head_index.get(&item) {
            self.head[i].count += 1;
        } else if self.s1.is_none() {
            self.head_index.insert(item, self.head.len());
            self.head.push(Head { id: item, count: 1, first: self.pos });
            if self.head.len() == self.params.head {
                self.close_head(sieve);
            }
            return;
        } else {
            let q = self.prime.expect("prime fixed when the head closed");
            let residue = item % q;
            if let Some(&i) = self.later_index.get(&residue) {
                self.later[i].live += 1;
            } else if self.complete_at.is_none() {
                self.later_index.insert(residue, self.later.len());
                self.later.push(Later { residue, first: self.pos, live: 1, horizon: None });
            } else {
                self.untracked += 1;
            }
        }
        if self.phase() == LedgerPhase::Later {
            self.advance_horizons();
        }
    }

    fn close_head(&mut self, sieve: &PrimeSieve) {
        self.s1 = Some(self.pos);
        let obs: Vec<_> = self.head.iter().map(|h| Observed { id: h.id, count: h.count, first: h.first }).collect();
        let bits = extract_from(&obs, self.params.small_set(obs.len()), BitSource::Head)
            .expect("head size checked at construction");
        self.prime = Some(sieve.sample(&bits, self.params.delta).expect("bit count checked at construction"));
        self.head_bits = Some(bits);
    }

    fn advance_horizons(&mut self) {
        let s1 = self.s1.expect("later phase");
        let rel = self.pos - s1;
        let cap = self.params.small_cap;
        if rel == self.next_horizon {
            let h = (self.horizon_index, rel);
            for e in self.later.iter_mut().filter(|e| e.live <= cap) {
                e.horizon = Some(Horizon { index: h.0, span: h.1, count: e.live });
            }
            self.horizon_index += 1;
            self.next_horizon *= 2;
        }
        if self.later.len() == self.params.later {
            self.complete_at = Some(self.pos);
            for e in self.later.iter_mut().filter(|e| e.live <= cap) {
                if e.horizon.map_or(true, |h| h.span < rel) {
                    e.horizon = Some(Horizon { index: self.horizon_index, span: rel, count: e.live });
                }
            }
        }
    }

    /// Snapshots of the later items, keyed by residue, in residue order.
    pub fn snapshots(&self) -> Vec<(u64, Option<Horizon>)> {
        let mut v: Vec<_> = self.later.iter().map(|e| (e.residue, e.horizon)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    /// Approximate count of a later item over `[s₁+1, m′]`: its horizon
    /// count scaled to the full window.
    fn later_estimate(&self, e: &Later) -> u64 {
        let window = self.complete_at.unwrap_or(self.pos) - self.s1.unwrap_or(0);
        match e.horizon {
            Some(h) if h.span > 0 => (h.count as f64 * window as f64 / h.span as f64).round() as u64,
            _ => e.live,
        }
    }

    /// Approximate count of the later item with residue `item mod q`.
    pub fn estimate(&self, item: u64) -> Option<u64> {
        let q = self.prime?;
        let &i = self.later_index.get(&(item % q))?;
        Some(self.later_estimate(&self.later[i]))
    }

    /// Bits from the later set; fails while it is incomplete.
    pub fn later_bits(&self) -> Result<ExtractedBits> {
        if self.complete_at.is_none() {
            return Err(Error::InsufficientPrefix { have: self.later.len(), need: self.params.later });
        }
        let obs: Vec<_> = self
            .later
            .iter()
            .map(|e| Observed { id: e.residue, count: self.later_estimate(e), first: e.first })
            .collect();
        extract_from(&obs, self.params.small_set(obs.len()), BitSource::Later)
    }

    /// `F_p` of the tracked counts, plus untracked updates as singletons.
    pub fn moment(&self, p: f64) -> f64 {
        let counts = self.head.iter().map(|h| h.count).chain(self.later.iter().map(|e| e.live));
        moment_of_counts(counts, p) + self.untracked as f64
    }
}

impl SpaceUsage for PrefixLedger {
    fn bits(&self) -> u64 {
        let pos = width(self.pos.max(1));
        let id = id_bits(self.params.n + 1);
        let head: u64 = self.head.iter().map(|h| id + width(h.count) + pos).sum();
        let residue = self.prime.map_or(id, width);
        let later: u64 = self
            .later
            .iter()
            .map(|e| residue + 1 + width(e.live) + e.horizon.map_or(0, |h| width(h.index as u64) + width(h.count)))
            .sum();
        head + later + self.head_bits.as_ref().map_or(0, |b| b.len() as u64) + 6 * 64
    }
}

/// Feeds `cursor` into the ledger until it completes or the stream ends;
/// returns the snapshots of the later items.
pub fn snapshot_counts(
    ledger: &mut PrefixLedger,
    sieve: &PrimeSieve,
    cursor: &mut Cursor<'_>,
) -> Vec<(u64, Option<Horizon>)> {
    while ledger.phase() != LedgerPhase::Tracking {
        let Some(a) = cursor.next() else { break };
        ledger.update(a, sieve);
    }
    ledger.snapshots()
}

/// Which path produced a deterministic estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    /// The ledger never completed: counts are exact.
    Exact,
    /// The suffix never outgrew the prefix: tracked counts.
    Tracked,
    /// The seeded randomized estimator.
    Seeded,
}

#[derive(Clone, Debug)]
pub struct DetOutcome {
    pub estimate: f64,
    pub answer: Answer,
    pub prefix_len: Option<u64>,
    pub prime: Option<u64>,
    pub seed: Option<SeedSource>,
    pub ledger_bits: u64,
    pub peak_bits: u64,
}

impl DetOutcome {
    pub fn budget(&self) -> BitBudget {
        BitBudget::node(
            "fpdet",
            vec![BitBudget::leaf("ledger", self.ledger_bits), BitBudget::leaf("seeded", self.peak_bits - self.ledger_bits)],
        )
        .with_peak(self.peak_bits)
    }
}

/// Single-pass deterministic `F_p` estimate of the stream behind `cursor`.
pub fn deterministic_fp(
    p: f64,
    eps: f64,
    delta: f64,
    n: u64,
    cursor: &mut Cursor<'_>,
    cfg: &DerandConfig,
    fp_cfg: FpConfig,
) -> Result<DetOutcome> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::Domain { p });
    }
    let params = LedgerParams::new(n, eps, delta, cfg)?;
    let sieve = PrimeSieve::new(n, delta)?;
    let mut ledger = PrefixLedger::new(params, &sieve)?;
    snapshot_counts(&mut ledger, &sieve, cursor);
    let Some(prefix_len) = ledger.complete_at() else {
        let b = ledger.bits();
        return Ok(DetOutcome {
            estimate: ledger.moment(p),
            answer: Answer::Exact,
            prefix_len: None,
            prime: ledger.prime(),
            seed: None,
            ledger_bits: b,
            peak_bits: b,
        });
    };
    let seed = SeedSource::from_bits(&ledger.later_bits()?);
    let handoff = ledger.moment(p);
    let mut est = RndFp::new(p, eps, delta, n, seed.seed(), fp_cfg)?;
    let mut switched = false;
    let mut suffix: u64 = 0;
    let mut next_check: u64 = 1;
    let mut peak = 0u64;
    for a in cursor.by_ref() {
        ledger.update(a, &sieve);
        est.update(a);
        suffix += 1;
        if suffix == next_check {
            next_check *= 2;
            peak = peak.max(ledger.bits() + est.peak_bits());
            if !switched && est.query().is_some_and(|v| v * eps >= handoff) {
                switched = true;
            }
        }
    }
    if !switched && suffix > 0 && est.query().is_some_and(|v| v * eps >= handoff) {
        switched = true;
    }
    let ledger_bits = ledger.bits();
    let peak_bits = peak.max(ledger_bits + est.peak_bits());
    let (estimate, answer) = match est.query() {
        Some(v) if switched => (v, Answer::Seeded),
        _ => (ledger.moment(p), Answer::Tracked),
    };
    Ok(DetOutcome {
        estimate,
        answer,
        prefix_len: Some(prefix_len),
        prime: ledger.prime(),
        seed: Some(seed),
        ledger_bits,
        peak_bits,
    })
}
