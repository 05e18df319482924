//! Monte Carlo photoelectric counting for the heralded retrieval experiment.
//!
//! Each trial produces an idler click pattern at D1 and a retrieved signal
//! split between D2 and D3. Detectors are threshold detectors with an
//! independent background click probability per gate.
//!
//! Trials run in fixed-size shards. Shard `k` draws from a ChaCha8 generator
//! keyed by the master seed on stream `k`, and shard histograms are merged by
//! summation, so a tally depends only on `(seed, m)` and never on how many
//! workers ran it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::polariton::EfficiencyCurve;

/// Trials per shard.
pub const SHARD_SIZE: u64 = 1 << 16;
/// Effective thermal mode count giving `g_ii = 1 + 1/K = 1.42`.
pub const THERMAL_MODES_K: f64 = 1.0 / 0.42;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is undefined: {1}")]
    Undefined(&'static str, &'static str),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    Coherent,
    DlczPair,
}

impl fmt::Display for SourceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceMode::Coherent => "coherent",
            SourceMode::DlczPair => "dlcz",
        })
    }
}

impl FromStr for SourceMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "coherent" => Ok(SourceMode::Coherent),
            "dlcz" | "dlcz_pair" | "dlcz-pair" => Ok(SourceMode::DlczPair),
            other => Err(format!("unknown source mode `{other}` (expected coherent or dlcz)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub mode: SourceMode,
    /// Mean number of signal/idler pairs per trial.
    pub mean_pair_number: f64,
    pub thermal_modes_k: f64,
    pub coherent_mean_photons: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        SourceModel::dlcz_fixture()
    }
}

impl SourceModel {
    /// Pair source tuned to `α ≈ 0.51` together with [`DetectionModel::dlcz_fixture`].
    pub fn dlcz_fixture() -> Self {
        SourceModel {
            mode: SourceMode::DlczPair,
            mean_pair_number: 0.29,
            thermal_modes_k: THERMAL_MODES_K,
            coherent_mean_photons: 5.0,
        }
    }

    pub fn coherent(mean_photons: f64) -> Self {
        SourceModel { mode: SourceMode::Coherent, coherent_mean_photons: mean_photons, ..SourceModel::dlcz_fixture() }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |what: &str, v: f64| StatsError::InvalidParameter(format!("{what} = {v}"));
        if !(self.mean_pair_number >= 0.0 && self.mean_pair_number.is_finite()) {
            return Err(bad("source.mean_pair_number", self.mean_pair_number));
        }
        if !(self.thermal_modes_k >= 1.0 && self.thermal_modes_k.is_finite()) {
            return Err(bad("source.thermal_modes_k (must be >= 1)", self.thermal_modes_k));
        }
        if !(self.coherent_mean_photons >= 0.0 && self.coherent_mean_photons.is_finite()) {
            return Err(bad("source.coherent_mean_photons", self.coherent_mean_photons));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel {
    pub eta_idler: f64,
    pub eta_signal_path: f64,
    pub eta_memory: f64,
    /// Background click probability per gate for D1, D2, D3.
    pub background_per_gate: [f64; 3],
    /// Fraction of the signal sent to D2.
    pub splitter_ratio: f64,
}

/// Static storage efficiency multiplying the Larmor-limited retrieval.
pub const STATIC_STORAGE_EFFICIENCY: f64 = 0.5;

impl Default for DetectionModel {
    fn default() -> Self {
        DetectionModel::dlcz_fixture()
    }
}

impl DetectionModel {
    pub fn dlcz_fixture() -> Self {
        DetectionModel {
            eta_idler: 0.1,
            eta_signal_path: 0.3,
            eta_memory: STATIC_STORAGE_EFFICIENCY,
            background_per_gate: [1e-6, 2e-4, 2e-4],
            splitter_ratio: 0.5,
        }
    }

    pub fn ideal() -> Self {
        DetectionModel {
            eta_idler: 1.0,
            eta_signal_path: 1.0,
            eta_memory: 1.0,
            background_per_gate: [0.0; 3],
            splitter_ratio: 0.5,
        }
    }

    pub fn signal_efficiency(&self) -> f64 {
        self.eta_signal_path * self.eta_memory
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let check = |what: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(StatsError::InvalidParameter(format!("{what} = {v} is not a probability")))
            }
        };
        check("detect.eta_idler", self.eta_idler)?;
        check("detect.eta_signal_path", self.eta_signal_path)?;
        check("detect.eta_memory", self.eta_memory)?;
        check("detect.splitter_ratio", self.splitter_ratio)?;
        for (i, &b) in self.background_per_gate.iter().enumerate() {
            check(["detect.background_d1", "detect.background_d2", "detect.background_d3"][i], b)?;
        }
        Ok(())
    }
}

/// Inverse-CDF sampler for a photon-number distribution with small mean.
#[derive(Debug, Clone)]
struct CountTable {
    cdf: Vec<f64>,
}

impl CountTable {
    const TAIL: f64 = 1e-17;
    const MAX_LEN: usize = 100_000;

    fn from_pmf(p0: f64, ratio: impl Fn(usize) -> f64) -> Self {
        let mut cdf = Vec::new();
        let (mut p, mut acc) = (p0, 0.0);
        let mut n = 0;
        loop {
            acc += p;
            cdf.push(acc);
            // Past the mode the remaining mass is below what doubles resolve.
            if (1.0 - acc < Self::TAIL && ratio(n) < 1.0) || cdf.len() >= Self::MAX_LEN {
                break;
            }
            p *= ratio(n);
            n += 1;
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        CountTable { cdf }
    }

    /// Negative binomial with mean `mu` over `k` modes.
    fn negative_binomial(mu: f64, k: f64) -> Self {
        let x = mu / (mu + k);
        Self::from_pmf((k / (k + mu)).powf(k), |n| (n as f64 + k) / (n as f64 + 1.0) * x)
    }

    fn poisson(mu: f64) -> Self {
        Self::from_pmf((-mu).exp(), |n| mu / (n as f64 + 1.0))
    }

    fn sample(&self, u: f64) -> u32 {
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1) as u32
    }
}

#[derive(Debug, Clone, Copy)]
enum Layout {
    /// D1 on the idler, D2/D3 on the split signal.
    Main,
    /// Two detectors on the split idler.
    SplitIdler,
}

#[derive(Debug, Clone)]
struct Kernel {
    table: CountTable,
    paired: bool,
    layout: Layout,
    q_idler: f64,
    q_d2: f64,
    q_signal: f64,
    background: [f64; 3],
}

impl Kernel {
    fn new(source: &SourceModel, det: &DetectionModel, layout: Layout) -> Result<Self, StatsError> {
        source.validate()?;
        det.validate()?;
        let (table, paired) = match source.mode {
            SourceMode::DlczPair => (CountTable::negative_binomial(source.mean_pair_number, source.thermal_modes_k), true),
            SourceMode::Coherent => (CountTable::poisson(source.coherent_mean_photons), false),
        };
        let es = det.signal_efficiency();
        Ok(Kernel {
            table,
            paired,
            layout,
            q_idler: det.eta_idler,
            q_d2: es * det.splitter_ratio,
            q_signal: es,
            background: match layout {
                Layout::Main => det.background_per_gate,
                Layout::SplitIdler => [det.background_per_gate[0], det.background_per_gate[0], 0.0],
            },
        })
    }

    /// Click pattern of one trial: bit `i` set when detector `i + 1` clicked.
    #[inline]
    fn trial(&self, rng: &mut ChaCha8Rng) -> usize {
        let n = self.table.sample(rng.random::<f64>());
        let mut mask = 0usize;
        for _ in 0..n {
            match self.layout {
                Layout::Main => {
                    if self.paired && rng.random::<f64>() < self.q_idler {
                        mask |= 1;
                    }
                    let u = rng.random::<f64>();
                    if u < self.q_d2 {
                        mask |= 2;
                    } else if u < self.q_signal {
                        mask |= 4;
                    }
                }
                Layout::SplitIdler => {
                    if self.paired && rng.random::<f64>() < self.q_idler {
                        mask |= if rng.random::<f64>() < 0.5 { 1 } else { 2 };
                    }
                }
            }
        }
        for (i, &b) in self.background.iter().enumerate() {
            if b > 0.0 && rng.random::<f64>() < b {
                mask |= 1 << i;
            }
        }
        mask
    }

    fn shard(&self, seed: u64, index: u64, len: u64) -> [u64; 8] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut hist = [0u64; 8];
        for _ in 0..len {
            hist[self.trial(&mut rng)] += 1;
        }
        hist
    }

    fn histogram(&self, m: u64, seed: u64, workers: Option<usize>) -> Result<[u64; 8], StatsError> {
        let shards = m.div_ceil(SHARD_SIZE);
        let run = || {
            (0..shards)
                .into_par_iter()
                .map(|k| self.shard(seed, k, SHARD_SIZE.min(m - k * SHARD_SIZE)))
                .reduce(|| [0u64; 8], |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                })
        };
        match workers {
            None => Ok(run()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| StatsError::ThreadPool(e.to_string()))?;
                Ok(pool.install(run))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoincidenceTally {
    pub m_trials: u64,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub n12: u64,
    pub n13: u64,
    pub n23: u64,
    pub n123: u64,
}

impl CoincidenceTally {
    fn from_histogram(m: u64, h: &[u64; 8]) -> Self {
        let sum = |bits: usize| -> u64 { (0..8).filter(|p| p & bits == bits).map(|p| h[p]).sum() };
        CoincidenceTally {
            m_trials: m,
            n1: sum(1),
            n2: sum(2),
            n3: sum(4),
            n12: sum(3),
            n13: sum(5),
            n23: sum(6),
            n123: sum(7),
        }
    }

    pub fn merge(&self, other: &CoincidenceTally) -> CoincidenceTally {
        CoincidenceTally {
            m_trials: self.m_trials + other.m_trials,
            n1: self.n1 + other.n1,
            n2: self.n2 + other.n2,
            n3: self.n3 + other.n3,
            n12: self.n12 + other.n12,
            n13: self.n13 + other.n13,
            n23: self.n23 + other.n23,
            n123: self.n123 + other.n123,
        }
    }

    /// Whether every coincidence count is bounded by the counts it implies.
    pub fn is_consistent(&self) -> bool {
        let singles = [self.n1, self.n2, self.n3].iter().all(|&n| n <= self.m_trials);
        singles
            && self.n12 <= self.n1.min(self.n2)
            && self.n13 <= self.n1.min(self.n3)
            && self.n23 <= self.n2.min(self.n3)
            && self.n123 <= self.n12.min(self.n13).min(self.n23)
    }
}

/// Value with a one-standard-deviation statistical uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard deviations.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.sigma
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.value, self.sigma)
    }
}

/// Relative variance contribution of a binomial count `n` out of `m`.
fn rel_var(n: u64, m: u64) -> f64 {
    (1.0 - n as f64 / m as f64) / n as f64
}

fn ratio_estimate(value: f64, counts: &[u64], m: u64) -> Estimate {
    let rv: f64 = counts.iter().map(|&n| rel_var(n, m)).sum();
    Estimate { value, sigma: value.abs() * rv.sqrt() }
}

pub fn run_trials(source: &SourceModel, det: &DetectionModel, m: u64, seed: u64) -> Result<CoincidenceTally, StatsError> {
    run_trials_with(source, det, m, seed, None)
}

/// As [`run_trials`], on a dedicated pool of `workers` threads when given.
pub fn run_trials_with(
    source: &SourceModel,
    det: &DetectionModel,
    m: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<CoincidenceTally, StatsError> {
    if m == 0 {
        return Err(StatsError::InvalidParameter("trial count must be at least 1".into()));
    }
    let kernel = Kernel::new(source, det, Layout::Main)?;
    let hist = kernel.histogram(m, seed, workers)?;
    Ok(CoincidenceTally::from_histogram(m, &hist))
}

/// `g_si = (n12 + n13) / (n1 (n2 + n3) / M)`.
pub fn g_si(tally: &CoincidenceTally) -> Result<Estimate, StatsError> {
    let signal = tally.n2 + tally.n3;
    if tally.n1 == 0 || signal == 0 {
        return Err(StatsError::Undefined("g_si", "no idler or no signal counts"));
    }
    let coinc = tally.n12 + tally.n13;
    let value = coinc as f64 * tally.m_trials as f64 / (tally.n1 as f64 * signal as f64);
    if coinc == 0 {
        return Ok(Estimate { value, sigma: f64::INFINITY });
    }
    Ok(ratio_estimate(value, &[coinc, tally.n1, signal], tally.m_trials))
}

/// Grangier anticorrelation `α = n1 n123 / (n12 n13)`.
pub fn alpha(tally: &CoincidenceTally) -> Result<Estimate, StatsError> {
    if tally.n12 == 0 || tally.n13 == 0 {
        return Err(StatsError::Undefined("alpha", "no heralded coincidence on one signal arm"));
    }
    let value = tally.n1 as f64 * tally.n123 as f64 / (tally.n12 as f64 * tally.n13 as f64);
    if tally.n123 == 0 {
        // One count as the upper scale of the uncertainty.
        let sigma = tally.n1 as f64 / (tally.n12 as f64 * tally.n13 as f64);
        return Ok(Estimate { value, sigma });
    }
    Ok(ratio_estimate(value, &[tally.n1, tally.n123, tally.n12, tally.n13], tally.m_trials))
}

/// Unheralded signal autocorrelation from the D2/D3 split, `n23 M / (n2 n3)`.
pub fn g_ss(tally: &CoincidenceTally) -> Result<Estimate, StatsError> {
    if tally.n2 == 0 || tally.n3 == 0 {
        return Err(StatsError::Undefined("g_ss", "no counts on one signal arm"));
    }
    let value = tally.n23 as f64 * tally.m_trials as f64 / (tally.n2 as f64 * tally.n3 as f64);
    if tally.n23 == 0 {
        return Ok(Estimate { value, sigma: f64::INFINITY });
    }
    Ok(ratio_estimate(value, &[tally.n23, tally.n2, tally.n3], tally.m_trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitTally {
    pub m_trials: u64,
    pub na: u64,
    pub nb: u64,
    pub nab: u64,
}

impl SplitTally {
    pub fn autocorrelation(&self) -> Result<Estimate, StatsError> {
        if self.na == 0 || self.nb == 0 {
            return Err(StatsError::Undefined("autocorrelation", "no counts on one arm"));
        }
        let value = self.nab as f64 * self.m_trials as f64 / (self.na as f64 * self.nb as f64);
        if self.nab == 0 {
            return Ok(Estimate { value, sigma: f64::INFINITY });
        }
        Ok(ratio_estimate(value, &[self.nab, self.na, self.nb], self.m_trials))
    }
}

/// Idler autocorrelation measured by splitting the idler 50/50 onto two
/// detectors, each with the D1 efficiency halved and the D1 background.
pub fn run_split_idler(
    source: &SourceModel,
    det: &DetectionModel,
    m: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<SplitTally, StatsError> {
    if m == 0 {
        return Err(StatsError::InvalidParameter("trial count must be at least 1".into()));
    }
    if source.mode != SourceMode::DlczPair {
        return Err(StatsError::InvalidParameter("split-idler run needs a pair source".into()));
    }
    let kernel = Kernel::new(source, det, Layout::SplitIdler)?;
    let h = kernel.histogram(m, seed, workers)?;
    Ok(SplitTally { m_trials: m, na: h[1] + h[3], nb: h[2] + h[3], nab: h[3] })
}

/// Classical Cauchy–Schwarz test: `(violated, g_si² / (g_ss g_ii))`.
pub fn cauchy_schwarz_check(g_si: f64, g_ss: f64, g_ii: f64) -> Result<(bool, f64), StatsError> {
    if !(g_si >= 0.0 && g_ss >= 0.0 && g_ii >= 0.0) {
        return Err(StatsError::InvalidParameter(format!("correlations must be non-negative: {g_si}, {g_ss}, {g_ii}")));
    }
    let bound = g_ss * g_ii;
    let sq = g_si * g_si;
    let margin = if bound > 0.0 {
        sq / bound
    } else if sq == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok((sq > bound, margin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub t_s: f64,
    pub eta_memory: f64,
    pub tally: CoincidenceTally,
    pub g_si: Option<Estimate>,
    pub alpha: Option<Estimate>,
}

impl ScanRow {
    /// Heralded signal coincidences `n12 + n13`.
    pub fn coincidences(&self) -> u64 {
        self.tally.n12 + self.tally.n13
    }

    /// Accidental level `n1 (n2 + n3) / M`.
    pub fn random_level(&self) -> f64 {
        self.tally.n1 as f64 * (self.tally.n2 + self.tally.n3) as f64 / self.tally.m_trials as f64
    }
}

/// Seed for the `k`-th point of a scan.
pub fn point_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs the counting experiment at each storage time of `curve`, with the
/// memory efficiency `storage_factor · η(T_s)`.
pub fn storage_scan(
    source: &SourceModel,
    det: &DetectionModel,
    storage_factor: f64,
    curve: &EfficiencyCurve,
    m: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<ScanRow>, StatsError> {
    curve
        .times
        .iter()
        .zip(&curve.eta)
        .enumerate()
        .map(|(k, (&t_s, &eta))| {
            let eta_memory = (storage_factor * eta).clamp(0.0, 1.0);
            let point = DetectionModel { eta_memory, ..*det };
            let tally = run_trials_with(source, &point, m, point_seed(seed, k), workers)?;
            Ok(ScanRow { t_s, eta_memory, tally, g_si: g_si(&tally).ok(), alpha: alpha(&tally).ok() })
        })
        .collect()
}
