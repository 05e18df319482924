//! Revival times, revival amplitudes and collapse widths of efficiency
//! curves.
//!
//! A collapse width is not uniquely defined for a structured peak, so several
//! definitions are available. [`calibrate_width_definition`] measures each on
//! the perpendicular-field curve and picks the one that reproduces the
//! reference ratio `T_C / T_R ≈ 0.082`; [`WidthDefinition::default`] is that
//! choice.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::cg::DarkStateWeights;
use crate::fields::{larmor_period_for, FieldConfig, LevelConstants};
use crate::polariton::{efficiency_curve, time_grid, EfficiencyCurve, PolaritonError};

/// Reference collapse-to-revival ratio for a perpendicular field.
pub const REFERENCE_COLLAPSE_RATIO: f64 = 0.082;
/// Relative tolerance for accepting a width definition against the reference.
pub const CALIBRATION_TOLERANCE: f64 = 0.10;
/// Peaks above this are treated as full revivals.
pub const FULL_REVIVAL_LEVEL: f64 = 0.99;
/// Default minimum amplitude of a partial revival. The perpendicular-field
/// half revival of ⁸⁵Rb sits at 0.330, so this stays below it.
pub const DEFAULT_THRESHOLD: f64 = 0.2;
/// Largest admissible grid step as a fraction of the Larmor period.
pub const MAX_STEP_FRACTION: f64 = 1.0 / 200.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RevivalError {
    #[error("curve has {0} samples; at least 3 are needed")]
    TooShort(usize),
    #[error("grid step {step:e} s exceeds T_R/200 = {limit:e} s")]
    GridTooCoarse { step: f64, limit: f64 },
    #[error("no full revival (amplitude > {FULL_REVIVAL_LEVEL}) found")]
    NoRevival,
    #[error("no half revival above threshold {threshold} near t = {time:e} s (local amplitude {amplitude})")]
    NoHalfRevival { time: f64, amplitude: f64, threshold: f64 },
    #[error("peak at t = {0:e} s never drops to the {1} level inside the curve")]
    WidthUndefined(f64, WidthDefinition),
    #[error("no width definition reproduces T_C/T_R = {REFERENCE_COLLAPSE_RATIO} within 10%: {0:?}")]
    CalibrationFailed(Vec<(WidthDefinition, f64)>),
    #[error(transparent)]
    Model(#[from] PolaritonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WidthDefinition {
    /// Half width at half of the peak amplitude.
    HalfWidthHalfMax,
    /// Half width at `1/e` of the peak amplitude.
    HalfWidthInvE,
    /// Distance from the peak to the adjacent minimum.
    FirstZeroHalfWidth,
    /// Full width at `1/e` of the peak amplitude.
    FullWidthInvE,
}

impl WidthDefinition {
    pub const ALL: [WidthDefinition; 4] = [
        WidthDefinition::HalfWidthHalfMax,
        WidthDefinition::HalfWidthInvE,
        WidthDefinition::FirstZeroHalfWidth,
        WidthDefinition::FullWidthInvE,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            WidthDefinition::HalfWidthHalfMax => "hwhm",
            WidthDefinition::HalfWidthInvE => "hw-1/e",
            WidthDefinition::FirstZeroHalfWidth => "first-zero",
            WidthDefinition::FullWidthInvE => "fw-1/e",
        }
    }
}

impl Default for WidthDefinition {
    /// The calibrated choice; `calibration_selects_default` in the tests
    /// keeps this in sync with [`calibrate_width_definition`].
    fn default() -> Self {
        WidthDefinition::FullWidthInvE
    }
}

impl fmt::Display for WidthDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for WidthDefinition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WidthDefinition::ALL
            .into_iter()
            .find(|d| d.tag() == s.trim())
            .ok_or_else(|| format!("unknown width definition `{s}` (expected hwhm, hw-1/e, first-zero or fw-1/e)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub amplitude: f64,
    index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevivalReport {
    pub t_r: f64,
    pub full_revivals: Vec<(f64, f64)>,
    pub half_revivals: Vec<(f64, f64)>,
    pub t_c: f64,
    pub ratio: f64,
    pub definition: WidthDefinition,
}

/// Vertex of the parabola through three samples.
fn parabola_vertex(t: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (x0, x1, x2) = (t[0] - t[1], 0.0, t[2] - t[1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if denom == 0.0 {
        return (t[1], y[1]);
    }
    let a = (x2 * (y[1] - y[0]) + x1 * (y[0] - y[2]) + x0 * (y[2] - y[1])) / denom;
    let b = (x2 * x2 * (y[0] - y[1]) + x1 * x1 * (y[2] - y[0]) + x0 * x0 * (y[1] - y[2])) / denom;
    if a == 0.0 {
        return (t[1], y[1]);
    }
    let xv = -b / (2.0 * a);
    // Stay within the bracketing samples.
    let xv = xv.clamp(x0, x2);
    let c = y[1];
    (t[1] + xv, a * xv * xv + b * xv + c)
}

fn refine(times: &[f64], eta: &[f64], i: usize) -> (f64, f64) {
    parabola_vertex([times[i - 1], times[i], times[i + 1]], [eta[i - 1], eta[i], eta[i + 1]])
}

/// Interior local maxima, refined by quadratic interpolation.
pub fn local_maxima(times: &[f64], eta: &[f64]) -> Vec<Peak> {
    (1..eta.len().saturating_sub(1))
        .filter(|&i| eta[i] >= eta[i - 1] && eta[i] > eta[i + 1])
        .map(|i| {
            let (time, amplitude) = refine(times, eta, i);
            Peak { time, amplitude, index: i }
        })
        .collect()
}

fn max_step(times: &[f64]) -> f64 {
    times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Time at which the curve first falls to `level`, walking away from `start`
/// in direction `dir` (+1 or -1), by linear interpolation.
fn crossing(times: &[f64], eta: &[f64], start: usize, dir: isize, level: f64) -> Option<f64> {
    let mut i = start;
    loop {
        let j = i.checked_add_signed(dir)?;
        if j >= eta.len() {
            return None;
        }
        if eta[j] <= level {
            let frac = (eta[i] - level) / (eta[i] - eta[j]);
            return Some(times[i] + frac * (times[j] - times[i]));
        }
        i = j;
    }
}

/// Time of the first local minimum walking away from `start`.
fn first_minimum(times: &[f64], eta: &[f64], start: usize, dir: isize) -> Option<f64> {
    let mut i = start;
    loop {
        let j = i.checked_add_signed(dir)?;
        let k = j.checked_add_signed(dir)?;
        if k >= eta.len() {
            return None;
        }
        if eta[k] >= eta[j] {
            let (lo, hi) = if dir > 0 { (i, k) } else { (k, i) };
            let (t, _) = parabola_vertex([times[lo], times[j], times[hi]], [eta[lo], eta[j], eta[hi]]);
            return Some(t);
        }
        i = j;
    }
}

/// Collapse width of `peak` under `definition`, averaged over both sides.
pub fn peak_width(times: &[f64], eta: &[f64], peak: &Peak, definition: WidthDefinition) -> Result<f64, RevivalError> {
    let side = |dir: isize| -> Option<f64> {
        let t = match definition {
            WidthDefinition::HalfWidthHalfMax => crossing(times, eta, peak.index, dir, peak.amplitude / 2.0)?,
            WidthDefinition::HalfWidthInvE | WidthDefinition::FullWidthInvE => {
                crossing(times, eta, peak.index, dir, peak.amplitude / E)?
            }
            WidthDefinition::FirstZeroHalfWidth => first_minimum(times, eta, peak.index, dir)?,
        };
        Some((t - peak.time).abs())
    };
    let half = match (side(1), side(-1)) {
        (Some(r), Some(l)) => 0.5 * (r + l),
        (Some(r), None) => r,
        (None, Some(l)) => l,
        (None, None) => return Err(RevivalError::WidthUndefined(peak.time, definition)),
    };
    Ok(match definition {
        WidthDefinition::FullWidthInvE => 2.0 * half,
        _ => half,
    })
}

/// Locates the full revival period, the half revivals at odd multiples of
/// `T_R/2`, and the collapse width of the first half revival.
///
/// When the curve carries field metadata, the analytic Larmor period is used
/// to check grid density and to tell the full revival at `T_R` apart from the
/// complete half-period revival that occurs for a field along the signal
/// wavevector.
pub fn find_revivals(curve: &EfficiencyCurve, threshold: f64, definition: WidthDefinition) -> Result<RevivalReport, RevivalError> {
    let (times, eta) = (&curve.times[..], &curve.eta[..]);
    if times.len() < 3 {
        return Err(RevivalError::TooShort(times.len()));
    }
    let analytic = curve.larmor_period();
    if let Some(period) = analytic {
        let limit = period * MAX_STEP_FRACTION;
        let step = max_step(times);
        if step >= limit {
            return Err(RevivalError::GridTooCoarse { step, limit });
        }
    }

    let peaks = local_maxima(times, eta);
    let full: Vec<&Peak> = peaks.iter().filter(|p| p.amplitude > FULL_REVIVAL_LEVEL).collect();
    let t_r = match analytic {
        Some(period) => full
            .iter()
            .find_map(|p| {
                let k = (p.time / period).round();
                (k >= 1.0 && (p.time / period - k).abs() < 0.02).then(|| p.time / k)
            })
            .ok_or(RevivalError::NoRevival)?,
        None => full.first().map(|p| p.time).ok_or(RevivalError::NoRevival)?,
    };
    let full_revivals: Vec<(f64, f64)> = full
        .iter()
        .filter(|p| {
            let k = (p.time / t_r).round();
            k >= 1.0 && (p.time / t_r - k).abs() < 0.02
        })
        .map(|p| (p.time, p.amplitude))
        .collect();

    let window = t_r / 20.0;
    let t_end = *times.last().expect("non-empty");
    let mut half_revivals = Vec::new();
    let mut first_half: Option<Peak> = None;
    let mut first_miss: Option<(f64, f64)> = None;
    let mut k = 0;
    loop {
        let target = (2 * k + 1) as f64 * t_r / 2.0;
        if target > t_end {
            break;
        }
        let nearest = peaks
            .iter()
            .filter(|p| (p.time - target).abs() <= window)
            .min_by(|a, b| (a.time - target).abs().total_cmp(&(b.time - target).abs()));
        match nearest {
            Some(p) if p.amplitude >= threshold => {
                half_revivals.push((p.time, p.amplitude));
                if first_half.is_none() {
                    first_half = Some(*p);
                }
            }
            other => {
                if k == 0 {
                    let amp = other.map_or_else(|| sample_at(times, eta, target), |p| p.amplitude);
                    first_miss = Some((target, amp));
                }
            }
        }
        k += 1;
    }

    let peak = match first_half {
        Some(p) if first_miss.is_none() => p,
        _ => {
            let (time, amplitude) = first_miss.unwrap_or((t_r / 2.0, sample_at(times, eta, t_r / 2.0)));
            return Err(RevivalError::NoHalfRevival { time, amplitude, threshold });
        }
    };
    let t_c = peak_width(times, eta, &peak, definition)?;
    Ok(RevivalReport { t_r, full_revivals, half_revivals, t_c, ratio: t_c / t_r, definition })
}

fn sample_at(times: &[f64], eta: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&x| x < t).min(times.len() - 1);
    eta[i]
}

/// Height and spread of the `k`-th full revival of a possibly dephased curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalEnvelope {
    pub k: usize,
    pub time: f64,
    pub height: f64,
    /// Half the distance between the outermost half-height crossings.
    pub half_width: f64,
}

/// Envelopes of the full revivals `k = 1..=max_k`, each taken over the window
/// `|t - k t_r| <= t_r/4`. A field gradient can split a revival into several
/// sub-peaks; the envelope spans all of them.
pub fn revival_envelopes(curve: &EfficiencyCurve, t_r: f64, max_k: usize) -> Vec<RevivalEnvelope> {
    let (times, eta) = (&curve.times[..], &curve.eta[..]);
    (1..=max_k)
        .filter_map(|k| {
            let centre = k as f64 * t_r;
            let lo = times.partition_point(|&t| t < centre - t_r / 4.0);
            let hi = times.partition_point(|&t| t <= centre + t_r / 4.0);
            if hi >= times.len() || lo == 0 || hi - lo < 3 {
                return None;
            }
            let top = (lo..hi).max_by(|&a, &b| eta[a].total_cmp(&eta[b]))?;
            let (time, height) = if top > lo && top + 1 < hi { refine(times, eta, top) } else { (times[top], eta[top]) };
            let level = height / 2.0;
            let first = (lo..hi).find(|&i| eta[i] >= level)?;
            let last = (lo..hi).rev().find(|&i| eta[i] >= level)?;
            let edge = |i: usize, j: usize| {
                let frac = (eta[i] - level) / (eta[i] - eta[j]);
                times[i] + frac * (times[j] - times[i])
            };
            let left = if first > lo { edge(first, first - 1) } else { times[first] };
            let right = if last + 1 < hi { edge(last, last + 1) } else { times[last] };
            Some(RevivalEnvelope { k, time, height, half_width: 0.5 * (right - left) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub b_gauss: f64,
    pub t_r: f64,
    pub t_c: f64,
    pub ratio: f64,
}

/// Samples per Larmor period used by the scaling scan.
pub const SCALING_SAMPLES_PER_PERIOD: usize = 4000;

/// The theoretical efficiency curve for a uniform field of magnitude `b`,
/// sampled over `[0, 1.25 T_R]`.
pub fn scaling_curve(weights: &DarkStateWeights, consts: &LevelConstants, b: f64, theta: f64) -> Result<EfficiencyCurve, RevivalError> {
    let field = FieldConfig::uniform(b, theta);
    field.validate().map_err(PolaritonError::from)?;
    let period = larmor_period_for(b, consts).map_err(PolaritonError::from)?;
    let step = period / SCALING_SAMPLES_PER_PERIOD as f64;
    let grid = time_grid(0.0, 1.25 * period, step);
    Ok(efficiency_curve(weights, &field, consts, &grid)?)
}

/// `(t_r, t_c)` for each field magnitude at fixed orientation.
pub fn collapse_revival_scaling(
    weights: &DarkStateWeights,
    consts: &LevelConstants,
    b_list: &[f64],
    theta: f64,
    definition: WidthDefinition,
) -> Result<Vec<ScalingPoint>, RevivalError> {
    b_list
        .par_iter()
        .map(|&b| {
            let curve = scaling_curve(weights, consts, b, theta)?;
            let report = find_revivals(&curve, DEFAULT_THRESHOLD, definition)?;
            Ok(ScalingPoint { b_gauss: b, t_r: report.t_r, t_c: report.t_c, ratio: report.ratio })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub chosen: WidthDefinition,
    pub candidates: Vec<(WidthDefinition, f64)>,
}

/// Measures `T_C/T_R` under every width definition on the perpendicular-field
/// curve and picks the one closest to the reference, provided it lies within
/// 10%.
pub fn calibrate_width_definition(weights: &DarkStateWeights, consts: &LevelConstants, b: f64) -> Result<Calibration, RevivalError> {
    let curve = scaling_curve(weights, consts, b, PI / 2.0)?;
    let candidates: Vec<(WidthDefinition, f64)> = WidthDefinition::ALL
        .into_iter()
        .map(|d| find_revivals(&curve, DEFAULT_THRESHOLD, d).map(|r| (d, r.ratio)))
        .collect::<Result<_, _>>()?;
    let rel = |r: f64| (r / REFERENCE_COLLAPSE_RATIO - 1.0).abs();
    let chosen = candidates
        .iter()
        .filter(|(_, r)| rel(*r) <= CALIBRATION_TOLERANCE)
        .min_by(|a, b| rel(a.1).total_cmp(&rel(b.1)))
        .map(|(d, _)| *d)
        .ok_or_else(|| RevivalError::CalibrationFailed(candidates.clone()))?;
    Ok(Calibration { chosen, candidates })
}
