//! Flat `key = value` run configuration.
//!
//! Files hold one assignment per line; `#` starts a comment. Keys are grouped
//! by prefix (`atom.`, `field.`, `grid.`, ...). Times are in seconds; every
//! time key also accepts a `_us` variant in microseconds. Unknown keys are
//! errors.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use polariton_core::fields::{FieldConfig, GradientModel, LevelConstants};
use polariton_core::photostats::{DetectionModel, SourceMode, SourceModel, STATIC_STORAGE_EFFICIENCY};
use polariton_core::revivals::{WidthDefinition, DEFAULT_THRESHOLD};
use polariton_core::HalfInt;

use crate::output::float;
use crate::CliError;

/// Largest number of time samples a grid may hold.
pub const MAX_GRID_POINTS: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub f_a: HalfInt,
    pub f_b: HalfInt,
    pub f_c: HalfInt,
    pub polarization: i32,
    pub consts: LevelConstants,
    pub field: FieldConfig,
    pub grid_start: f64,
    pub grid_stop: f64,
    pub grid_step: f64,
    pub thetas: Vec<f64>,
    pub b_list: Vec<f64>,
    pub scaling_theta: f64,
    pub revival_threshold: f64,
    pub width: WidthDefinition,
    pub source: SourceModel,
    pub detect: DetectionModel,
    pub storage_factor: f64,
    pub counts_trials: u64,
    pub counts_workers: usize,
    pub counts_times: Vec<f64>,
    pub split_idler_trials: u64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            f_a: HalfInt::from_int(3),
            f_b: HalfInt::from_int(2),
            f_c: HalfInt::from_int(3),
            polarization: 1,
            consts: LevelConstants::default(),
            field: FieldConfig::default(),
            grid_start: 0.0,
            grid_stop: 10e-6,
            grid_step: 5e-9,
            thetas: vec![0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0],
            b_list: vec![0.8, 0.6, 0.4, 0.2],
            scaling_theta: PI / 2.0,
            revival_threshold: DEFAULT_THRESHOLD,
            width: WidthDefinition::default(),
            source: SourceModel::dlcz_fixture(),
            detect: DetectionModel { eta_memory: 1.0, ..DetectionModel::dlcz_fixture() },
            storage_factor: STATIC_STORAGE_EFFICIENCY,
            counts_trials: 100_000,
            counts_workers: 0,
            counts_times: (0..=40).map(|k| k as f64 * 0.25 / 1e6).collect(),
            split_idler_trials: 0,
            seed: 1,
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = value.trim().parse().map_err(|e| bad(key, value, e))?;
    if !v.is_finite() {
        return Err(bad(key, value, "not finite"));
    }
    Ok(v)
}

/// Non-negative integer, also written as `1e6`.
fn parse_count(key: &str, value: &str) -> Result<u64, CliError> {
    if let Ok(n) = value.trim().parse::<u64>() {
        return Ok(n);
    }
    let v = parse_f64(key, value)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(bad(key, value, "not a non-negative integer"));
    }
    Ok(v as u64)
}

/// Angle in radians, optionally as a multiple of pi: `pi/8`, `3pi/8`, `3*pi/8`, `0.25pi`.
pub fn parse_angle(key: &str, value: &str) -> Result<f64, CliError> {
    let s: String = value.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = s.find("pi") else {
        return parse_f64(key, value);
    };
    let (coef, rest) = (&s[..pos], &s[pos + 2..]);
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let num = match coef {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|e| bad(key, value, e))?,
    };
    let den = match rest {
        "" => 1.0,
        r => r.strip_prefix('/').ok_or_else(|| bad(key, value, "expected `pi/<n>`"))?.parse::<f64>().map_err(|e| bad(key, value, e))?,
    };
    if den == 0.0 {
        return Err(bad(key, value, "division by zero"));
    }
    Ok(num * PI / den)
}

fn parse_list(key: &str, value: &str, item: impl Fn(&str, &str) -> Result<f64, CliError>) -> Result<Vec<f64>, CliError> {
    let items: Vec<f64> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| item(key, s)).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(items)
}

fn parse_qn(key: &str, value: &str) -> Result<HalfInt, CliError> {
    value.trim().parse::<HalfInt>().map_err(|e| bad(key, value, e))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| float(v)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        if let Some(base) = key.strip_suffix("_us") {
            let scale = |v: f64| v / 1e6;
            match base {
                "grid.start" => self.grid_start = scale(parse_f64(key, value)?),
                "grid.stop" => self.grid_stop = scale(parse_f64(key, value)?),
                "grid.step" => self.grid_step = scale(parse_f64(key, value)?),
                "counts.times" => self.counts_times = parse_list(key, value, parse_f64)?.into_iter().map(scale).collect(),
                _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
            }
            return Ok(());
        }
        match key {
            "atom.f_a" => self.f_a = parse_qn(key, value)?,
            "atom.f_b" => self.f_b = parse_qn(key, value)?,
            "atom.f_c" => self.f_c = parse_qn(key, value)?,
            "atom.polarization" => self.polarization = value.trim().parse().map_err(|e| bad(key, value, e))?,
            "atom.g_a" => self.consts.g_a = parse_f64(key, value)?,
            "atom.g_b" => self.consts.g_b = parse_f64(key, value)?,
            "atom.mu_b_over_h" => self.consts.mu_b_over_h = parse_f64(key, value)?,
            "field.b_gauss" => self.field.b_gauss = parse_f64(key, value)?,
            "field.theta" => self.field.theta = parse_angle(key, value)?,
            "field.phi" => self.field.phi = parse_angle(key, value)?,
            "field.gradient_spread" => self.field.gradient_spread = parse_f64(key, value)?,
            "field.gradient_model" => self.field.gradient_model = value.parse::<GradientModel>().map_err(|e| bad(key, value, e))?,
            "field.n_ensemble" => self.field.n_ensemble = parse_count(key, value)? as usize,
            "grid.start" => self.grid_start = parse_f64(key, value)?,
            "grid.stop" => self.grid_stop = parse_f64(key, value)?,
            "grid.step" => self.grid_step = parse_f64(key, value)?,
            "sweep.thetas" => self.thetas = parse_list(key, value, parse_angle)?,
            "sweep.b_list" => self.b_list = parse_list(key, value, parse_f64)?,
            "scaling.theta" => self.scaling_theta = parse_angle(key, value)?,
            "revival.threshold" => self.revival_threshold = parse_f64(key, value)?,
            "revival.width" => self.width = value.parse().map_err(|e| bad(key, value, e))?,
            "source.mode" => self.source.mode = value.parse::<SourceMode>().map_err(|e| bad(key, value, e))?,
            "source.mean_pair_number" => self.source.mean_pair_number = parse_f64(key, value)?,
            "source.thermal_modes_k" => self.source.thermal_modes_k = parse_f64(key, value)?,
            "source.coherent_mean_photons" => self.source.coherent_mean_photons = parse_f64(key, value)?,
            "detect.eta_idler" => self.detect.eta_idler = parse_f64(key, value)?,
            "detect.eta_signal_path" => self.detect.eta_signal_path = parse_f64(key, value)?,
            "detect.storage_factor" => self.storage_factor = parse_f64(key, value)?,
            "detect.background_d1" => self.detect.background_per_gate[0] = parse_f64(key, value)?,
            "detect.background_d2" => self.detect.background_per_gate[1] = parse_f64(key, value)?,
            "detect.background_d3" => self.detect.background_per_gate[2] = parse_f64(key, value)?,
            "detect.splitter_ratio" => self.detect.splitter_ratio = parse_f64(key, value)?,
            "counts.trials" => self.counts_trials = parse_count(key, value)?,
            "counts.workers" => self.counts_workers = parse_count(key, value)? as usize,
            "counts.times" => self.counts_times = parse_list(key, value, parse_f64)?,
            "counts.split_idler_trials" => self.split_idler_trials = parse_count(key, value)?,
            "seed" => self.seed = parse_count(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment as given on the command line.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(k, v)
    }

    /// Applies every assignment in a config file body.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_assignment(line).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("line {}: {msg}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Checks cross-field constraints that single assignments cannot.
    pub fn validate(&self) -> Result<(), CliError> {
        self.field.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.grid_step.is_nan() || self.grid_step <= 0.0 {
            return Err(CliError::Config(format!("grid.step = {} must be positive", self.grid_step)));
        }
        if self.grid_stop < self.grid_start {
            return Err(CliError::Config("grid.stop precedes grid.start".into()));
        }
        if (self.grid_stop - self.grid_start) / self.grid_step > MAX_GRID_POINTS {
            return Err(CliError::Config(format!("time grid exceeds {MAX_GRID_POINTS:e} points")));
        }
        if self.thetas.iter().chain([&self.scaling_theta]).any(|t| !(0.0..=PI).contains(t)) {
            return Err(CliError::Config("sweep.thetas and scaling.theta must lie in [0, pi]".into()));
        }
        if self.b_list.iter().any(|&b| b <= 0.0) {
            return Err(CliError::Config("sweep.b_list values must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.revival_threshold) {
            return Err(CliError::Config("revival.threshold must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.storage_factor) {
            return Err(CliError::Config("detect.storage_factor must lie in [0, 1]".into()));
        }
        if self.counts_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("counts.times must be strictly increasing".into()));
        }
        self.source.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.detect.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Whether the Landé factors deviate from `g_a = -g_b`.
    pub fn g_override(&self) -> bool {
        self.consts.g_a != -self.consts.g_b
    }

    /// Every setting as `key=value`, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let out: Vec<(&str, String)> = vec![
            ("atom.f_a", self.f_a.to_string()),
            ("atom.f_b", self.f_b.to_string()),
            ("atom.f_c", self.f_c.to_string()),
            ("atom.polarization", self.polarization.to_string()),
            ("atom.g_a", float(self.consts.g_a)),
            ("atom.g_b", float(self.consts.g_b)),
            ("atom.mu_b_over_h", float(self.consts.mu_b_over_h)),
            ("field.b_gauss", float(self.field.b_gauss)),
            ("field.theta", float(self.field.theta)),
            ("field.phi", float(self.field.phi)),
            ("field.gradient_spread", float(self.field.gradient_spread)),
            ("field.gradient_model", self.field.gradient_model.to_string()),
            ("field.n_ensemble", self.field.n_ensemble.to_string()),
            ("grid.start", float(self.grid_start)),
            ("grid.stop", float(self.grid_stop)),
            ("grid.step", float(self.grid_step)),
            ("sweep.thetas", join(&self.thetas)),
            ("sweep.b_list", join(&self.b_list)),
            ("scaling.theta", float(self.scaling_theta)),
            ("revival.threshold", float(self.revival_threshold)),
            ("revival.width", self.width.to_string()),
            ("source.mode", self.source.mode.to_string()),
            ("source.mean_pair_number", float(self.source.mean_pair_number)),
            ("source.thermal_modes_k", float(self.source.thermal_modes_k)),
            ("source.coherent_mean_photons", float(self.source.coherent_mean_photons)),
            ("detect.eta_idler", float(self.detect.eta_idler)),
            ("detect.eta_signal_path", float(self.detect.eta_signal_path)),
            ("detect.storage_factor", float(self.storage_factor)),
            ("detect.background_d1", float(self.detect.background_per_gate[0])),
            ("detect.background_d2", float(self.detect.background_per_gate[1])),
            ("detect.background_d3", float(self.detect.background_per_gate[2])),
            ("detect.splitter_ratio", float(self.detect.splitter_ratio)),
            ("counts.trials", self.counts_trials.to_string()),
            ("counts.times", join(&self.counts_times)),
            ("counts.split_idler_trials", self.split_idler_trials.to_string()),
            ("seed", self.seed.to_string()),
        ];
        // The worker count never changes results, so it is left out.
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// The echo as a config file body; feeding it back reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.echo() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
