//! Command-line driver for `polariton-core`.
//!
//! `polariton-lab <command> [--config PATH] [--set key=value ...] [--out PATH] [--seed N]`
//!
//! Every command writes UTF-8 CSV with `#` header lines that echo the full
//! configuration and the tool version.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use polariton_core::cg::{dark_state_weights, CgError, DarkStateWeights};
use polariton_core::photostats::{self, StatsError};
use polariton_core::polariton::{efficiency_curve, theta_sweep, time_grid, PolaritonError};
use polariton_core::revivals::{collapse_revival_scaling, RevivalError};
use thiserror::Error;

pub use config::RunConfig;
use output::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("analysis error: {0}")]
    Analysis(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Model(_) => 3,
            CliError::Analysis(_) => 4,
        }
    }
}

impl From<CgError> for CliError {
    fn from(e: CgError) -> Self {
        match e {
            CgError::Unconnected(_) => CliError::Model(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PolaritonError> for CliError {
    fn from(e: PolaritonError) -> Self {
        match e {
            PolaritonError::Cg(inner) => inner.into(),
            PolaritonError::Field(_) | PolaritonError::NonMonotoneGrid => CliError::Config(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<RevivalError> for CliError {
    fn from(e: RevivalError) -> Self {
        match e {
            RevivalError::Model(inner) => inner.into(),
            _ => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Retrieval efficiency against storage time for one field.
    Efficiency,
    /// Efficiency curves for each orientation in `sweep.thetas`.
    ThetaSweep,
    /// Revival period and collapse width for each field in `sweep.b_list`.
    Scaling,
    /// Monte Carlo coincidence counts and correlations against storage time.
    Counts,
    /// Dark-state ratios and weights of the level configuration.
    Weights,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Efficiency => "efficiency",
            Command::ThetaSweep => "theta-sweep",
            Command::Scaling => "scaling",
            Command::Counts => "counts",
            Command::Weights => "weights",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "polariton-lab", version, about = "Dark-state polariton storage and revival simulator")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable and applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Cli {
    /// Resolves the effective configuration: defaults, then file, then
    /// `--set` flags, then `--seed`.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for s in &self.set {
            cfg.set_assignment(s)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn weights_for(cfg: &RunConfig) -> Result<DarkStateWeights, CliError> {
    Ok(dark_state_weights(cfg.f_a, cfg.f_b, cfg.f_c, cfg.polarization)?)
}

fn connected_weights(cfg: &RunConfig) -> Result<DarkStateWeights, CliError> {
    let w = weights_for(cfg)?;
    w.require_connected()?;
    Ok(w)
}

fn grid(cfg: &RunConfig) -> Vec<f64> {
    time_grid(cfg.grid_start, cfg.grid_stop, cfg.grid_step)
}

/// Runs `command` and returns the CSV document.
pub fn run(command: Command, cfg: &RunConfig) -> Result<String, CliError> {
    let mut table = Table::new(command.name(), cfg);
    match command {
        Command::Efficiency => {
            let w = connected_weights(cfg)?;
            let curve = efficiency_curve(&w, &cfg.field, &cfg.consts, &grid(cfg))?;
            table.note("weights", &curve.weight_fingerprint);
            if let Some(p) = curve.larmor_period() {
                table.note("larmor_period_s", &output::float(p));
            }
            table.columns(&["t_s_seconds", "eta"]);
            for (t, e) in curve.times.iter().zip(&curve.eta) {
                table.row(&[output::float(*t), output::float(*e)]);
            }
        }
        Command::ThetaSweep => {
            let w = connected_weights(cfg)?;
            let curves = theta_sweep(&w, &cfg.field, &cfg.consts, &cfg.thetas, &grid(cfg))?;
            table.columns(&["theta", "t_s", "eta"]);
            for (theta, curve) in cfg.thetas.iter().zip(&curves) {
                for (t, e) in curve.times.iter().zip(&curve.eta) {
                    table.row(&[output::float(*theta), output::float(*t), output::float(*e)]);
                }
            }
        }
        Command::Scaling => {
            let w = connected_weights(cfg)?;
            let points = collapse_revival_scaling(&w, &cfg.consts, &cfg.b_list, cfg.scaling_theta, cfg.width)?;
            table.note("width_definition", cfg.width.tag());
            table.columns(&["b_gauss", "t_r", "t_c", "ratio"]);
            for p in points {
                table.row(&[output::float(p.b_gauss), output::float(p.t_r), output::float(p.t_c), output::float(p.ratio)]);
            }
        }
        Command::Counts => counts(cfg, &mut table)?,
        Command::Weights => {
            let w = weights_for(cfg)?;
            table.note("connected", &w.connected.to_string());
            if !w.connected {
                let ms: Vec<String> = w.unconnected_projections().iter().map(ToString::to_string).collect();
                table.note("unconnected_m", &ms.join(","));
            }
            table.columns(&["m", "r_m", "w_m", "r_m_exact", "w_m_exact", "connected"]);
            for e in &w.entries {
                let r_exact = e.ratio.as_ref().map_or_else(|| "inf".to_string(), ToString::to_string);
                let w_exact = e.weight.as_ref().map_or_else(|| "nan".to_string(), ToString::to_string);
                table.row(&[
                    e.m.to_string(),
                    output::float(e.r()),
                    output::float(e.w()),
                    r_exact,
                    w_exact,
                    e.ratio.is_some().to_string(),
                ]);
            }
        }
    }
    Ok(table.finish())
}

fn counts(cfg: &RunConfig, table: &mut Table) -> Result<(), CliError> {
    let w = connected_weights(cfg)?;
    let curve = efficiency_curve(&w, &cfg.field, &cfg.consts, &cfg.counts_times)?;
    let workers = (cfg.counts_workers > 0).then_some(cfg.counts_workers);
    if cfg.counts_trials == 0 {
        return Err(CliError::Config("counts.trials must be at least 1".into()));
    }
    let rows = photostats::storage_scan(&cfg.source, &cfg.detect, cfg.storage_factor, &curve, cfg.counts_trials, cfg.seed, workers)?;

    let g_ii = if cfg.split_idler_trials > 0 {
        // Stream offset keeps the auxiliary run independent of the scan points.
        let seed = photostats::point_seed(cfg.seed, rows.len() + 1);
        let split = photostats::run_split_idler(&cfg.source, &cfg.detect, cfg.split_idler_trials, seed, workers)?;
        let g = split.autocorrelation()?;
        table.note("g_ii", &output::float(g.value));
        table.note("g_ii_sigma", &output::float(g.sigma));
        Some(g.value)
    } else {
        None
    };

    table.columns(&[
        "t_s", "eta_memory", "m_trials", "n1", "n2", "n3", "n12", "n13", "n23", "n123", "g_si", "g_si_sigma", "alpha",
        "alpha_sigma", "g_ss", "g_ss_sigma", "random_level", "cs_margin",
    ]);
    let opt = |e: Option<photostats::Estimate>| match e {
        Some(e) => (output::float(e.value), output::float(e.sigma)),
        None => ("nan".to_string(), "nan".to_string()),
    };
    for r in rows {
        let t = r.tally;
        let (gsi, gsi_s) = opt(r.g_si);
        let (al, al_s) = opt(r.alpha);
        let gss = photostats::g_ss(&t).ok();
        let (gs, gs_s) = opt(gss);
        let margin = match (r.g_si, gss, g_ii) {
            (Some(a), Some(b), Some(c)) => photostats::cauchy_schwarz_check(a.value, b.value, c).map(|(_, m)| output::float(m))?,
            _ => "nan".to_string(),
        };
        table.row(&[
            output::float(r.t_s),
            output::float(r.eta_memory),
            t.m_trials.to_string(),
            t.n1.to_string(),
            t.n2.to_string(),
            t.n3.to_string(),
            t.n12.to_string(),
            t.n13.to_string(),
            t.n23.to_string(),
            t.n123.to_string(),
            gsi,
            gsi_s,
            al,
            al_s,
            gs,
            gs_s,
            output::float(r.random_level()),
            margin,
        ]);
    }
    Ok(())
}

/// Parses arguments, runs, writes output; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.resolve().and_then(|cfg| run(cli.command, &cfg)).and_then(|doc| output::write(cli.out.as_deref(), &doc));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("polariton-lab: {e}");
            e.exit_code()
        }
    }
}
