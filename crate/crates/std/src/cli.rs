//! Argument parsing and config overrides.

use std::path::PathBuf;

use besov_robust::estimators::{EstimatorKind, Regime};
use besov_robust::harness::Axis;
use besov_robust::wavelet::WaveletFamily;
use clap::{Args, Parser, Subcommand};

use crate::config::{contamination_by_name, preset, truth_by_name, Check, Command, ExperimentConfig, Schedule};
use crate::error::{config_error, CliError};
use crate::io::read_to_string;

#[derive(Debug, Parser)]
#[command(name = "besov-robust", version, about = "Robust wavelet density estimation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Estimate a density from a sample file or a drawn sample.
    Estimate(RunArgs),
    /// Monte-Carlo risk over an (n, eps) grid.
    RiskSweep(RunArgs),
    /// Risk sweep plus a pass/fail verdict against the exponent oracle.
    RateCheck(RunArgs),
    /// Breakdown-point exponents as a function of the discriminator smoothness.
    Breakdown(RunArgs),
    /// Build two-point constructions and test their indistinguishability.
    Adversary(RunArgs),
    /// List preset names.
    Presets,
    /// Print the resolved configuration as JSON without running it.
    ShowConfig(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "BESOV_ROBUST_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the check tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// linear, thresholded or adaptive.
    #[arg(long)]
    pub estimator: Option<String>,
    /// Fixes j0 (switches to the fixed schedule).
    #[arg(long)]
    pub j0: Option<u32>,
    #[arg(long)]
    pub j1: Option<u32>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long)]
    pub rescale_eps: Option<f64>,
    #[arg(long)]
    pub regime: Option<String>,
    /// none, structured, unstructured, adversarial or lecam.
    #[arg(long)]
    pub contamination: Option<String>,
    /// Contamination proportion; replaces the eps grid.
    #[arg(long)]
    pub eps: Option<f64>,
    /// haar, db2, db3 or db4.
    #[arg(long)]
    pub family: Option<String>,
    /// Truth density by name.
    #[arg(long)]
    pub truth: Option<String>,
    /// Sample CSV for `estimate`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
}

fn parse_kind(s: &str) -> Result<EstimatorKind, CliError> {
    match s {
        "linear" => Ok(EstimatorKind::Linear),
        "thresholded" => Ok(EstimatorKind::Thresholded),
        "adaptive" => Ok(EstimatorKind::Adaptive),
        _ => Err(config_error(format!("unknown estimator '{s}' (expected linear, thresholded or adaptive)"))),
    }
}

fn default_config(command: Command) -> Result<ExperimentConfig, CliError> {
    let name = match command {
        Command::Estimate | Command::RiskSweep | Command::RateCheck => "holder1-tv-uncontaminated",
        Command::Breakdown => "breakdown-curves",
        Command::Adversary => "sparse",
    };
    preset(name)
}

/// Base config (file, preset or command default) with every flag applied.
pub fn resolve(command: Command, a: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(_), Some(_)) => return Err(config_error("--config and --preset are mutually exclusive")),
        (Some(p), None) => ExperimentConfig::from_json(&read_to_string(p)?)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => default_config(command)?,
    };
    cfg.command = command;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(f) = &a.family {
        cfg.family = WaveletFamily::from_name(f)?;
    }
    if let Some(t) = &a.truth {
        cfg.truth = truth_by_name(t, cfg.dim)?;
    }
    let est = &mut cfg.estimator;
    if let Some(k) = &a.estimator {
        est.config.kind = parse_kind(k)?;
    }
    if a.j0.is_some() || a.j1.is_some() {
        est.schedule = Schedule::Fixed;
        let j0 = a.j0.unwrap_or(est.config.j0);
        est.config.j0 = j0;
        est.config.j1 = match est.config.kind {
            EstimatorKind::Linear => a.j1.unwrap_or(j0),
            _ => a.j1.unwrap_or(est.config.j1.max(j0)),
        };
    }
    if let Some(k) = a.k {
        est.config.k = k;
        est.scaled_k = false;
    }
    if let Some(e) = a.rescale_eps {
        est.config.rescale_epsilon = Some(e);
        est.rescale_known_eps = false;
    }
    if let Some(r) = &a.regime {
        est.config.regime = Regime::from_name(r)?;
    }
    if let Some(eps) = a.eps {
        cfg.grid.eps = vec![eps];
        cfg.contamination = cfg.contamination.with_eps(eps);
    }
    if let Some(c) = &a.contamination {
        cfg.contamination = contamination_by_name(c, cfg.contamination.eps, &cfg)?;
    }
    if let Some(t) = a.trials {
        cfg.grid.trials = t;
    }
    if let Some(n) = &a.n {
        cfg.grid.n = n.clone();
    }
    if a.samples.is_some() {
        cfg.samples = a.samples.clone();
    }
    if let Some(tol) = a.tolerance {
        match &mut cfg.check {
            Some(Check::Slope { tolerance, .. }) => *tolerance = tol,
            Some(Check::Separation { slope_tolerance, .. }) => *slope_tolerance = tol,
            Some(Check::AdaptiveRatio { bound, .. }) => *bound = tol,
            None => return Err(config_error("--tolerance needs a configuration with a check")),
        }
    }
    if command == Command::RateCheck && cfg.check.is_none() {
        let axis = if cfg.grid.n.len() > 1 { Axis::N } else { Axis::Eps };
        cfg.check = Some(Check::Slope { axis, target: None, tolerance: a.tolerance.unwrap_or(0.08) });
    }
    cfg.validate()?;
    Ok(cfg)
}
