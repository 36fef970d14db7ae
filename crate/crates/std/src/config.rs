//! Experiment configuration files and named presets.

use std::path::PathBuf;

use besov_robust::besov::BesovParams;
use besov_robust::contamination::{ContaminationMode, ContaminationSpec};
use besov_robust::density::{Bump, Cell, DensityModel, Profile};
use besov_robust::estimators::{choose_resolutions, scaled_threshold_constant, EstimatorConfig, EstimatorKind, Regime};
use besov_robust::harness::Axis;
use besov_robust::wavelet::{WaveletFamily, WaveletIndex};
use serde::{Deserialize, Serialize};

use crate::error::{config_error, CliError};

pub const DEFAULT_SEED: u64 = 20_190_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Estimate,
    RiskSweep,
    RateCheck,
    Breakdown,
    Adversary,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::RiskSweep => "risk-sweep",
            Command::RateCheck => "rate-check",
            Command::Breakdown => "breakdown",
            Command::Adversary => "adversary",
        }
    }
}

/// How the estimator levels are obtained for each grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Use `j0`, `j1` from the estimator block.
    Fixed,
    /// `choose_resolutions(n, ε, ...)` per cell.
    Theory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorBlock {
    #[serde(flatten)]
    pub config: EstimatorConfig,
    #[serde(default = "theory")]
    pub schedule: Schedule,
    /// Replace `K` with `2‖ψ‖∞^D` of the family.
    #[serde(default)]
    pub scaled_k: bool,
    /// Rescale by `1/(1−ε)` using each cell's `ε`.
    #[serde(default)]
    pub rescale_known_eps: bool,
}

fn theory() -> Schedule {
    Schedule::Theory
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTruth {
    pub name: String,
    pub model: DensityModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// Fitted exponent along one grid axis against a target (default: the oracle exponent).
    Slope {
        axis: Axis,
        #[serde(default)]
        target: Option<f64>,
        tolerance: f64,
    },
    /// Adaptive risk over oracle-tuned thresholded risk on a benchmark suite.
    AdaptiveRatio { sigmas: Vec<f64>, truths: Vec<NamedTruth>, n: usize, seeds: usize, bound: f64 },
    /// Constructed pair checks: equal trees, KS at `grid.n[0]`, separation and its slope.
    Separation { factor: f64, slope_tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakdownBlock {
    pub sigma_g: Vec<f64>,
    pub sigma_d: Vec<f64>,
    pub n: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub label: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub dim: usize,
    pub family: WaveletFamily,
    pub generator: BesovParams,
    pub discriminator: BesovParams,
    pub truth: DensityModel,
    pub contamination: ContaminationSpec,
    pub estimator: EstimatorBlock,
    pub grid: Grid,
    #[serde(default)]
    pub check: Option<Check>,
    #[serde(default)]
    pub breakdown: Option<BreakdownBlock>,
    #[serde(default)]
    pub comparison_level: Option<u32>,
    /// CSV of sample points for `estimate`; drawn from the truth when absent.
    #[serde(default)]
    pub samples: Option<PathBuf>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn one() -> usize {
    1
}

const INF: f64 = f64::INFINITY;

fn core<T>(r: besov_robust::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from)
}

/// Hölder-1 tent-like bump `(1−t²)` centred in the cube.
pub fn holder1_bump(dim: usize) -> Result<DensityModel, CliError> {
    core(DensityModel::smooth_bumps(
        dim,
        vec![Bump { center: vec![0.5; dim], width: 0.5, weight: 1.0, profile: Profile::Polynomial(1) }],
    ))
}

pub fn smooth_bump(dim: usize) -> Result<DensityModel, CliError> {
    core(DensityModel::smooth_bumps(
        dim,
        vec![Bump { center: vec![0.45; dim], width: 0.35, weight: 1.0, profile: Profile::Exponential }],
    ))
}

pub fn two_bumps(dim: usize) -> Result<DensityModel, CliError> {
    core(DensityModel::smooth_bumps(
        dim,
        vec![
            Bump { center: vec![0.3; dim], width: 0.2, weight: 0.6, profile: Profile::Polynomial(2) },
            Bump { center: vec![0.7; dim], width: 0.2, weight: 0.4, profile: Profile::Polynomial(2) },
        ],
    ))
}

/// Uniform on `[0, 1/4]^D`, the bounded contaminant used by the structured presets.
pub fn corner_contaminant(dim: usize) -> Result<(DensityModel, f64), CliError> {
    let m = core(DensityModel::uniform_on(Cell::new(vec![0.0; dim], vec![0.25; dim])))?;
    Ok((m, 4f64.powi(dim as i32)))
}

pub const TRUTH_NAMES: [&str; 5] = ["uniform", "holder1-bump", "smooth-bump", "two-bumps", "histogram"];

pub fn truth_by_name(name: &str, dim: usize) -> Result<DensityModel, CliError> {
    match name {
        "uniform" => Ok(DensityModel::uniform(dim)),
        "holder1-bump" => holder1_bump(dim),
        "smooth-bump" => smooth_bump(dim),
        "two-bumps" => two_bumps(dim),
        "histogram" if dim == 1 => core(DensityModel::dyadic_histogram(3, &[0.05, 0.2, 0.1, 0.15, 0.05, 0.25, 0.1, 0.1])),
        "histogram" => Err(config_error("the histogram truth is one-dimensional")),
        _ => Err(config_error(format!("unknown truth '{name}' (expected one of {})", TRUTH_NAMES.join(", ")))),
    }
}

/// Builds a contamination spec from a mode name, reusing the config's balls.
pub fn contamination_by_name(name: &str, eps: f64, cfg: &ExperimentConfig) -> Result<ContaminationSpec, CliError> {
    let dim = cfg.dim;
    let spec = match name {
        "none" => ContaminationSpec { eps, mode: ContaminationMode::None },
        "structured" => {
            let (g, bound) = corner_contaminant(dim)?;
            core(ContaminationSpec::structured(eps, g, bound))?
        }
        "unstructured" => core(ContaminationSpec::unstructured(eps, corner_contaminant(dim)?.0))?,
        "adversarial" => ContaminationSpec {
            eps,
            mode: ContaminationMode::AdversarialSpike { gen: cfg.generator, disc: cfg.discriminator },
        },
        "lecam" => ContaminationSpec {
            eps,
            mode: ContaminationMode::LeCamPair {
                gen: cfg.generator,
                index: core(WaveletIndex::new(2, vec![1; dim], 1))?,
                c: 0.4,
            },
        },
        _ => {
            return Err(config_error(format!(
                "unknown contamination '{name}' (expected none, structured, unstructured, adversarial or lecam)"
            )))
        }
    };
    Ok(spec)
}

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(k)).collect()
}

fn pow2_range(from: u32, to: u32) -> Vec<usize> {
    (from..=to).map(|k| 1usize << k).collect()
}

pub const PRESET_NAMES: [&str; 5] =
    ["holder1-tv-uncontaminated", "structured-eps", "sparse", "adaptive", "breakdown-curves"];

/// A named, fully specified experiment.
pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    let tv = core(BesovParams::loss_preset("tv"))?;
    let holder1 = core(BesovParams::generator(1.0, INF, INF, 1.0))?;
    let haar = WaveletFamily::haar();
    let cfg = match name {
        "holder1-tv-uncontaminated" => ExperimentConfig {
            command: Command::RateCheck,
            label: name.into(),
            seed: DEFAULT_SEED,
            dim: 1,
            family: haar,
            generator: holder1,
            discriminator: tv,
            truth: holder1_bump(1)?,
            contamination: ContaminationSpec::none(),
            estimator: EstimatorBlock {
                config: EstimatorConfig::linear(0).with_regime(Regime::DenseUnstructured),
                schedule: Schedule::Theory,
                scaled_k: false,
                rescale_known_eps: false,
            },
            grid: Grid { n: pow2_range(8, 14), eps: vec![0.0], trials: 50 },
            check: Some(Check::Slope { axis: Axis::N, target: None, tolerance: 0.08 }),
            breakdown: None,
            comparison_level: None,
            samples: None,
        },
        "structured-eps" => {
            let (g, bound) = corner_contaminant(1)?;
            let mut eps = vec![0.0];
            eps.extend(dyadic(-8, -2));
            ExperimentConfig {
                command: Command::RateCheck,
                label: name.into(),
                seed: DEFAULT_SEED,
                dim: 1,
                family: haar,
                generator: holder1,
                discriminator: tv,
                truth: DensityModel::uniform(1),
                contamination: core(ContaminationSpec::structured(0.0, g, bound))?,
                estimator: EstimatorBlock {
                    config: EstimatorConfig::thresholded(0, 0, 1.0).with_regime(Regime::Structured),
                    schedule: Schedule::Theory,
                    scaled_k: false,
                    rescale_known_eps: false,
                },
                grid: Grid { n: vec![1 << 14], eps, trials: 50 },
                check: Some(Check::Slope { axis: Axis::Eps, target: Some(1.0), tolerance: 0.15 }),
                breakdown: None,
                comparison_level: None,
                samples: None,
            }
        }
        "sparse" => {
            let gen = core(BesovParams::generator(1.5, 2.0, 2.0, 1.0))?;
            let disc = core(BesovParams::discriminator(0.0, 1.0, INF, 1.0))?;
            ExperimentConfig {
                command: Command::Adversary,
                label: name.into(),
                seed: DEFAULT_SEED,
                dim: 1,
                family: haar,
                generator: gen,
                discriminator: disc,
                truth: DensityModel::uniform(1),
                contamination: ContaminationSpec {
                    eps: 0.0625,
                    mode: ContaminationMode::AdversarialSpike { gen, disc },
                },
                estimator: EstimatorBlock {
                    config: EstimatorConfig::thresholded(0, 0, 1.0),
                    schedule: Schedule::Theory,
                    scaled_k: false,
                    rescale_known_eps: false,
                },
                grid: Grid { n: vec![100_000], eps: dyadic(-8, -4).into_iter().step_by(2).collect(), trials: 1 },
                check: Some(Check::Separation { factor: 2.0, slope_tolerance: 0.05 }),
                breakdown: None,
                comparison_level: None,
                samples: None,
            }
        }
        "adaptive" => {
            let db4 = core(WaveletFamily::daubechies(4))?;
            let gen = core(BesovParams::generator(1.0, 2.0, 2.0, 1.0))?;
            let k = scaled_threshold_constant(&db4, 1);
            ExperimentConfig {
                command: Command::RateCheck,
                label: name.into(),
                seed: DEFAULT_SEED,
                dim: 1,
                family: db4,
                generator: gen,
                discriminator: core(BesovParams::loss_preset("l2"))?,
                truth: smooth_bump(1)?,
                contamination: ContaminationSpec::none(),
                estimator: EstimatorBlock {
                    config: EstimatorConfig { k, ..EstimatorConfig::adaptive() },
                    schedule: Schedule::Theory,
                    scaled_k: true,
                    rescale_known_eps: false,
                },
                grid: Grid { n: vec![1 << 14], eps: vec![0.0], trials: 10 },
                check: Some(Check::AdaptiveRatio {
                    sigmas: vec![1.0, 2.0],
                    truths: vec![
                        NamedTruth { name: "smooth-bump".into(), model: smooth_bump(1)? },
                        NamedTruth { name: "two-bumps".into(), model: two_bumps(1)? },
                    ],
                    n: 1 << 14,
                    seeds: 10,
                    bound: 3.0,
                }),
                breakdown: None,
                comparison_level: None,
                samples: None,
            }
        }
        "breakdown-curves" => ExperimentConfig {
            command: Command::Breakdown,
            label: name.into(),
            seed: DEFAULT_SEED,
            dim: 1,
            family: haar,
            generator: holder1,
            discriminator: core(BesovParams::discriminator(0.0, 1.0, 1.0, 1.0))?,
            truth: DensityModel::uniform(1),
            contamination: ContaminationSpec::none(),
            estimator: EstimatorBlock {
                config: EstimatorConfig::thresholded(0, 0, 1.0),
                schedule: Schedule::Theory,
                scaled_k: false,
                rescale_known_eps: false,
            },
            grid: Grid { n: pow2_range(8, 20), eps: vec![0.0], trials: 1 },
            check: None,
            breakdown: Some(BreakdownBlock {
                sigma_g: vec![0.5, 1.0, 2.0, 4.0],
                sigma_d: (0..=24).map(|i| i as f64 * 0.125).collect(),
                n: pow2_range(8, 20).into_iter().map(|n| n as f64).collect(),
            }),
            comparison_level: None,
            samples: None,
        },
        _ => {
            return Err(config_error(format!("unknown preset '{name}' (expected one of {})", PRESET_NAMES.join(", "))))
        }
    };
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| config_error(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// Checks every module precondition that does not need a run.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 || self.dim > 3 {
            return Err(config_error(format!("dimension {} outside 1..=3", self.dim)));
        }
        for b in [&self.generator, &self.discriminator] {
            core(b.validate())?;
        }
        if self.truth.dim() != self.dim {
            return Err(config_error("truth dimension differs from dim"));
        }
        core(self.contamination.validate())?;
        let est = self.estimator.config;
        if self.estimator.schedule == Schedule::Fixed {
            core(est.validate())?;
        } else if !(est.k >= 0.0 && est.k.is_finite()) {
            return Err(config_error(format!("threshold constant K = {} must be nonnegative", est.k)));
        }
        if self.grid.n.is_empty() || self.grid.eps.is_empty() {
            return Err(config_error("grid needs at least one n and one eps"));
        }
        if let Some(&n) = self.grid.n.iter().find(|&&n| n < 2) {
            return Err(config_error(format!("sample size {n} is below 2")));
        }
        if let Some(&e) = self.grid.eps.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(config_error(format!("grid eps {e} outside [0, 1)")));
        }
        if matches!(self.command, Command::RiskSweep | Command::RateCheck) && self.grid.trials < 2 {
            if !matches!(self.check, Some(Check::AdaptiveRatio { .. })) {
                return Err(config_error("risk sweeps need at least 2 trials per cell"));
            }
        }
        if self.estimator.schedule == Schedule::Theory && est.kind != EstimatorKind::Adaptive {
            for &n in &self.grid.n {
                for &e in &self.grid.eps {
                    self.levels_for(n, e)?;
                }
            }
        }
        let check = if self.command == Command::RateCheck { &self.check } else { &None };
        match (&self.command, check) {
            (Command::RateCheck, None) => return Err(config_error("rate-check needs a check block")),
            (Command::Breakdown, _) if self.breakdown.is_none() => {
                return Err(config_error("breakdown needs a breakdown block"))
            }
            (_, Some(Check::Slope { tolerance, .. })) | (_, Some(Check::Separation { slope_tolerance: tolerance, .. }))
                if !(*tolerance > 0.0) =>
            {
                return Err(config_error("tolerance must be positive"))
            }
            (_, Some(Check::Slope { axis: Axis::Eps, .. })) if self.grid.n.len() != 1 || self.grid.eps.len() < 5 => {
                return Err(config_error("an eps-slope check needs one n and at least 5 eps values"))
            }
            (_, Some(Check::Slope { axis: Axis::N, .. })) if self.grid.eps.len() != 1 || self.grid.n.len() < 4 => {
                return Err(config_error("an n-slope check needs one eps and at least 4 n values"))
            }
            (_, Some(Check::AdaptiveRatio { sigmas, truths, seeds, .. })) => {
                if sigmas.is_empty() || truths.is_empty() || *seeds < 2 {
                    return Err(config_error("adaptive-ratio needs sigmas, truths and at least 2 seeds"));
                }
                for s in sigmas {
                    core(self.generator.with_sigma(*s).validate())?;
                }
            }
            _ => {}
        }
        if let Some(b) = &self.breakdown {
            if b.sigma_g.is_empty() || b.sigma_d.is_empty() || b.n.is_empty() {
                return Err(config_error("breakdown grids must be nonempty"));
            }
        }
        Ok(())
    }

    /// Smoothness indices at or above the family regularity; sequence-space
    /// computations still run, but the coefficient norm is then not a Besov norm.
    pub fn warnings(&self) -> Vec<String> {
        [("generator", &self.generator), ("discriminator", &self.discriminator)]
            .iter()
            .filter_map(|(name, b)| b.check_family(&self.family).err().map(|e| format!("{name}: {e}")))
            .collect()
    }

    /// Estimator configuration for one grid cell.
    pub fn estimator_for(&self, n: usize, eps: f64) -> Result<EstimatorConfig, CliError> {
        let mut est = self.estimator.config;
        if self.estimator.scaled_k {
            est.k = scaled_threshold_constant(&self.family, self.dim);
        }
        if self.estimator.rescale_known_eps {
            est.rescale_epsilon = Some(eps);
        }
        if self.estimator.schedule == Schedule::Theory && est.kind != EstimatorKind::Adaptive {
            let (j0, j1) = self.levels_for(n, eps)?;
            est.j0 = j0;
            est.j1 = if est.kind == EstimatorKind::Linear { j0 } else { j1 };
        }
        core(est.validate())?;
        Ok(est)
    }

    fn levels_for(&self, n: usize, eps: f64) -> Result<(u32, u32), CliError> {
        core(choose_resolutions(n, eps, &self.generator, &self.discriminator, self.dim, self.estimator.config.regime))
    }
}
