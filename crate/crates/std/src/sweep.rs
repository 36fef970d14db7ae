//! Parallel Monte-Carlo sweeps with schedule-independent results.

use besov_robust::coefficients::exact_coeffs;
use besov_robust::estimators::{EstimatorConfig, EstimatorKind};
use besov_robust::harness::{
    theoretical_exponents, trial_seed, CellResult, RiskReport, RiskSetup, COMPARISON_MARGIN, REPORT_SCHEMA_VERSION,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{config_error, CliError};

/// Runs `f` on a pool with `jobs` workers (all cores when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(config_error("--jobs must be at least 1"));
        }
        b = b.num_threads(j);
    }
    let pool = b.build().map_err(|e| config_error(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn levels(est: &EstimatorConfig, setup: &RiskSetup, n: usize) -> (u32, u32) {
    if est.kind == EstimatorKind::Adaptive {
        setup.levels(n)
    } else {
        (est.j0, est.j1)
    }
}

/// One setup per `(n, ε)` cell in row-major order (`n` outer).
pub fn cell_setups(cfg: &ExperimentConfig) -> Result<Vec<(usize, f64, RiskSetup)>, CliError> {
    let mut cells = Vec::new();
    let mut deepest = 0;
    for &n in &cfg.grid.n {
        for &eps in &cfg.grid.eps {
            let est = cfg.estimator_for(n, eps)?;
            let top = est.top_level(n, cfg.dim) + COMPARISON_MARGIN;
            deepest = deepest.max(cfg.comparison_level.unwrap_or(top));
            cells.push((n, eps, est));
        }
    }
    let truth_tree = exact_coeffs(&cfg.truth, &cfg.family, deepest)?;
    let base = RiskSetup {
        truth: cfg.truth.clone(),
        truth_tree,
        spec: cfg.contamination.clone(),
        estimator: cells[0].2,
        disc: cfg.discriminator,
        family: cfg.family.clone(),
        comparison_level: cfg.comparison_level,
    };
    Ok(cells
        .into_iter()
        .map(|(n, eps, est)| (n, eps, RiskSetup { estimator: est, ..base.with_eps(eps) }))
        .collect())
}

/// Every `(cell, trial)` risk, computed in parallel and gathered in grid order.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RiskReport, CliError> {
    let setups = cell_setups(cfg)?;
    let trials = cfg.grid.trials;
    let tasks: Vec<(usize, usize)> = (0..setups.len()).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    let risks = with_jobs(jobs, || {
        tasks
            .par_iter()
            .map(|&(c, t)| {
                let (n, _, setup) = &setups[c];
                setup.trial(*n, trial_seed(cfg.seed, c as u64, t as u64))
            })
            .collect::<besov_robust::Result<Vec<f64>>>()
    })??;
    let mut cells = Vec::with_capacity(setups.len());
    for (c, (n, eps, setup)) in setups.iter().enumerate() {
        let (j0, j1) = levels(&setup.estimator, setup, *n);
        let r = risks[c * trials..(c + 1) * trials].to_vec();
        cells.push(CellResult::from_risks(*n, *eps, j0, j1, r)?);
    }
    Ok(RiskReport {
        schema_version: REPORT_SCHEMA_VERSION,
        label: cfg.label.clone(),
        master_seed: cfg.seed,
        cells,
        fits: Vec::new(),
        theory: theoretical_exponents(&cfg.generator, &cfg.discriminator, cfg.dim, cfg.estimator.config.regime).ok(),
    })
}
