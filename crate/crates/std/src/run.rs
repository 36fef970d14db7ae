//! Command execution: every command returns its files and an optional verdict.

use besov_robust::besov::besov_ipm;
use besov_robust::coefficients::exact_coeffs;
use besov_robust::contamination::{
    adversarial_spike_pair, lecam_structured_pair, sample_huber, verify_indistinguishable, AdversarialPair,
    ContaminationMode,
};
use besov_robust::estimators::{
    adaptive_resolutions_for, choose_resolutions, estimate, eval_density, EstimatorConfig, EstimatorKind,
};
use besov_robust::harness::{
    breakdown_point, fit_cells, mean_stderr, theoretical_exponents, trial_seed, Axis, CellResult,
    FitRecord, RiskReport, RiskSetup, COMPARISON_MARGIN,
};
use besov_robust::rng::derive_seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Check, Command, ExperimentConfig};
use crate::error::{config_error, CliError};
use crate::io::{points_to_csv, read_points, tree_to_jsonl, Outputs};
use crate::report::{cells_csv, json, rows_csv, trials_csv};
use crate::svg::{Plot, Scale, Series};
use crate::sweep::{run_sweep, with_jobs};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub outputs: Outputs,
    /// `None` for commands without a check.
    pub verdict: Option<bool>,
    pub summary: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Some(false) => 1,
            _ => 0,
        }
    }
}

pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Estimate => run_estimate(cfg),
        Command::RiskSweep => run_risk_sweep(cfg, opts, false),
        Command::RateCheck => match &cfg.check {
            Some(Check::AdaptiveRatio { .. }) => run_adaptive(cfg, opts),
            _ => run_risk_sweep(cfg, opts, true),
        },
        Command::Breakdown => run_breakdown(cfg),
        Command::Adversary => run_adversary(cfg),
    }
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Debug, Serialize)]
struct EstimateSummary {
    label: String,
    n: usize,
    eps: f64,
    estimator: EstimatorConfig,
    levels: (u32, u32),
    nnz: usize,
    alpha: f64,
    /// IPM to the truth; present when the sample was drawn from it.
    risk: Option<f64>,
}

fn run_estimate(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let mut out = Outputs::default();
    let eps = cfg.contamination.eps;
    let (x, drawn) = match &cfg.samples {
        Some(p) => (read_points(p, cfg.dim)?, false),
        None => {
            let n = cfg.grid.n[0];
            let x = sample_huber(&cfg.truth, &cfg.contamination, &cfg.family, n, cfg.seed)?;
            out.add("samples.csv", points_to_csv(&x));
            (x, true)
        }
    };
    if x.len() < 2 {
        return Err(config_error("estimate needs at least 2 sample points"));
    }
    let est = cfg.estimator_for(x.len(), eps)?;
    let tree = estimate(&x, &cfg.family, &est)?;
    let levels = match est.kind {
        EstimatorKind::Adaptive => adaptive_resolutions_for(x.len(), cfg.family.regularity(), cfg.dim),
        _ => (est.j0, est.j1),
    };
    let risk = if drawn {
        let j = cfg.comparison_level.unwrap_or(tree.j_max() + COMPARISON_MARGIN);
        let truth = exact_coeffs(&cfg.truth, &cfg.family, j)?;
        Some(besov_ipm(&tree.truncate(j), &truth, &cfg.discriminator)?)
    } else {
        None
    };
    if cfg.dim == 1 {
        let grid: Vec<f64> = (0..512).map(|i| (i as f64 + 0.5) / 512.0).collect();
        let mut series = vec![Series::line("estimate", grid.iter().map(|&t| (t, eval_density(&tree, &cfg.family, &[t]))).collect())];
        if drawn {
            series.push(Series::line("truth", grid.iter().map(|&t| (t, cfg.truth.eval(&[t]))).collect()).dashed());
        }
        let plot = Plot {
            title: format!("{}: density estimate", cfg.label),
            x_label: "x".into(),
            y_label: "density".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series,
        };
        out.add("density.svg", plot.render());
    }
    let summary = EstimateSummary {
        label: cfg.label.clone(),
        n: x.len(),
        eps,
        estimator: est,
        levels,
        nnz: tree.nnz(),
        alpha: tree.alpha(),
        risk,
    };
    out.add("tree.jsonl", tree_to_jsonl(&tree));
    out.add("estimate.json", json(&summary));
    let line = match risk {
        Some(r) => format!("estimate: n = {}, levels {:?}, {} coefficients, risk {r:.6}", x.len(), levels, tree.nnz()),
        None => format!("estimate: n = {}, levels {:?}, {} coefficients", x.len(), levels, tree.nnz()),
    };
    Ok(RunOutcome { outputs: out, verdict: None, summary: line })
}

/// Fit named by the check against its target.
pub fn slope_check(cfg: &ExperimentConfig, report: &RiskReport) -> Result<FitRecord, CliError> {
    let Some(Check::Slope { axis, target, tolerance }) = &cfg.check else {
        return Err(config_error("no slope check configured"));
    };
    let target = match (target, &report.theory) {
        (Some(t), _) => *t,
        (None, Some(th)) => match axis {
            Axis::N => th.dominant_n,
            Axis::Eps => th.dominant_eps,
        },
        (None, None) => {
            return Err(config_error("the slope check has no target and the exponent oracle rejected the parameters"))
        }
    };
    let fit = match axis {
        Axis::N => {
            let cells: Vec<&CellResult> = report.cells.iter().collect();
            fit_cells(&cells, Axis::N, None)?
        }
        Axis::Eps => {
            let plateau = report.cells.iter().find(|c| c.eps == 0.0).map(|c| (c.mean, c.stderr));
            let cells: Vec<&CellResult> = report.cells.iter().filter(|c| c.eps > 0.0).collect();
            fit_cells(&cells, Axis::Eps, plateau)?
        }
    };
    let pass = (fit.exponent - target).abs() <= *tolerance;
    let name = match axis {
        Axis::N => "n-exponent",
        Axis::Eps => "eps-exponent",
    };
    Ok(FitRecord { name: name.into(), fit, target, tolerance: *tolerance, pass })
}

fn risk_plot(cfg: &ExperimentConfig, report: &RiskReport) -> Option<String> {
    let axis = if cfg.grid.n.len() > 1 {
        Axis::N
    } else if cfg.grid.eps.iter().filter(|&&e| e > 0.0).count() > 1 {
        Axis::Eps
    } else {
        return None;
    };
    let x = |c: &CellResult| if axis == Axis::N { c.n as f64 } else { c.eps };
    let mut series = Vec::new();
    let groups: Vec<f64> = if axis == Axis::N { cfg.grid.eps.clone() } else { cfg.grid.n.iter().map(|&n| n as f64).collect() };
    for g in groups {
        let pts: Vec<(f64, f64, f64)> = report
            .cells
            .iter()
            .filter(|c| if axis == Axis::N { c.eps == g } else { c.n as f64 == g && c.eps > 0.0 })
            .map(|c| (x(c), c.mean, c.stderr))
            .collect();
        let label = if axis == Axis::N { format!("eps = {g}") } else { format!("n = {g}") };
        series.push(Series::markers(label, pts));
    }
    for f in &report.fits {
        let xs: Vec<f64> = report.cells.iter().map(x).filter(|&v| v > 0.0).collect();
        let (lo, hi) = xs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let sign = if axis == Axis::N { -1.0 } else { 1.0 };
        let line = |e: f64| {
            vec![(lo, f.fit.intercept.exp() * lo.powf(sign * e)), (hi, f.fit.intercept.exp() * hi.powf(sign * e))]
        };
        series.push(Series::line(format!("fit {:.3}", f.fit.exponent), line(f.fit.exponent)));
        series.push(Series::line(format!("theory {:.3}", f.target), line(f.target)).dashed());
    }
    let plot = Plot {
        title: format!("{}: mean risk", cfg.label),
        x_label: if axis == Axis::N { "n".into() } else { "eps".into() },
        y_label: "risk".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        series,
    };
    Some(plot.render())
}

fn run_risk_sweep(cfg: &ExperimentConfig, opts: &RunOptions, check: bool) -> Result<RunOutcome, CliError> {
    let mut report = run_sweep(cfg, opts.jobs)?;
    let mut verdict = None;
    let mut summary = format!("risk-sweep: {} cells x {} trials", report.cells.len(), cfg.grid.trials);
    if check {
        let rec = slope_check(cfg, &report)?;
        summary = format!(
            "{}: {} = {:.4} +/- {:.4} (target {:.4}, tolerance {}, {} cells excluded)",
            verdict_word(rec.pass),
            rec.name,
            rec.fit.exponent,
            rec.fit.stderr,
            rec.target,
            rec.tolerance,
            rec.fit.excluded
        );
        verdict = Some(rec.pass);
        report.fits.push(rec);
    }
    let mut out = Outputs::default();
    out.add("trials.csv", trials_csv(&report));
    out.add("cells.csv", cells_csv(&report));
    out.add("report.json", json(&report));
    if let Some(svg) = risk_plot(cfg, &report) {
        out.add("risk.svg", svg);
    }
    if let Some(v) = verdict {
        out.add("verdict.json", json(&serde_json::json!({ "pass": v, "fits": report.fits })));
    }
    Ok(RunOutcome { outputs: out, verdict, summary })
}

/// Adaptive against oracle-tuned thresholded risk for one suite member.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRecord {
    pub sigma: f64,
    pub truth: String,
    pub oracle_j0: u32,
    pub oracle_j1: u32,
    pub adaptive_j0: u32,
    pub adaptive_j1: u32,
    pub comparison_level: u32,
    pub oracle_mean: f64,
    pub oracle_stderr: f64,
    pub adaptive_mean: f64,
    pub adaptive_stderr: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn adaptive_ratio(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<RatioRecord>, CliError> {
    let Some(Check::AdaptiveRatio { sigmas, truths, n, seeds, bound }) = &cfg.check else {
        return Err(config_error("no adaptive-ratio check configured"));
    };
    let n = *n;
    let k = cfg.estimator_for(n, 0.0)?.k;
    let regime = cfg.estimator.config.regime;
    let adaptive_levels = adaptive_resolutions_for(n, cfg.family.regularity(), cfg.dim);
    let mut oracle_levels = Vec::new();
    for &s in sigmas {
        let gen = cfg.generator.with_sigma(s);
        oracle_levels.push(choose_resolutions(n, 0.0, &gen, &cfg.discriminator, cfg.dim, regime)?);
    }
    let top = oracle_levels.iter().map(|l| l.1).max().unwrap().max(adaptive_levels.1);
    let j = cfg.comparison_level.unwrap_or(top + COMPARISON_MARGIN);
    let adaptive = EstimatorConfig { k, ..EstimatorConfig::adaptive() };
    let mut setups = Vec::new();
    for (si, &s) in sigmas.iter().enumerate() {
        let (j0, j1) = oracle_levels[si];
        let oracle = EstimatorConfig::thresholded(j0, j1, k).with_regime(regime);
        for t in truths {
            let base = RiskSetup::new(t.model.clone(), cfg.contamination.clone(), oracle, cfg.discriminator, cfg.family.clone(), n)?
                .with_comparison_level(j)?;
            let ad = RiskSetup { estimator: adaptive, ..base.clone() };
            setups.push((s, t.name.clone(), (j0, j1), base, ad));
        }
    }
    let tasks: Vec<(usize, usize)> = (0..setups.len()).flat_map(|c| (0..*seeds).map(move |r| (c, r))).collect();
    let risks = with_jobs(jobs, || {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let (_, _, _, oracle, ad) = &setups[c];
                let seed = trial_seed(cfg.seed, c as u64, r as u64);
                Ok((oracle.trial(n, seed)?, ad.trial(n, seed)?))
            })
            .collect::<besov_robust::Result<Vec<(f64, f64)>>>()
    })??;
    let mut records = Vec::new();
    for (c, (s, name, (j0, j1), _, _)) in setups.iter().enumerate() {
        let chunk = &risks[c * seeds..(c + 1) * seeds];
        let (om, os) = mean_stderr(&chunk.iter().map(|r| r.0).collect::<Vec<_>>())?;
        let (am, ast) = mean_stderr(&chunk.iter().map(|r| r.1).collect::<Vec<_>>())?;
        let ratio = am / om;
        records.push(RatioRecord {
            sigma: *s,
            truth: name.clone(),
            oracle_j0: *j0,
            oracle_j1: *j1,
            adaptive_j0: adaptive_levels.0,
            adaptive_j1: adaptive_levels.1,
            comparison_level: j,
            oracle_mean: om,
            oracle_stderr: os,
            adaptive_mean: am,
            adaptive_stderr: ast,
            ratio,
            bound: *bound,
            pass: ratio <= *bound,
        });
    }
    Ok(records)
}

fn run_adaptive(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let records = adaptive_ratio(cfg, opts.jobs)?;
    let pass = records.iter().all(|r| r.pass);
    let worst = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mut out = Outputs::default();
    out.add("adaptive.csv", rows_csv(&records));
    out.add("verdict.json", json(&serde_json::json!({ "pass": pass, "records": records })));
    let summary = format!("{}: worst adaptive/oracle risk ratio {worst:.3} over {} cases", verdict_word(pass), records.len());
    Ok(RunOutcome { outputs: out, verdict: Some(pass), summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct BreakdownRow {
    pub sigma_g: f64,
    pub sigma_d: f64,
    pub e_n: f64,
    pub e_eps: f64,
    /// `b` in `ε*(n) = n^{−b}`.
    pub breakdown_exponent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub sigma_g: f64,
    pub sigma_d: f64,
    pub n: f64,
    pub eps_star: f64,
}

pub fn breakdown_rows(cfg: &ExperimentConfig) -> Result<(Vec<BreakdownRow>, Vec<CurveRow>), CliError> {
    let b = cfg.breakdown.as_ref().ok_or_else(|| config_error("breakdown needs a breakdown block"))?;
    let regime = cfg.estimator.config.regime;
    let (mut rows, mut curves) = (Vec::new(), Vec::new());
    for &sg in &b.sigma_g {
        for &sd in &b.sigma_d {
            let gen = cfg.generator.with_sigma(sg);
            let disc = cfg.discriminator.with_sigma(sd);
            let Ok(e) = theoretical_exponents(&gen, &disc, cfg.dim, regime) else { continue };
            rows.push(BreakdownRow {
                sigma_g: sg,
                sigma_d: sd,
                e_n: e.dominant_n,
                e_eps: e.dominant_eps,
                breakdown_exponent: e.dominant_n / e.dominant_eps,
            });
            for &n in &b.n {
                curves.push(CurveRow { sigma_g: sg, sigma_d: sd, n, eps_star: breakdown_point(e.dominant_n, e.dominant_eps, n) });
            }
        }
    }
    if rows.is_empty() {
        return Err(config_error("the exponent oracle rejected every breakdown grid point"));
    }
    Ok((rows, curves))
}

fn run_breakdown(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let (rows, curves) = breakdown_rows(cfg)?;
    let b = cfg.breakdown.as_ref().unwrap();
    let series = b
        .sigma_g
        .iter()
        .map(|&sg| {
            let pts = rows.iter().filter(|r| r.sigma_g == sg).map(|r| (r.sigma_d, r.breakdown_exponent)).collect();
            Series::line(format!("sigma_g = {sg}"), pts)
        })
        .collect();
    let plot = Plot {
        title: format!("{}: breakdown eps* = n^-b", cfg.label),
        x_label: "sigma_d".into(),
        y_label: "b".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series,
    };
    let mut out = Outputs::default();
    out.add("breakdown.csv", rows_csv(&rows));
    out.add("curves.csv", rows_csv(&curves));
    out.add("breakdown.svg", plot.render());
    Ok(RunOutcome { outputs: out, verdict: None, summary: format!("breakdown: {} grid points", rows.len()) })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationRow {
    pub eps: f64,
    pub level: u32,
    pub c_g: f64,
    pub predicted_separation: f64,
    pub measured_separation: f64,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub ks_pass: bool,
    pub max_coefficient_difference: f64,
    pub trees_equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub rows: Vec<SeparationRow>,
    pub fitted_slope: Option<f64>,
    pub target_slope: Option<f64>,
    pub pass: Option<bool>,
}

fn build_pair(cfg: &ExperimentConfig, eps: f64) -> Result<AdversarialPair, CliError> {
    Ok(match &cfg.contamination.mode {
        ContaminationMode::LeCamPair { gen, index, c } => lecam_structured_pair(gen, eps, index, *c, &cfg.family, None)?,
        ContaminationMode::AdversarialSpike { gen, disc } => adversarial_spike_pair(gen, disc, eps, cfg.dim, &cfg.family)?,
        _ => adversarial_spike_pair(&cfg.generator, &cfg.discriminator, eps, cfg.dim, &cfg.family)?,
    })
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn separation(cfg: &ExperimentConfig) -> Result<(SeparationReport, Vec<AdversarialPair>), CliError> {
    let n = cfg.grid.n[0];
    let disc = match &cfg.contamination.mode {
        ContaminationMode::AdversarialSpike { disc, .. } => *disc,
        _ => cfg.discriminator,
    };
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for (i, &eps) in cfg.grid.eps.iter().enumerate() {
        let pair = build_pair(cfg, eps)?;
        let j = pair.level + COMPARISON_MARGIN;
        let (a, b) = pair.mixtures()?;
        let ks = verify_indistinguishable(&a, &b, &cfg.family, j, n, derive_seed(cfg.seed, i as u64, 0))?;
        let measured = besov_ipm(&exact_coeffs(&pair.p, &cfg.family, j)?, &exact_coeffs(&pair.p_tilde, &cfg.family, j)?, &disc)?;
        rows.push(SeparationRow {
            eps,
            level: pair.level,
            c_g: pair.c_g,
            predicted_separation: pair.predicted_separation,
            measured_separation: measured,
            ks_statistic: ks.ks_statistic,
            ks_critical: ks.ks_critical,
            ks_pass: ks.ks_pass,
            max_coefficient_difference: ks.max_coefficient_difference,
            trees_equal: ks.trees_equal,
        });
        pairs.push(pair);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.measured_separation).collect();
    let fitted_slope = loglog_slope(&xs, &ys);
    let gen = match &cfg.contamination.mode {
        ContaminationMode::AdversarialSpike { gen, .. } => *gen,
        _ => cfg.generator,
    };
    let target_slope = theoretical_exponents(&gen, &disc, cfg.dim, cfg.estimator.config.regime)
        .ok()
        .map(|e| e.eps_exponents_lower.iter().cloned().fold(f64::INFINITY, f64::min));
    let pass = match &cfg.check {
        Some(Check::Separation { factor, slope_tolerance }) => {
            let rows_ok = rows.iter().all(|r| {
                let ratio = r.measured_separation / r.predicted_separation;
                r.ks_pass && r.trees_equal && ratio <= *factor && ratio >= 1.0 / factor
            });
            let slope_ok = match (fitted_slope, target_slope) {
                (Some(f), Some(t)) => (f - t).abs() <= *slope_tolerance,
                (None, _) if rows.len() < 2 => true,
                _ => false,
            };
            Some(rows_ok && slope_ok)
        }
        _ => None,
    };
    Ok((SeparationReport { rows, fitted_slope, target_slope, pass }, pairs))
}

fn run_adversary(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let (report, pairs) = separation(cfg)?;
    let mut out = Outputs::default();
    out.add("separation.csv", rows_csv(&report.rows));
    out.add("pairs.json", json(&pairs));
    out.add("adversary.json", json(&report));
    let ks_ok = report.rows.iter().all(|r| r.ks_pass && r.trees_equal);
    let summary = match report.pass {
        Some(p) => format!(
            "{}: {} pairs, KS {}, separation slope {:.4} (target {:.4})",
            verdict_word(p),
            report.rows.len(),
            verdict_word(ks_ok),
            report.fitted_slope.unwrap_or(f64::NAN),
            report.target_slope.unwrap_or(f64::NAN)
        ),
        None => format!("adversary: {} pairs, KS indistinguishability {}", report.rows.len(), verdict_word(ks_ok)),
    };
    let verdict = report.pass.or(Some(ks_ok));
    Ok(RunOutcome { outputs: out, verdict, summary })
}
