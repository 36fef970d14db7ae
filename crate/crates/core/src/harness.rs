//! Exponent oracle, Monte-Carlo risk, rate fitting and breakdown curves.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::besov::{besov_ipm, BesovParams};
use crate::coefficients::exact_coeffs;
use crate::contamination::{sample_huber, ContaminationSpec};
use crate::density::DensityModel;
use crate::error::{invalid, Error, Result};
use crate::estimators::{estimate, EstimatorConfig, Regime};
use crate::math;
use crate::rng::derive_seed;
use crate::tree::CoefficientTree;
use crate::wavelet::WaveletFamily;

/// Closed-form rate exponents for one parameter tuple.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentSet {
    pub regime: Regime,
    /// `1/2`, `(σg+σd)/(2σg+D)`, `(σg+σd−D/pg+D/pd')/(2σg+D−2D/pg)`.
    pub n_exponents: [f64; 3],
    /// Same with `2D/pd'` added to the third denominator.
    pub n_exponents_linear: [f64; 3],
    /// Exponents of the `ε` terms of the upper bound (terms `≥ 1` are absorbed by `ε`).
    pub eps_exponents: Vec<f64>,
    /// Exponents of the `ε` terms of the matching lower bound.
    pub eps_exponents_lower: Vec<f64>,
    pub dominant_n: f64,
    pub dominant_eps: f64,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn eps_set(terms: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &t in terms {
        if t < 1.0 && !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Exponents of the minimax rate for `(gen, disc, D, regime)`.
pub fn theoretical_exponents(gen: &BesovParams, disc: &BesovParams, dim: usize, regime: Regime) -> Result<ExponentSet> {
    let d = dim as f64;
    let sg = gen.sigma;
    let sd = disc.sigma;
    let dpg = gen.d_over_p(dim);
    let pdc = disc.p_conj();
    let dpdc = d / pdc;
    let dpd = disc.d_over_p(dim);
    let mismatch = |m: String| Err(Error::RegimeMismatch(m));
    match regime {
        Regime::Structured => {
            if sg < dpg {
                return mismatch(format!("structured rate needs sigma_g >= D/p_g, got {sg} < {dpg}"));
            }
        }
        _ => {
            if sg <= dpg {
                return mismatch(format!("unstructured rates need sigma_g > D/p_g, got {sg} <= {dpg}"));
            }
        }
    }
    match regime {
        Regime::SparseUnstructured | Regime::LinearSparse if pdc < gen.p => {
            return mismatch(format!("sparse regime needs p_d' >= p_g, got p_d' = {pdc} < p_g = {}", gen.p));
        }
        Regime::DenseUnstructured if pdc > gen.p => {
            return mismatch(format!("dense regime needs p_d' <= p_g, got p_d' = {pdc} > p_g = {}", gen.p));
        }
        _ => {}
    }
    let third_num = sg + sd - dpg + dpdc;
    let n_exponents = [0.5, (sg + sd) / (2.0 * sg + d), third_num / (2.0 * sg + d - 2.0 * dpg)];
    let n_exponents_linear = [0.5, (sg + sd) / (2.0 * sg + d), third_num / (2.0 * sg + d - 2.0 * dpg + 2.0 * dpdc)];
    if n_exponents.iter().chain(n_exponents_linear.iter()).any(|&e| !(e > 0.0 && e.is_finite())) {
        return mismatch(String::from("rate exponents must be positive and finite"));
    }
    let sparse_eps = (sg + sd + dpdc - dpg) / (sg - dpg + d);
    let (upper, lower) = match regime {
        Regime::Structured => (vec![1.0], vec![1.0]),
        Regime::SparseUnstructured | Regime::LinearSparse => (eps_set(&[sparse_eps]), eps_set(&[sparse_eps])),
        Regime::DenseUnstructured => {
            let dense = (sg + sd) / (sg + dpd);
            (eps_set(&[dense]), eps_set(&[sparse_eps]))
        }
    };
    let dominant_n = if regime == Regime::LinearSparse {
        min_of(&n_exponents_linear)
    } else {
        min_of(&n_exponents)
    };
    Ok(ExponentSet {
        regime,
        n_exponents,
        n_exponents_linear,
        dominant_eps: min_of(&upper),
        eps_exponents: upper,
        eps_exponents_lower: lower,
        dominant_n,
    })
}

/// `ε*(n) = n^{−e_n/e_ε}`.
pub fn breakdown_point(e_n: f64, e_eps: f64, n: f64) -> f64 {
    math::pow(n, -e_n / e_eps)
}

/// `(n, ε*(n))` along `n_grid`.
pub fn breakdown_curve(
    gen: &BesovParams,
    disc: &BesovParams,
    dim: usize,
    regime: Regime,
    n_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let e = theoretical_exponents(gen, disc, dim, regime)?;
    Ok(n_grid.iter().map(|&n| (n, breakdown_point(e.dominant_n, e.dominant_eps, n))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axis {
    N,
    Eps,
}

/// Log-log least-squares fit; `exponent` is positive for decay in `n` and
/// growth in `ε`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateFit {
    pub axis: Axis,
    pub exponent: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
    pub excluded: usize,
}

/// Ordinary least squares of `ln risk` on `ln x`.
pub fn fit_rate(xs: &[f64], risks: &[f64], axis: Axis) -> Result<RateFit> {
    if xs.len() != risks.len() {
        return Err(invalid("fit needs as many risks as grid points"));
    }
    if xs.len() < 4 {
        return Err(Error::DegenerateFit(format!("needs at least 4 points, got {}", xs.len())));
    }
    if let Some(r) = risks.iter().find(|&&r| !(r > 0.0)) {
        return Err(Error::DegenerateFit(format!("risk {r} is not positive")));
    }
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DegenerateFit(String::from("grid values must be positive")));
    }
    let lx: Vec<f64> = xs.iter().map(|&x| math::ln(x)).collect();
    let ly: Vec<f64> = risks.iter().map(|&r| math::ln(r)).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(String::from("grid values are all equal")));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| math::powi(y - intercept - slope * x, 2)).sum();
    let stderr = math::sqrt(ssr / (m - 2.0) / sxx);
    Ok(RateFit {
        axis,
        exponent: if axis == Axis::N { -slope } else { slope },
        stderr,
        intercept,
        points: xs.len(),
        excluded: 0,
    })
}

/// Risk summary for one `(n, ε)` cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellResult {
    pub n: usize,
    pub eps: f64,
    pub j0: u32,
    pub j1: u32,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub risks: Vec<f64>,
}

impl CellResult {
    pub fn from_risks(n: usize, eps: f64, j0: u32, j1: u32, risks: Vec<f64>) -> Result<Self> {
        let (mean, stderr) = mean_stderr(&risks)?;
        Ok(CellResult { n, eps, j0, j1, mean, stderr, trials: risks.len(), risks })
    }
}

/// Mean and standard error of the mean (`trials ≥ 2`).
pub fn mean_stderr(v: &[f64]) -> Result<(f64, f64)> {
    if v.len() < 2 {
        return Err(invalid("risk estimates need at least 2 trials"));
    }
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    Ok((mean, math::sqrt(var / m)))
}

/// Fits `mean − plateau` after dropping cells within 3 standard errors of the plateau.
pub fn fit_cells(cells: &[&CellResult], axis: Axis, plateau: Option<(f64, f64)>) -> Result<RateFit> {
    let (pm, ps) = plateau.unwrap_or((0.0, 0.0));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for c in cells {
        let excess = c.mean - pm;
        if plateau.is_some() && excess <= 3.0 * math::sqrt(c.stderr * c.stderr + ps * ps) {
            excluded += 1;
            continue;
        }
        xs.push(if axis == Axis::N { c.n as f64 } else { c.eps });
        ys.push(excess);
    }
    let mut fit = fit_rate(&xs, &ys, axis)?;
    fit.excluded = excluded;
    Ok(fit)
}

/// Named fit with its theoretical target.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitRecord {
    pub name: String,
    pub fit: RateFit,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Monte-Carlo risks over an `(n, ε)` grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskReport {
    pub schema_version: u32,
    pub label: String,
    pub master_seed: u64,
    pub cells: Vec<CellResult>,
    pub fits: Vec<FitRecord>,
    pub theory: Option<ExponentSet>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Everything one risk trial needs, with the truth tree precomputed.
#[derive(Debug, Clone)]
pub struct RiskSetup {
    pub truth: DensityModel,
    pub truth_tree: CoefficientTree,
    pub spec: ContaminationSpec,
    pub estimator: EstimatorConfig,
    pub disc: BesovParams,
    pub family: WaveletFamily,
    /// Fixed comparison level overriding `j1 + 2`.
    pub comparison_level: Option<u32>,
}

/// Levels added above `j1` when comparing estimate and truth.
pub const COMPARISON_MARGIN: u32 = 2;

impl RiskSetup {
    /// Precomputes the truth tree deep enough for every `n` in `n_max`.
    pub fn new(
        truth: DensityModel,
        spec: ContaminationSpec,
        estimator: EstimatorConfig,
        disc: BesovParams,
        family: WaveletFamily,
        n_max: usize,
    ) -> Result<Self> {
        estimator.validate()?;
        spec.validate()?;
        let j = estimator.top_level(n_max, truth.dim()) + COMPARISON_MARGIN;
        let truth_tree = exact_coeffs(&truth, &family, j)?;
        Ok(RiskSetup { truth, truth_tree, spec, estimator, disc, family, comparison_level: None })
    }

    /// Compares every estimate with the truth at level `j` instead of `j1 + 2`.
    pub fn with_comparison_level(mut self, j: u32) -> Result<Self> {
        if j > self.truth_tree.j_max() {
            self.truth_tree = exact_coeffs(&self.truth, &self.family, j)?;
        }
        self.comparison_level = Some(j);
        Ok(self)
    }

    /// Same setup with another contamination proportion.
    pub fn with_eps(&self, eps: f64) -> Self {
        RiskSetup { spec: self.spec.with_eps(eps), ..self.clone() }
    }

    fn common_level(&self, n: usize) -> u32 {
        if let Some(j) = self.comparison_level {
            return j;
        }
        self.estimator.top_level(n, self.truth.dim()) + COMPARISON_MARGIN
    }

    /// `d(p̂, p)` for one seeded sample of size `n`, at `j_max = j1 + 2`.
    pub fn trial(&self, n: usize, seed: u64) -> Result<f64> {
        let x = sample_huber(&self.truth, &self.spec, &self.family, n, seed)?;
        let est = estimate(&x, &self.family, &self.estimator)?;
        let j = self.common_level(n);
        if j > self.truth_tree.j_max() {
            return Err(invalid("truth tree is shallower than the comparison level"));
        }
        besov_ipm(&est.truncate(j), &self.truth_tree.truncate(j), &self.disc)
    }

    /// Resolution levels used at sample size `n`.
    pub fn levels(&self, n: usize) -> (u32, u32) {
        match self.estimator.kind {
            crate::estimators::EstimatorKind::Adaptive => {
                crate::estimators::adaptive_resolutions_for(n, self.family.regularity(), self.truth.dim())
            }
            _ => (self.estimator.j0, self.estimator.j1),
        }
    }
}

/// Per-trial seed, independent of scheduling.
pub fn trial_seed(master: u64, cell: u64, trial: u64) -> u64 {
    derive_seed(master, cell, trial)
}

/// Mean and standard error of the risk over `trials` seeded replications.
#[allow(clippy::too_many_arguments)]
pub fn estimate_risk(
    truth: &DensityModel,
    spec: &ContaminationSpec,
    est: &EstimatorConfig,
    disc: &BesovParams,
    family: &WaveletFamily,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(invalid("risk estimates need at least 2 trials"));
    }
    let setup = RiskSetup::new(truth.clone(), spec.clone(), *est, *disc, family.clone(), n)?;
    let risks = (0..trials)
        .map(|t| setup.trial(n, trial_seed(seed, 0, t as u64)))
        .collect::<Result<Vec<_>>>()?;
    mean_stderr(&risks)
}
