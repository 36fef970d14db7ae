//! Linear, hard-thresholded and adaptive wavelet density estimators.

use alloc::format;

use crate::besov::BesovParams;
use crate::coefficients::empirical_coeffs;
use crate::error::{invalid, Error, Result};
use crate::math::{self, floor_log2};
use crate::points::PointSet;
use crate::tree::{CoefficientTree, Provenance};
use crate::wavelet::{eval_wavelet, for_each_active, WaveletFamily, WaveletIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EstimatorKind {
    Linear,
    Thresholded,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    SparseUnstructured,
    DenseUnstructured,
    Structured,
    LinearSparse,
}

impl Regime {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "sparse" | "sparse_unstructured" | "sparse-unstructured" => Regime::SparseUnstructured,
            "dense" | "dense_unstructured" | "dense-unstructured" => Regime::DenseUnstructured,
            "structured" => Regime::Structured,
            "linear" | "linear_sparse" | "linear-sparse" => Regime::LinearSparse,
            _ => return Err(invalid(format!("unknown regime '{name}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub j0: u32,
    pub j1: u32,
    /// Threshold constant in `t = K √(j/n)`.
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    pub k: f64,
    pub rescale_epsilon: Option<f64>,
    pub regime: Regime,
}

impl EstimatorConfig {
    pub fn linear(j0: u32) -> Self {
        EstimatorConfig {
            kind: EstimatorKind::Linear,
            j0,
            j1: j0,
            k: 1.0,
            rescale_epsilon: None,
            regime: Regime::SparseUnstructured,
        }
    }

    pub fn thresholded(j0: u32, j1: u32, k: f64) -> Self {
        EstimatorConfig { kind: EstimatorKind::Thresholded, j0, j1, k, ..Self::linear(j0) }
    }

    pub fn adaptive() -> Self {
        EstimatorConfig { kind: EstimatorKind::Adaptive, ..Self::linear(0) }
    }

    pub fn with_rescale(self, eps: f64) -> Self {
        EstimatorConfig { rescale_epsilon: Some(eps), ..self }
    }

    pub fn with_regime(self, regime: Regime) -> Self {
        EstimatorConfig { regime, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.j0 > self.j1 {
            return Err(invalid(format!("j0 = {} exceeds j1 = {}", self.j0, self.j1)));
        }
        if self.kind == EstimatorKind::Linear && self.j0 != self.j1 {
            return Err(invalid("the linear estimator needs j0 = j1"));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(invalid(format!("threshold constant K = {} must be nonnegative", self.k)));
        }
        if let Some(e) = self.rescale_epsilon {
            if !(0.0..1.0).contains(&e) {
                return Err(invalid(format!("rescale epsilon {e} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Highest level the estimate can populate for a sample of size `n`.
    pub fn top_level(&self, n: usize, dim: usize) -> u32 {
        match self.kind {
            EstimatorKind::Adaptive => adaptive_resolutions(n, dim).1,
            _ => self.j1,
        }
    }
}

/// `K = 2‖ψ‖∞^D`, a family-scaled threshold constant.
pub fn scaled_threshold_constant(family: &WaveletFamily, dim: usize) -> f64 {
    2.0 * math::powi(family.sup_norm_psi().max(family.sup_norm_phi()), dim as i32)
}

fn regime_check(disc: &BesovParams, gen: &BesovParams, regime: Regime) -> Result<()> {
    let pdc = disc.p_conj();
    match regime {
        Regime::SparseUnstructured | Regime::LinearSparse if pdc < gen.p => Err(Error::RegimeMismatch(format!(
            "sparse schedules need p_d' >= p_g, got p_d' = {pdc} and p_g = {}",
            gen.p
        ))),
        Regime::DenseUnstructured if pdc > gen.p => Err(Error::RegimeMismatch(format!(
            "the dense schedule needs p_d' <= p_g, got p_d' = {pdc} and p_g = {}",
            gen.p
        ))),
        _ => Ok(()),
    }
}

fn level_of(two_pow: f64) -> u32 {
    if two_pow.is_infinite() {
        return u32::MAX;
    }
    floor_log2(two_pow).max(0) as u32
}

/// Resolution levels `(j0, j1)` for a sample size, contamination level and regime.
pub fn choose_resolutions(
    n: usize,
    eps: f64,
    gen: &BesovParams,
    disc: &BesovParams,
    dim: usize,
    regime: Regime,
) -> Result<(u32, u32)> {
    if n < 2 {
        return Err(invalid("choose_resolutions needs n >= 2"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid(format!("epsilon {eps} outside [0, 1)")));
    }
    regime_check(disc, gen, regime)?;
    let d = dim as f64;
    let nf = n as f64;
    let sg = gen.sigma;
    let dpg = gen.d_over_p(dim);
    let cap = |exp: f64| if eps == 0.0 { f64::INFINITY } else { math::pow(eps, -1.0 / exp) };
    let (j0, j1) = match regime {
        Regime::SparseUnstructured | Regime::Structured => {
            let j0 = level_of(math::pow(nf, 1.0 / (2.0 * sg + d)));
            let nonlinear = math::pow(nf, 1.0 / (2.0 * sg + d - 2.0 * dpg));
            let top = if regime == Regime::Structured {
                nonlinear
            } else {
                nonlinear.min(cap(sg + d - dpg))
            };
            (j0, level_of(top))
        }
        Regime::DenseUnstructured => {
            let j = level_of(math::pow(nf, 1.0 / (2.0 * sg + d)).min(cap(sg + disc.d_over_p(dim))));
            (j, j)
        }
        Regime::LinearSparse => {
            let j = level_of(math::pow(nf, 1.0 / (2.0 * sg + d - 2.0 * dpg)).min(cap(sg + d - dpg)));
            (j, j)
        }
    };
    Ok((j0, j1.max(j0)))
}

/// `2^{j0} = n^{1/(2r+D)}` and `2^{j1} = (n / ln n)^{1/D}`, floored.
pub fn adaptive_resolutions_for(n: usize, r: u32, dim: usize) -> (u32, u32) {
    let nf = n as f64;
    let d = dim as f64;
    let j0 = level_of(math::pow(nf, 1.0 / (2.0 * r as f64 + d)));
    let j1 = level_of(math::pow(nf / math::ln(nf), 1.0 / d));
    (j0, j1.max(j0))
}

fn adaptive_resolutions(n: usize, dim: usize) -> (u32, u32) {
    adaptive_resolutions_for(n, 0, dim)
}

fn rescale(tree: CoefficientTree, eps: Option<f64>) -> CoefficientTree {
    match eps {
        Some(e) if e > 0.0 => tree.scale(1.0 / (1.0 - e)),
        _ => tree,
    }
}

/// Empirical series truncated at `j0`, optionally rescaled by `1/(1−ε)`.
pub fn estimate_linear(samples: &PointSet, family: &WaveletFamily, config: &EstimatorConfig) -> Result<CoefficientTree> {
    config.validate()?;
    if config.kind != EstimatorKind::Linear {
        return Err(invalid("estimate_linear needs a linear configuration"));
    }
    let t = empirical_coeffs(samples, family, config.j0, config.j0)?;
    Ok(rescale(t, config.rescale_epsilon).with_provenance(Provenance::Estimate))
}

/// Levels `≤ j0` kept; levels `(j0, j1]` keep `β̂` only where `|β̂| > K √(j/n)`.
pub fn estimate_thresholded(
    samples: &PointSet,
    family: &WaveletFamily,
    config: &EstimatorConfig,
) -> Result<CoefficientTree> {
    config.validate()?;
    let mut t = empirical_coeffs(samples, family, config.j0, config.j1)?;
    threshold(&mut t, config.j0, config.j1, config.k, samples.len());
    Ok(rescale(t, config.rescale_epsilon).with_provenance(Provenance::Estimate))
}

/// Hard thresholding of levels `(j0, j1]` at `K √(j/n)`.
pub fn threshold(tree: &mut CoefficientTree, j0: u32, j1: u32, k: f64, n: usize) {
    if k == 0.0 {
        return;
    }
    let nf = n as f64;
    tree.filter_levels(j0, j1, |j, v| v.abs() > k * math::sqrt(j as f64 / nf));
}

/// Thresholded estimate with the `(r, n)`-only schedule; `K` defaults to 1.
pub fn estimate_adaptive(samples: &PointSet, family: &WaveletFamily, r: u32, dim: usize) -> Result<CoefficientTree> {
    estimate_adaptive_with(samples, family, r, dim, 1.0)
}

pub fn estimate_adaptive_with(
    samples: &PointSet,
    family: &WaveletFamily,
    r: u32,
    dim: usize,
    k: f64,
) -> Result<CoefficientTree> {
    if samples.len() < 3 {
        return Err(invalid("the adaptive estimator needs n >= 3"));
    }
    if samples.dim() != dim {
        return Err(invalid("sample dimension differs from D"));
    }
    let (j0, j1) = adaptive_resolutions_for(samples.len(), r, dim);
    estimate_thresholded(samples, family, &EstimatorConfig::thresholded(j0, j1, k))
}

/// Dispatches on `config.kind`; the adaptive kind uses the family regularity.
pub fn estimate(samples: &PointSet, family: &WaveletFamily, config: &EstimatorConfig) -> Result<CoefficientTree> {
    match config.kind {
        EstimatorKind::Linear => estimate_linear(samples, family, config),
        EstimatorKind::Thresholded => estimate_thresholded(samples, family, config),
        EstimatorKind::Adaptive => {
            estimate_adaptive_with(samples, family, family.regularity(), samples.dim(), config.k)
        }
    }
}

/// `Σ α φ(x) + Σ_j Σ β ψ(x)`.
pub fn eval_density(tree: &CoefficientTree, family: &WaveletFamily, x: &[f64]) -> f64 {
    if x.len() != tree.dim() || x.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return 0.0;
    }
    let mut v = tree.alpha() * eval_wavelet(family, &WaveletIndex::father(alloc::vec![0; x.len()]), x);
    for (j, level) in tree.levels().iter().enumerate() {
        if level.is_empty() {
            continue;
        }
        for_each_active(family, j as u32, x, |key, w| v += level.get(key) * w);
    }
    v
}
