//! Huber-contaminated sampling and two-point adversarial constructions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::besov::{besov_ipm, besov_norm, BesovParams};
use crate::coefficients::exact_coeffs;
use crate::density::{wavelet_sup, DensityModel, Sampler, MIN_ACCEPTANCE};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::points::PointSet;
use crate::rng::{derive_seed, stream};
use crate::tree::CoefficientTree;
use crate::wavelet::{WaveletFamily, WaveletIndex};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum ContaminationMode {
    None,
    /// Contaminant density with a sup-norm bound `M`.
    Structured { g: DensityModel, bound: f64 },
    Unstructured { g: DensityModel },
    AdversarialSpike { gen: BesovParams, disc: BesovParams },
    LeCamPair { gen: BesovParams, index: WaveletIndex, c: f64 },
}

/// Proportion `ε` and how the outliers are drawn.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContaminationSpec {
    pub eps: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub mode: ContaminationMode,
}

impl ContaminationSpec {
    pub fn none() -> Self {
        ContaminationSpec { eps: 0.0, mode: ContaminationMode::None }
    }

    /// Bounded contaminant; fails if a grid check finds `g > M`.
    pub fn structured(eps: f64, g: DensityModel, bound: f64) -> Result<Self> {
        let s = ContaminationSpec { eps, mode: ContaminationMode::Structured { g, bound } };
        s.validate()?;
        Ok(s)
    }

    pub fn unstructured(eps: f64, g: DensityModel) -> Result<Self> {
        let s = ContaminationSpec { eps, mode: ContaminationMode::Unstructured { g } };
        s.validate()?;
        Ok(s)
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        ContaminationSpec { eps, mode: self.mode.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eps) {
            return Err(invalid(format!("contamination proportion {} outside [0, 1)", self.eps)));
        }
        if let ContaminationMode::Structured { g, bound } = &self.mode {
            let sup = grid_sup(g, 64);
            if !(sup <= *bound) {
                return Err(invalid(format!("structured contaminant reaches {sup} above its bound {bound}")));
            }
        }
        Ok(())
    }

    /// Resolves the outlier density paired with truth `p = uniform` (for the
    /// constructions) or the given `g`.
    pub fn contaminant(&self, dim: usize, family: &WaveletFamily) -> Result<Option<DensityModel>> {
        Ok(match &self.mode {
            ContaminationMode::None => None,
            ContaminationMode::Structured { g, .. } | ContaminationMode::Unstructured { g } => Some(g.clone()),
            ContaminationMode::AdversarialSpike { gen, disc } => {
                Some(adversarial_spike_pair(gen, disc, self.eps, dim, family)?.g)
            }
            ContaminationMode::LeCamPair { gen, index, c } => {
                Some(lecam_structured_pair(gen, self.eps, index, *c, family, None)?.g)
            }
        })
    }
}

/// Largest density value over a grid of cell centres, per coordinate `per_axis` points.
pub fn grid_sup(model: &DensityModel, per_axis: usize) -> f64 {
    if let Some(boxes) = model.elementary_boxes() {
        return boxes.iter().fold(0.0, |m, (_, v)| m.max(*v));
    }
    let d = model.dim();
    let per = per_axis.max(2);
    let total = per.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut best = 0.0f64;
    for flat in 0..total {
        let mut rem = flat;
        for xi in x.iter_mut() {
            *xi = ((rem % per) as f64 + 0.5) / per as f64;
            rem /= per;
        }
        best = best.max(model.eval(&x));
    }
    best
}

/// `(1−ε) p + ε g` as a pair of densities.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HuberMixture {
    pub eps: f64,
    pub p: DensityModel,
    pub g: DensityModel,
}

impl HuberMixture {
    pub fn new(eps: f64, p: DensityModel, g: DensityModel) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(invalid(format!("contamination proportion {eps} outside [0, 1)")));
        }
        if p.dim() != g.dim() {
            return Err(invalid("truth and contaminant differ in dimension"));
        }
        Ok(HuberMixture { eps, p, g })
    }

    /// The mixture as a single density model.
    pub fn density(&self) -> Result<DensityModel> {
        DensityModel::mixture(vec![(1.0 - self.eps, self.p.clone()), (self.eps, self.g.clone())])
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        Ok(draw_huber(&self.p, self.eps, Some(&self.g), n, seed)?.0)
    }

    /// Exact coefficients of the mixture density.
    pub fn coefficients(&self, family: &WaveletFamily, j_max: u32) -> Result<CoefficientTree> {
        exact_coeffs(&self.density()?, family, j_max)
    }
}

fn draw_huber(
    p: &DensityModel,
    eps: f64,
    g: Option<&DensityModel>,
    n: usize,
    seed: u64,
) -> Result<(PointSet, Vec<bool>)> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let sp = Sampler::new(p)?;
    if sp.acceptance_rate() < MIN_ACCEPTANCE {
        return Err(Error::RejectionBudgetExceeded { rate: sp.acceptance_rate() });
    }
    let sg = match g {
        Some(g) if eps > 0.0 => {
            if g.dim() != p.dim() {
                return Err(invalid("truth and contaminant differ in dimension"));
            }
            let s = Sampler::new(g)?;
            if s.acceptance_rate() < MIN_ACCEPTANCE {
                return Err(Error::RejectionBudgetExceeded { rate: s.acceptance_rate() });
            }
            Some(s)
        }
        _ => None,
    };
    let mut p_rng = stream(seed);
    let mut branch_rng = stream(derive_seed(seed, 1, 0));
    let mut g_rng = stream(derive_seed(seed, 2, 0));
    let mut out = PointSet::with_capacity(p.dim(), n);
    let mut labels = Vec::with_capacity(n);
    let mut buf = vec![0.0; p.dim()];
    for _ in 0..n {
        let outlier = match &sg {
            Some(_) => branch_rng.random::<f64>() < eps,
            None => false,
        };
        match (&sg, outlier) {
            (Some(s), true) => s.draw(&mut g_rng, &mut buf)?,
            _ => sp.draw(&mut p_rng, &mut buf)?,
        }
        out.push(&buf);
        labels.push(outlier);
    }
    Ok((out, labels))
}

/// Draws from `(1−ε) p + ε g`; each point comes from `g` with probability `ε`.
pub fn sample_huber(
    p: &DensityModel,
    spec: &ContaminationSpec,
    family: &WaveletFamily,
    n: usize,
    seed: u64,
) -> Result<PointSet> {
    Ok(sample_huber_labeled(p, spec, family, n, seed)?.0)
}

/// Like [`sample_huber`] but also reports which draws came from `g`.
pub fn sample_huber_labeled(
    p: &DensityModel,
    spec: &ContaminationSpec,
    family: &WaveletFamily,
    n: usize,
    seed: u64,
) -> Result<(PointSet, Vec<bool>)> {
    spec.validate()?;
    let g = spec.contaminant(p.dim(), family)?;
    draw_huber(p, spec.eps, g.as_ref(), n, seed)
}

/// Two truths with the same contaminated law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdversarialPair {
    pub eps: f64,
    pub p: DensityModel,
    pub p_tilde: DensityModel,
    pub g: DensityModel,
    pub g_tilde: DensityModel,
    pub index: WaveletIndex,
    pub level: u32,
    pub c_g: f64,
    pub predicted_separation: f64,
}

impl AdversarialPair {
    /// `((1−ε)p + εg, (1−ε)p̃ + εg̃)`.
    pub fn mixtures(&self) -> Result<(HuberMixture, HuberMixture)> {
        Ok((
            HuberMixture::new(self.eps, self.p.clone(), self.g.clone())?,
            HuberMixture::new(self.eps, self.p_tilde.clone(), self.g_tilde.clone())?,
        ))
    }
}

fn centre_index(level: u32, dim: usize) -> WaveletIndex {
    let k = (1u64 << level) / 2;
    WaveletIndex { level: level as i32, k: vec![k; dim], orientation: 1 }
}

/// Spike pair at level `2^j ≈ ε^{−1/(σ_g+D−D/p_g)}` with `c_g = 2^{−j(σ_g+D/2−D/p_g)}`.
pub fn adversarial_spike_pair(
    gen: &BesovParams,
    disc: &BesovParams,
    eps: f64,
    dim: usize,
    family: &WaveletFamily,
) -> Result<AdversarialPair> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InfeasibleEpsilon { eps, reason: String::from("needs 0 < eps < 1") });
    }
    let dpg = gen.d_over_p(dim);
    if gen.sigma < dpg {
        return Err(Error::RegimeMismatch(format!(
            "spike construction needs sigma_g >= D/p_g, got {} < {dpg}",
            gen.sigma
        )));
    }
    let gamma = gen.sigma + dim as f64 - dpg;
    let j_real = math::log2(math::pow(eps, -1.0 / gamma));
    if j_real < -1e-9 {
        return Err(Error::InfeasibleEpsilon { eps, reason: String::from("the spike level would be negative") });
    }
    let level = math::ceil(j_real - 1e-9).max(0.0) as u32;
    let c_g = math::exp2(-(level as f64) * gen.level_exponent(dim));
    let membership = math::exp2(-(level as f64) * dim as f64 / 2.0).min(math::exp2(-(level as f64) * gen.level_exponent(dim)));
    debug_assert!(c_g <= membership * (1.0 + 1e-12));
    let c_d = math::exp2(-(level as f64) * disc.level_exponent(dim));
    let index = centre_index(level, dim);
    if c_g * wavelet_sup(family, &index) > 1.0 {
        return Err(Error::InfeasibleEpsilon {
            eps,
            reason: format!("c_g ||psi||_inf = {} exceeds 1", c_g * wavelet_sup(family, &index)),
        });
    }
    let uniform = DensityModel::uniform(dim);
    let p_tilde = DensityModel::spike(uniform.clone(), family, index.clone(), c_g)?;
    let s = (1.0 - eps) / eps * c_g;
    let plus = DensityModel::wavelet_lobe(family, index.clone(), true)?;
    let minus = DensityModel::wavelet_lobe(family, index.clone(), false)?;
    let m = plus.lobe_mass().unwrap();
    if s * m > 1.0 {
        return Err(Error::InfeasibleEpsilon {
            eps,
            reason: format!("||g - g~||_1 = {} exceeds 2", 2.0 * s * m),
        });
    }
    let g = DensityModel::mixture(vec![(1.0 - s * m, uniform.clone()), (s * m, plus)])?;
    let g_tilde = DensityModel::mixture(vec![(1.0 - s * m, uniform.clone()), (s * m, minus)])?;
    Ok(AdversarialPair {
        eps,
        p: uniform,
        p_tilde,
        g,
        g_tilde,
        index,
        level,
        c_g,
        predicted_separation: c_g * c_d * disc.l,
    })
}

/// Le Cam pair `p = U`, `p̃ = U + (ε/(1−ε)) c ψ`, `g = U + c ψ`, `g̃ = U`.
pub fn lecam_structured_pair(
    gen: &BesovParams,
    eps: f64,
    index: &WaveletIndex,
    c: f64,
    family: &WaveletFamily,
    contamination: Option<&BesovParams>,
) -> Result<AdversarialPair> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InfeasibleEpsilon { eps, reason: String::from("needs 0 < eps < 1") });
    }
    let dim = index.dim();
    let uniform = DensityModel::uniform(dim);
    let r = eps / (1.0 - eps);
    let p_tilde = DensityModel::spike(uniform.clone(), family, index.clone(), r * c)?;
    let g = DensityModel::spike(uniform.clone(), family, index.clone(), c)?;
    let j_max = index.level.max(0) as u32;
    let norm = besov_norm(&exact_coeffs(&p_tilde, family, j_max)?, gen);
    if norm > gen.l {
        return Err(Error::BallViolation { norm, radius: gen.l });
    }
    if let Some(cb) = contamination {
        for m in [&g, &uniform] {
            let norm = besov_norm(&exact_coeffs(m, family, j_max)?, cb);
            if norm > cb.l {
                return Err(Error::BallViolation { norm, radius: cb.l });
            }
        }
    }
    Ok(AdversarialPair {
        eps,
        p: uniform.clone(),
        p_tilde,
        g,
        g_tilde: uniform,
        index: index.clone(),
        level: j_max,
        c_g: r * c,
        predicted_separation: f64::NAN,
    })
}

/// Outcome of comparing two contaminated laws.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndistinguishabilityReport {
    pub n: usize,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub ks_pass: bool,
    pub max_coefficient_difference: f64,
    pub trees_equal: bool,
    pub pass: bool,
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x: Vec<f64> = a.to_vec();
    let mut y: Vec<f64> = b.to_vec();
    x.sort_by(|u, v| u.partial_cmp(v).unwrap());
    y.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut k) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < x.len() && k < y.len() {
        let t = x[i].min(y[k]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while k < y.len() && y[k] <= t {
            k += 1;
        }
        d = d.max((i as f64 / n - k as f64 / m).abs());
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic against a CDF.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x: Vec<f64> = a.to_vec();
    x.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &t) in x.iter().enumerate() {
        let f = cdf(t);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic two-sample critical value at level `alpha`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = math::sqrt(-0.5 * math::ln(alpha / 2.0));
    c * math::sqrt((n + m) as f64 / (n as f64 * m as f64))
}

/// KS test at 1% on each coordinate (Bonferroni over coordinates) plus an
/// exact comparison of the mixture trees up to `j_max`.
pub fn verify_indistinguishable(
    a: &HuberMixture,
    b: &HuberMixture,
    family: &WaveletFamily,
    j_max: u32,
    n: usize,
    seed: u64,
) -> Result<IndistinguishabilityReport> {
    let xa = a.sample(n, derive_seed(seed, 11, 0))?;
    let xb = b.sample(n, derive_seed(seed, 12, 0))?;
    let d = xa.dim();
    let alpha = 0.01 / d as f64;
    let crit = ks_critical(alpha, n, n);
    let stat = (0..d).map(|i| ks_two_sample(&xa.coordinate(i), &xb.coordinate(i))).fold(0.0, f64::max);
    let diff = a.coefficients(family, j_max)?.max_abs_diff(&b.coefficients(family, j_max)?)?;
    let ks_pass = stat < crit;
    let trees_equal = diff <= 1e-12;
    Ok(IndistinguishabilityReport {
        n,
        ks_statistic: stat,
        ks_critical: crit,
        ks_pass,
        max_coefficient_difference: diff,
        trees_equal,
        pass: ks_pass && trees_equal,
    })
}

/// `(max_i d(T, P_i), d(P_0, P_1))` for an estimate `T` built from the common mixture.
pub fn lecam_risk(
    estimate: &CoefficientTree,
    pair: &AdversarialPair,
    family: &WaveletFamily,
    disc: &BesovParams,
) -> Result<(f64, f64)> {
    let j = estimate.j_max().max(pair.level);
    let tp = exact_coeffs(&pair.p, family, j)?;
    let tq = exact_coeffs(&pair.p_tilde, family, j)?;
    let est = estimate.truncate(j);
    let r = besov_ipm(&est, &tp, disc)?.max(besov_ipm(&est, &tq, disc)?);
    Ok((r, besov_ipm(&tp, &tq, disc)?))
}
