//! Besov norms and Besov IPMs computed in coefficient space.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, conjugate, lp_norm};
use crate::tree::{tree_axpy, CoefficientTree, Level, Provenance};
use crate::wavelet::{Key, WaveletFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Role {
    Generator,
    Discriminator,
    Contamination,
}

/// A Besov ball `B^σ_{p,q}(L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BesovParams {
    pub sigma: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::extended_real"))]
    pub p: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::extended_real"))]
    pub q: f64,
    #[cfg_attr(feature = "serde", serde(rename = "radius"))]
    pub l: f64,
    pub role: Role,
}

impl BesovParams {
    pub fn new(sigma: f64, p: f64, q: f64, l: f64, role: Role) -> Result<Self> {
        let b = BesovParams { sigma, p, q, l, role };
        b.validate()?;
        Ok(b)
    }

    pub fn generator(sigma: f64, p: f64, q: f64, l: f64) -> Result<Self> {
        Self::new(sigma, p, q, l, Role::Generator)
    }

    pub fn discriminator(sigma: f64, p: f64, q: f64, l: f64) -> Result<Self> {
        Self::new(sigma, p, q, l, Role::Discriminator)
    }

    pub fn contamination(sigma: f64, p: f64, q: f64, l: f64) -> Result<Self> {
        Self::new(sigma, p, q, l, Role::Contamination)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("sigma = {} must be finite and nonnegative", self.sigma)));
        }
        if !(self.p >= 1.0) || !(self.q >= 1.0) {
            return Err(invalid(format!("p = {} and q = {} must lie in [1, inf]", self.p, self.q)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(invalid(format!("ball radius {} must be positive", self.l)));
        }
        Ok(())
    }

    /// Checks `σ < r` for a concrete family.
    pub fn check_family(&self, family: &WaveletFamily) -> Result<()> {
        let r = family.regularity() as f64;
        if self.sigma >= r {
            return Err(invalid(format!(
                "sigma = {} is not below the regularity r = {} of {}",
                self.sigma,
                r,
                family.name()
            )));
        }
        Ok(())
    }

    /// Discriminator presets: `tv`, `wasserstein1`, `l2`, `ks`.
    pub fn loss_preset(name: &str) -> Result<Self> {
        let inf = f64::INFINITY;
        let (s, p, q) = match name {
            "tv" => (0.0, inf, inf),
            "wasserstein1" | "w1" => (1.0, inf, inf),
            "l2" => (0.0, 2.0, 2.0),
            "ks" => (1.0, 1.0, inf),
            _ => return Err(invalid(format!("unknown loss preset '{name}'"))),
        };
        Self::discriminator(s, p, q, 1.0)
    }

    pub fn with_radius(self, l: f64) -> Self {
        BesovParams { l, ..self }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        BesovParams { sigma, ..self }
    }

    pub fn p_conj(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_conj(&self) -> f64 {
        conjugate(self.q)
    }

    /// `D/p` with `D/∞ = 0`.
    pub fn d_over_p(&self, dim: usize) -> f64 {
        dim as f64 / self.p
    }

    /// Level exponent `σ + D/2 − D/p` of the norm weights.
    pub fn level_exponent(&self, dim: usize) -> f64 {
        self.sigma + dim as f64 / 2.0 - self.d_over_p(dim)
    }
}

fn level_norms(tree: &CoefficientTree, p: f64) -> Vec<f64> {
    tree.levels().iter().map(|l| lp_norm(l.values(), p)).collect()
}

/// `‖α‖_p + ‖{2^{j(σ+D/2−D/p)} ‖β_j‖_p}_j‖_q`.
pub fn besov_norm(tree: &CoefficientTree, params: &BesovParams) -> f64 {
    let d = tree.dim();
    let s = params.level_exponent(d);
    let a = lp_norm(tree.alpha_level().values(), params.p);
    let b = level_norms(tree, params.p)
        .into_iter()
        .enumerate()
        .map(|(j, n)| if n == 0.0 { 0.0 } else { math::exp2(j as f64 * s) * n });
    a + lp_norm(b, params.q)
}

/// The two parts `(‖Δα‖_{p'}, ‖{2^{−jσ'}‖Δβ_j‖_{p'}}‖_{q'})` of the dual norm.
fn dual_parts(delta: &CoefficientTree, disc: &BesovParams) -> (f64, f64, Vec<f64>) {
    let pc = disc.p_conj();
    let qc = disc.q_conj();
    let s = disc.level_exponent(delta.dim());
    let a = lp_norm(delta.alpha_level().values(), pc);
    let weighted: Vec<f64> = level_norms(delta, pc)
        .into_iter()
        .enumerate()
        .map(|(j, n)| if n == 0.0 { 0.0 } else { math::exp2(-(j as f64) * s) * n })
        .collect();
    let b = lp_norm(weighted.iter().copied(), qc);
    (a, b, weighted)
}

/// Dual sequence norm of `delta` against the unit ball of `disc`, times `L_d`.
pub fn dual_norm(delta: &CoefficientTree, disc: &BesovParams) -> f64 {
    let (a, b, _) = dual_parts(delta, disc);
    disc.l * a.max(b)
}

/// `d_{B^{σ_d}_{p_d,q_d}}(t1, t2)` on the span of the stored levels.
pub fn besov_ipm(t1: &CoefficientTree, t2: &CoefficientTree, disc: &BesovParams) -> Result<f64> {
    let delta = tree_axpy(-1.0, t2, t1)?;
    Ok(dual_norm(&delta, disc))
}

/// The additive form `L_d (‖Δα‖ + ‖…‖)`, an upper bound on [`besov_ipm`] within a factor 2.
pub fn ipm_sum_bound(t1: &CoefficientTree, t2: &CoefficientTree, disc: &BesovParams) -> Result<f64> {
    let delta = tree_axpy(-1.0, t2, t1)?;
    let (a, b, _) = dual_parts(&delta, disc);
    Ok(disc.l * (a + b))
}

/// `⟨f, Δ⟩` over father and daughter coefficients.
pub fn pairing(f: &CoefficientTree, delta: &CoefficientTree) -> Result<f64> {
    f.inner(delta)
}

/// Unit `l^p` vector `u` with `⟨u, v⟩ = ‖v‖_{p'}`.
fn align(values: &[f64], p: f64) -> Vec<f64> {
    let pc = conjugate(p);
    let norm = lp_norm(values.iter().copied(), pc);
    if norm == 0.0 {
        return alloc::vec![0.0; values.len()];
    }
    if p.is_infinite() {
        values.iter().map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 }).collect()
    } else if p == 1.0 {
        let (arg, _) = values
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
        let mut u = alloc::vec![0.0; values.len()];
        u[arg] = values[arg].signum();
        u
    } else {
        values
            .iter()
            .map(|&v| v.signum() * math::pow(v.abs() / norm, pc - 1.0))
            .collect()
    }
}

fn aligned_level(level: &Level, p: f64, scale: f64) -> Vec<(Key, f64)> {
    let vals: Vec<f64> = level.values().collect();
    let u = align(&vals, p);
    level.iter().zip(u).map(|((k, _), x)| (k, scale * x)).collect()
}

/// Extremal discriminator `f*` with `‖f*‖ = L_d` and `⟨f*, Δ⟩ = dual_norm(Δ)`.
pub fn ipm_witness(delta: &CoefficientTree, disc: &BesovParams) -> Result<CoefficientTree> {
    if delta.is_zero() {
        return Err(Error::ZeroDelta);
    }
    let (a, b, weighted) = dual_parts(delta, disc);
    let d = delta.dim();
    let s = disc.level_exponent(d);
    let mut entries = Vec::new();
    if a >= b {
        for (k, v) in aligned_level(delta.alpha_level(), disc.p, disc.l) {
            entries.push((k.to_index(-1, d), v));
        }
    } else {
        let lambda = align(&weighted, disc.q);
        for (j, level) in delta.levels().iter().enumerate() {
            if lambda[j] == 0.0 || level.is_empty() {
                continue;
            }
            let scale = disc.l * lambda[j] * math::exp2(-(j as f64) * s);
            for (k, v) in aligned_level(level, disc.p, scale) {
                entries.push((k.to_index(j as i32, d), v));
            }
        }
    }
    CoefficientTree::from_entries(delta.family(), d, delta.j_max(), Provenance::Estimate, entries)
}

/// `4A · max(‖ψ‖∞, ‖φ‖∞)^D · L · (1 − 2^{(D/p−σ)q'})^{−1/q'}`.
pub fn sup_norm_bound(params: &BesovParams, family: &WaveletFamily, dim: usize) -> Result<f64> {
    let dp = params.d_over_p(dim);
    if params.sigma <= dp {
        return Err(Error::NotSupBounded { sigma: params.sigma, d_over_p: dp });
    }
    let qc = params.q_conj();
    let series = if qc.is_infinite() {
        1.0
    } else {
        math::pow(1.0 - math::exp2((dp - params.sigma) * qc), -1.0 / qc)
    };
    let peak = family.sup_norm_psi().max(family.sup_norm_phi());
    Ok(4.0 * family.support_radius() * math::powi(peak, dim as i32) * params.l * series)
}

/// `(d_{B^{σ_d}_{p_d,q_d}}, d_{B^{σ_d}_{p_g',q_d}})`; needs `p_d' ≤ p_g` and `D = 1`
/// (for `D > 1` the inclusion of balls holds only up to `(2^D−1)^{1/p_g'−1/p_d}`).
pub fn ipm_nesting_check(
    t1: &CoefficientTree,
    t2: &CoefficientTree,
    disc: &BesovParams,
    pg: f64,
) -> Result<(f64, f64)> {
    let pdc = disc.p_conj();
    if pdc > pg {
        return Err(Error::RegimeMismatch(format!(
            "nesting needs p_d' <= p_g, got p_d' = {pdc} and p_g = {pg}"
        )));
    }
    if t1.dim() != 1 {
        return Err(invalid("the nesting check is exact only in dimension 1"));
    }
    let wide = BesovParams { p: conjugate(pg), ..*disc };
    Ok((besov_ipm(t1, t2, disc)?, besov_ipm(t1, t2, &wide)?))
}
