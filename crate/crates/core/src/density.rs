//! Analytic reference densities on `[0,1]^D` and their samplers.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::points::PointSet;
use crate::quadrature::integrate_box;
use crate::rng::{stream, StreamRng};
use crate::wavelet::{check_dim, eval_wavelet, FamilyKind, WaveletFamily, WaveletIndex};

/// Axis-aligned box `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cell {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Cell { lo, hi }
    }

    pub fn unit(dim: usize) -> Self {
        Cell { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&t, (&a, &b))| t >= a && (t < b || (b == 1.0 && t == 1.0)))
    }
}

/// One-dimensional bump profile on `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Profile {
    /// `exp(−1/(1−t²))`, infinitely smooth.
    Exponential,
    /// `(1−t²)^s`, Hölder-`s` at the edges.
    Polynomial(u32),
}

impl Profile {
    fn value(self, t: f64) -> f64 {
        if t.abs() >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t * t;
        match self {
            Profile::Exponential => math::exp(-1.0 / u),
            Profile::Polynomial(s) => math::powi(u, s as i32),
        }
    }

    fn peak(self) -> f64 {
        match self {
            Profile::Exponential => math::exp(-1.0),
            Profile::Polynomial(_) => 1.0,
        }
    }

    /// `∫_{−1}^{1}` of the profile.
    fn mass(self) -> Result<f64> {
        match self {
            Profile::Polynomial(s) => {
                let mut z = 2.0;
                for r in 1..=s {
                    z *= 2.0 * r as f64 / (2.0 * r as f64 + 1.0);
                }
                Ok(z)
            }
            Profile::Exponential => {
                integrate_box(|x| Profile::Exponential.value(x[0]), &[-1.0], &[1.0], 1e-15, 4096)
            }
        }
    }
}

/// A tensor bump `∏ b((x_i − c_i)/w)`, normalised to mass `weight`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    pub weight: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    /// Mixture of uniform densities on cells; `weights` are masses summing to 1.
    PiecewiseConstant { cells: Vec<Cell>, weights: Vec<f64> },
    /// `base + c·ψ_idx`.
    Spike { base: Box<DensityModel>, family: WaveletFamily, index: WaveletIndex, c: f64 },
    SmoothBump { bumps: Vec<Bump> },
    /// Convex combination of densities.
    Mixture { components: Vec<(f64, DensityModel)> },
    /// Normalised positive (or negative) part of one daughter wavelet.
    WaveletLobe { family: WaveletFamily, index: WaveletIndex, positive: bool },
}

/// A validated probability density on the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    dim: usize,
    kind: DensityKind,
    scale: Vec<f64>,
}

fn haar_like(f: &WaveletFamily) -> bool {
    matches!(f.kind(), FamilyKind::Haar | FamilyKind::Daubechies(1))
}

impl DensityModel {
    pub fn uniform(dim: usize) -> Self {
        DensityModel {
            dim,
            kind: DensityKind::PiecewiseConstant { cells: vec![Cell::unit(dim)], weights: vec![1.0] },
            scale: Vec::new(),
        }
    }

    pub fn piecewise_constant(dim: usize, cells: Vec<Cell>, weights: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if cells.is_empty() || cells.len() != weights.len() {
            return Err(Error::InvalidModel(format!(
                "{} cells but {} weights",
                cells.len(),
                weights.len()
            )));
        }
        for c in &cells {
            if c.lo.len() != dim || c.hi.len() != dim {
                return Err(Error::InvalidModel("cell dimension mismatch".into()));
            }
            if c.lo.iter().zip(&c.hi).any(|(&a, &b)| !(0.0 <= a && a < b && b <= 1.0)) {
                return Err(Error::InvalidModel("cells must be non-empty boxes inside the unit cube".into()));
            }
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel("cell weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("cell weights sum to {total}, not 1")));
        }
        Ok(DensityModel { dim, kind: DensityKind::PiecewiseConstant { cells, weights }, scale: Vec::new() })
    }

    /// Piecewise-constant density on the `2^{level}` dyadic cells of `[0,1]`, given cell masses.
    pub fn dyadic_histogram(level: u32, masses: &[f64]) -> Result<Self> {
        let n = 1usize << level;
        if masses.len() != n {
            return Err(Error::InvalidModel(format!("expected {n} masses")));
        }
        let h = 1.0 / n as f64;
        let cells = (0..n).map(|i| Cell::new(vec![i as f64 * h], vec![(i + 1) as f64 * h])).collect();
        Self::piecewise_constant(1, cells, masses.to_vec())
    }

    /// Uniform density on the sub-box `cell`.
    pub fn uniform_on(cell: Cell) -> Result<Self> {
        let d = cell.lo.len();
        Self::piecewise_constant(d, vec![cell], vec![1.0])
    }

    pub fn spike(base: DensityModel, family: &WaveletFamily, index: WaveletIndex, c: f64) -> Result<Self> {
        index.validate(base.dim)?;
        if index.level < 0 {
            return Err(Error::InvalidModel("spike perturbations use a daughter index".into()));
        }
        if !c.is_finite() {
            return Err(Error::InvalidModel("spike amplitude must be finite".into()));
        }
        let m = DensityModel {
            dim: base.dim,
            kind: DensityKind::Spike { base: Box::new(base), family: family.clone(), index, c },
            scale: Vec::new(),
        };
        m.check_spike_nonnegative()?;
        Ok(m)
    }

    pub fn smooth_bumps(dim: usize, bumps: Vec<Bump>) -> Result<Self> {
        check_dim(dim)?;
        if bumps.is_empty() {
            return Err(Error::InvalidModel("no bumps".into()));
        }
        let mut scale = Vec::with_capacity(bumps.len());
        let mut total = 0.0;
        for b in &bumps {
            if b.center.len() != dim {
                return Err(Error::InvalidModel("bump center dimension mismatch".into()));
            }
            if !(b.width > 0.0) || b.center.iter().any(|&c| c - b.width < 0.0 || c + b.width > 1.0) {
                return Err(Error::InvalidModel("bump support must lie inside the unit cube".into()));
            }
            if !(b.weight >= 0.0) {
                return Err(Error::InvalidModel("bump weights must be nonnegative".into()));
            }
            if let Profile::Polynomial(0) = b.profile {
                return Err(Error::InvalidModel("polynomial profile needs s >= 1".into()));
            }
            total += b.weight;
            let z = b.profile.mass()? * b.width;
            scale.push(b.weight / math::powi(z, dim as i32));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("bump weights sum to {total}, not 1")));
        }
        Ok(DensityModel { dim, kind: DensityKind::SmoothBump { bumps }, scale })
    }

    pub fn mixture(components: Vec<(f64, DensityModel)>) -> Result<Self> {
        let dim = components.first().map(|c| c.1.dim).ok_or_else(|| Error::InvalidModel("empty mixture".into()))?;
        if components.iter().any(|c| c.1.dim != dim) {
            return Err(Error::InvalidModel("mixture components differ in dimension".into()));
        }
        if components.iter().any(|c| !(c.0 >= 0.0)) {
            return Err(Error::InvalidModel("mixture weights must be nonnegative".into()));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(DensityModel { dim, kind: DensityKind::Mixture { components }, scale: Vec::new() })
    }

    pub fn wavelet_lobe(family: &WaveletFamily, index: WaveletIndex, positive: bool) -> Result<Self> {
        let dim = index.dim();
        check_dim(dim)?;
        index.validate(dim)?;
        if index.level < 0 {
            return Err(Error::InvalidModel("lobes use a daughter index".into()));
        }
        let m = lobe_mass(family, &index);
        Ok(DensityModel {
            dim,
            kind: DensityKind::WaveletLobe { family: family.clone(), index, positive },
            scale: vec![m],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// `∫ ψ_idx^+` for a lobe model.
    pub fn lobe_mass(&self) -> Option<f64> {
        match self.kind {
            DensityKind::WaveletLobe { .. } => Some(self.scale[0]),
            _ => None,
        }
    }

    /// Density value; 0 outside the cube.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if x.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return 0.0;
        }
        match &self.kind {
            DensityKind::PiecewiseConstant { cells, weights } => cells
                .iter()
                .zip(weights)
                .filter(|(c, _)| c.contains(x))
                .map(|(c, w)| w / c.volume())
                .sum(),
            DensityKind::Spike { base, family, index, c } => base.eval(x) + c * eval_wavelet(family, index, x),
            DensityKind::SmoothBump { bumps } => bumps
                .iter()
                .zip(&self.scale)
                .map(|(b, s)| {
                    let mut v = *s;
                    for (t, c) in x.iter().zip(&b.center) {
                        v *= b.profile.value((t - c) / b.width);
                        if v == 0.0 {
                            break;
                        }
                    }
                    v
                })
                .sum(),
            DensityKind::Mixture { components } => components.iter().map(|(w, m)| w * m.eval(x)).sum(),
            DensityKind::WaveletLobe { family, index, positive } => {
                let v = eval_wavelet(family, index, x);
                let v = if *positive { v } else { -v };
                v.max(0.0) / self.scale[0]
            }
        }
    }

    /// An upper bound on `sup f`.
    pub fn sup_bound(&self) -> f64 {
        match &self.kind {
            DensityKind::PiecewiseConstant { cells, weights } => {
                cells.iter().zip(weights).map(|(c, w)| w / c.volume()).sum()
            }
            DensityKind::Spike { base, family, index, c } => base.sup_bound() + c.abs() * wavelet_sup(family, index),
            DensityKind::SmoothBump { bumps } => {
                bumps.iter().zip(&self.scale).map(|(b, s)| s * math::powi(b.profile.peak(), self.dim as i32)).sum()
            }
            DensityKind::Mixture { components } => components.iter().map(|(w, m)| w * m.sup_bound()).sum(),
            DensityKind::WaveletLobe { family, index, .. } => wavelet_sup(family, index) / self.scale[0],
        }
    }

    /// Per-coordinate breakpoints on which the density is piecewise constant, if it is.
    fn breakpoints(&self) -> Option<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = vec![vec![0.0, 1.0]; self.dim];
        match &self.kind {
            DensityKind::PiecewiseConstant { cells, .. } => {
                for c in cells {
                    for i in 0..self.dim {
                        out[i].push(c.lo[i]);
                        out[i].push(c.hi[i]);
                    }
                }
            }
            DensityKind::Spike { base, family, index, .. } => {
                if !haar_like(family) {
                    return None;
                }
                let b = base.breakpoints()?;
                for i in 0..self.dim {
                    out[i].extend_from_slice(&b[i]);
                }
                add_haar_breaks(&mut out, index);
            }
            DensityKind::WaveletLobe { family, index, .. } => {
                if !haar_like(family) {
                    return None;
                }
                add_haar_breaks(&mut out, index);
            }
            DensityKind::Mixture { components } => {
                for (_, m) in components {
                    let b = m.breakpoints()?;
                    for i in 0..self.dim {
                        out[i].extend_from_slice(&b[i]);
                    }
                }
            }
            DensityKind::SmoothBump { .. } => return None,
        }
        for v in &mut out {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
        }
        Some(out)
    }

    /// Disjoint boxes with constant density covering the cube, for
    /// piecewise-constant models (including Haar spikes and lobes).
    pub fn elementary_boxes(&self) -> Option<Vec<(Cell, f64)>> {
        let breaks = self.breakpoints()?;
        let counts: Vec<usize> = breaks.iter().map(|b| b.len() - 1).collect();
        let total: usize = counts.iter().product();
        if total > 1 << 24 {
            return None;
        }
        let mut out = Vec::with_capacity(total);
        let mut mid = vec![0.0; self.dim];
        for flat in 0..total {
            let mut rem = flat;
            let mut lo = Vec::with_capacity(self.dim);
            let mut hi = Vec::with_capacity(self.dim);
            for i in 0..self.dim {
                let t = rem % counts[i];
                rem /= counts[i];
                lo.push(breaks[i][t]);
                hi.push(breaks[i][t + 1]);
                mid[i] = 0.5 * (breaks[i][t] + breaks[i][t + 1]);
            }
            let v = self.eval(&mid);
            if v != 0.0 {
                out.push((Cell { lo, hi }, v));
            }
        }
        Some(out)
    }

    /// Exact CDF of a one-dimensional piecewise-constant model.
    pub fn cdf_1d(&self, x: f64) -> Option<f64> {
        if self.dim != 1 {
            return None;
        }
        let boxes = self.elementary_boxes()?;
        Some(
            boxes
                .iter()
                .map(|(c, v)| v * (x.min(c.hi[0]) - c.lo[0]).max(0.0))
                .sum::<f64>()
                .clamp(0.0, 1.0),
        )
    }

    /// Lowest density value over the piecewise-constant pieces, or over a grid otherwise.
    fn check_spike_nonnegative(&self) -> Result<()> {
        let DensityKind::Spike { index, family, .. } = &self.kind else { return Ok(()) };
        if let Some(boxes) = self.elementary_boxes() {
            if let Some((_, v)) = boxes.iter().find(|(_, v)| *v < 0.0) {
                return Err(Error::InvalidModel(format!("spike makes the density negative ({v})")));
            }
            return Ok(());
        }
        // grid of cell centres at resolution 2^{-(j+4)} over the support of ψ_idx
        let j = index.level as u32;
        let res = j + 4;
        let width = family.support_width() as u64;
        let per: Vec<Vec<f64>> = index
            .k
            .iter()
            .map(|&k| {
                let n = 1u64 << res;
                let start = k << 4;
                let span = (width << 4).min(n);
                (0..span).map(|i| ((start + i) % n) as f64 / n as f64 + 0.5 / n as f64).collect()
            })
            .collect();
        let total: usize = per.iter().map(Vec::len).product();
        if total > 1 << 22 {
            return Err(Error::InvalidModel("nonnegativity grid too large".into()));
        }
        let mut x = vec![0.0; self.dim];
        for flat in 0..total {
            let mut rem = flat;
            for i in 0..self.dim {
                x[i] = per[i][rem % per[i].len()];
                rem /= per[i].len();
            }
            let v = self.eval(&x);
            if v < 0.0 {
                return Err(Error::InvalidModel(format!("spike makes the density negative ({v})")));
            }
        }
        Ok(())
    }

    /// `∫ f` by adaptive quadrature (a validation aid).
    pub fn total_mass(&self, tol: f64) -> Result<f64> {
        if let Some(boxes) = self.elementary_boxes() {
            return Ok(boxes.iter().map(|(c, v)| v * c.volume()).sum());
        }
        let lo = vec![0.0; self.dim];
        let hi = vec![1.0; self.dim];
        integrate_box(|x| self.eval(x), &lo, &hi, tol, 1 << 16)
    }
}

fn add_haar_breaks(out: &mut [Vec<f64>], index: &WaveletIndex) {
    let n = (1u64 << index.level) as f64;
    for (i, &k) in index.k.iter().enumerate() {
        out[i].push(k as f64 / n);
        out[i].push((k as f64 + 0.5) / n);
        out[i].push((k as f64 + 1.0) / n);
    }
}

/// Upper bound on `sup |ψ_idx|` for a periodized daughter.
pub(crate) fn wavelet_sup(family: &WaveletFamily, index: &WaveletIndex) -> f64 {
    let j = index.level.max(0) as u32;
    let wraps = {
        let n = 1u64 << j;
        ((family.support_width() as u64).div_ceil(n)).max(1) as f64
    };
    let per = math::half_power(j) * wraps;
    let mut v = 1.0;
    for i in 0..index.dim() {
        let mother = index.orientation >> i & 1 == 1;
        v *= per * if mother { family.sup_norm_psi() } else { family.sup_norm_phi() };
    }
    v
}

/// `∫ ψ_idx^+`: half the product of per-coordinate `L¹` norms.
fn lobe_mass(family: &WaveletFamily, index: &WaveletIndex) -> f64 {
    let j = index.level as u32;
    let mut m = 0.5;
    for i in 0..index.dim() {
        m *= family.abs_integral_1d(index.orientation >> i & 1 == 1, j);
    }
    m
}

/// Below this acceptance rate the rejection sampler gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

enum Plan {
    Boxes { boxes: Vec<(Cell, f64)>, cumulative: Vec<f64> },
    Mixture { cumulative: Vec<f64>, parts: Vec<Sampler> },
    Reject { envelope: f64 },
}

/// Prepared sampler for one density.
pub struct Sampler {
    model: DensityModel,
    plan: Plan,
}

impl Sampler {
    pub fn new(model: &DensityModel) -> Result<Self> {
        let plan = if let Some(boxes) = model.elementary_boxes() {
            let mut acc = 0.0;
            let cumulative = boxes
                .iter()
                .map(|(c, v)| {
                    acc += v * c.volume();
                    acc
                })
                .collect();
            Plan::Boxes { boxes, cumulative }
        } else if let DensityKind::Mixture { components } = &model.kind {
            let mut acc = 0.0;
            let cumulative = components
                .iter()
                .map(|(w, _)| {
                    acc += w;
                    acc
                })
                .collect();
            let parts = components.iter().map(|(_, m)| Sampler::new(m)).collect::<Result<_>>()?;
            Plan::Mixture { cumulative, parts }
        } else {
            let envelope = model.sup_bound();
            if !(envelope.is_finite() && envelope > 0.0) {
                return Err(invalid("density has no finite sup bound"));
            }
            Plan::Reject { envelope }
        };
        Ok(Sampler { model: model.clone(), plan })
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    /// Draws one point into `out`.
    pub fn draw(&self, rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        match &self.plan {
            Plan::Boxes { boxes, cumulative } => {
                let total = *cumulative.last().unwrap();
                let u: f64 = rng.random::<f64>() * total;
                let i = cumulative.partition_point(|&c| c <= u).min(boxes.len() - 1);
                let c = &boxes[i].0;
                for d in 0..out.len() {
                    let t: f64 = rng.random();
                    out[d] = c.lo[d] + t * (c.hi[d] - c.lo[d]);
                }
                Ok(())
            }
            Plan::Mixture { cumulative, parts } => {
                let u: f64 = rng.random::<f64>() * cumulative.last().unwrap();
                let i = cumulative.partition_point(|&c| c <= u).min(parts.len() - 1);
                parts[i].draw(rng, out)
            }
            Plan::Reject { envelope } => {
                let mut proposals = 0u64;
                loop {
                    for v in out.iter_mut() {
                        *v = rng.random();
                    }
                    proposals += 1;
                    let u: f64 = rng.random();
                    if u * envelope < self.model.eval(out) {
                        return Ok(());
                    }
                    if proposals >= 1_000_000 {
                        return Err(Error::RejectionBudgetExceeded { rate: 1.0 / proposals as f64 });
                    }
                }
            }
        }
    }

    /// Draws `n` points from one stream.
    pub fn sample_with(&self, rng: &mut StreamRng, n: usize) -> Result<PointSet> {
        let mut out = PointSet::with_capacity(self.dim(), n);
        let mut buf = vec![0.0; self.dim()];
        for _ in 0..n {
            self.draw(rng, &mut buf)?;
            out.push(&buf);
        }
        Ok(out)
    }

    /// Expected acceptance rate of the rejection plan (1 for exact plans).
    pub fn acceptance_rate(&self) -> f64 {
        match &self.plan {
            Plan::Reject { envelope } => 1.0 / envelope,
            _ => 1.0,
        }
    }
}

/// `n` i.i.d. draws, deterministic in `seed`.
pub fn sample(model: &DensityModel, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let s = Sampler::new(model)?;
    if s.acceptance_rate() < MIN_ACCEPTANCE {
        return Err(Error::RejectionBudgetExceeded { rate: s.acceptance_rate() });
    }
    let mut rng = stream(seed);
    s.sample_with(&mut rng, n)
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(tag = "kind", rename_all = "snake_case")]
    enum Repr {
        PiecewiseConstant { dim: usize, cells: Vec<Cell>, weights: Vec<f64> },
        Spike { base: Box<DensityModel>, family: WaveletFamily, index: WaveletIndex, c: f64 },
        SmoothBump { dim: usize, bumps: Vec<Bump> },
        Mixture { components: Vec<(f64, DensityModel)> },
        WaveletLobe { family: WaveletFamily, index: WaveletIndex, positive: bool },
    }

    impl Serialize for DensityModel {
        fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
            let r = match &self.kind {
                DensityKind::PiecewiseConstant { cells, weights } => {
                    Repr::PiecewiseConstant { dim: self.dim, cells: cells.clone(), weights: weights.clone() }
                }
                DensityKind::Spike { base, family, index, c } => {
                    Repr::Spike { base: base.clone(), family: family.clone(), index: index.clone(), c: *c }
                }
                DensityKind::SmoothBump { bumps } => Repr::SmoothBump { dim: self.dim, bumps: bumps.clone() },
                DensityKind::Mixture { components } => Repr::Mixture { components: components.clone() },
                DensityKind::WaveletLobe { family, index, positive } => {
                    Repr::WaveletLobe { family: family.clone(), index: index.clone(), positive: *positive }
                }
            };
            r.serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for DensityModel {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            let r = Repr::deserialize(d)?;
            let m = match r {
                Repr::PiecewiseConstant { dim, cells, weights } => DensityModel::piecewise_constant(dim, cells, weights),
                Repr::Spike { base, family, index, c } => DensityModel::spike(*base, &family, index, c),
                Repr::SmoothBump { dim, bumps } => DensityModel::smooth_bumps(dim, bumps),
                Repr::Mixture { components } => DensityModel::mixture(components),
                Repr::WaveletLobe { family, index, positive } => DensityModel::wavelet_lobe(&family, index, positive),
            };
            m.map_err(serde::de::Error::custom)
        }
    }
}
