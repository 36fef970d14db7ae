//! Empirical and exact coefficient trees.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::density::{DensityKind, DensityModel};
use crate::error::{invalid, Result};
use crate::math;
use crate::points::PointSet;
use crate::quadrature::integrate_box;
use crate::tree::{tree_axpy, CoefficientTree, Level, Provenance};
use crate::wavelet::{check_dim, for_each_active, solve, FamilyKind, Key, WaveletFamily};

const DENSE_LIMIT: u64 = 1 << 20;
const GRID_LIMIT: usize = 1 << 26;

/// Extra levels of refinement below `j_max + 1` for the Daubechies route.
const CASCADE_EXTRA_LEVELS: u32 = 2;
/// Depth of the sampled-cascade quadrature rule.
const CASCADE_RULE_DEPTH: u32 = 3;

/// Raw sums `Σ φ(X_i)` and `Σ ψ(X_i)` over levels `0..=j1` (not divided by `n`).
pub fn empirical_sums(samples: &PointSet, family: &WaveletFamily, j1: u32) -> Result<CoefficientTree> {
    samples.check_domain()?;
    let d = samples.dim();
    check_dim(d)?;
    if j1 as usize * d > 62 {
        return Err(invalid("j1 too deep for this dimension"));
    }
    let mut alpha = 0.0;
    for x in samples.iter() {
        alpha += x.iter().map(|&t| family.periodic_1d(false, 0, 0, t)).product::<f64>();
    }
    let mut levels = Vec::with_capacity(j1 as usize + 1);
    for j in 0..=j1 {
        let per_orientation = 1u64 << (d as u32 * j);
        let dense = ((1u64 << d) - 1) * per_orientation;
        if dense <= DENSE_LIMIT {
            let mut acc = vec![0.0; dense as usize];
            for x in samples.iter() {
                for_each_active(family, j, x, |key, v| {
                    acc[((key.orientation as u64 - 1) * per_orientation + key.linear) as usize] += v;
                });
            }
            let entries = acc
                .into_iter()
                .enumerate()
                .filter(|(_, v)| *v != 0.0)
                .map(|(i, v)| {
                    let i = i as u64;
                    (Key { orientation: (i / per_orientation) as u32 + 1, linear: i % per_orientation }, v)
                })
                .collect();
            levels.push(Level::from_sorted(entries));
        } else {
            let mut raw = Vec::new();
            for x in samples.iter() {
                for_each_active(family, j, x, |key, v| raw.push((key, v)));
            }
            levels.push(Level::from_entries(raw));
        }
    }
    Ok(CoefficientTree::from_parts(
        family.kind(),
        d,
        alpha,
        levels,
        Provenance::Empirical(samples.len() as u64),
    ))
}

/// `α̂ = (1/n) Σ φ(X_i)` and `β̂ = (1/n) Σ ψ(X_i)` at levels `0..=j1`.
pub fn empirical_coeffs(samples: &PointSet, family: &WaveletFamily, j0: u32, j1: u32) -> Result<CoefficientTree> {
    if j0 > j1 {
        return Err(invalid(format!("j0 = {j0} exceeds j1 = {j1}")));
    }
    let sums = empirical_sums(samples, family, j1)?;
    let n = samples.len();
    Ok(sums.scale(1.0 / n as f64).with_provenance(Provenance::Empirical(n as u64)))
}

/// Coefficients of an analytic density up to level `j_max`.
pub fn exact_coeffs(model: &DensityModel, family: &WaveletFamily, j_max: u32) -> Result<CoefficientTree> {
    match model.kind() {
        DensityKind::Mixture { components } => {
            let mut acc = CoefficientTree::zero(family, model.dim(), j_max, Provenance::Exact)?;
            for (w, m) in components {
                acc = tree_axpy(*w, &exact_coeffs(m, family, j_max)?, &acc)?;
            }
            Ok(acc.with_provenance(Provenance::Exact))
        }
        DensityKind::Spike { base, family: sf, index, c } if sf.kind() == family.kind() => {
            let b = exact_coeffs(base, family, j_max)?;
            if index.level as u32 > j_max {
                return Ok(b);
            }
            let e = CoefficientTree::from_entries(
                family.kind(),
                model.dim(),
                j_max,
                Provenance::Exact,
                [(index.clone(), 1.0)],
            )?;
            Ok(tree_axpy(*c, &e, &b)?.with_provenance(Provenance::Exact))
        }
        _ => {
            if matches!(family.kind(), FamilyKind::Haar | FamilyKind::Daubechies(1)) {
                haar_exact(model, family, j_max)
            } else {
                cascade_exact(model, family, j_max)
            }
        }
    }
}

fn haar_exact(model: &DensityModel, family: &WaveletFamily, j_max: u32) -> Result<CoefficientTree> {
    let d = model.dim();
    let top = j_max + 1;
    let n = 1usize << top;
    let total = n.checked_pow(d as u32).filter(|&t| t <= GRID_LIMIT).ok_or_else(|| {
        invalid(format!("exact coefficients at j_max = {j_max} need too many cells in dimension {d}"))
    })?;
    let h = 1.0 / n as f64;
    let mut masses = vec![0.0; total];
    if let Some(boxes) = model.elementary_boxes() {
        for (cell, rho) in boxes {
            let ranges: Vec<(usize, usize)> = (0..d)
                .map(|i| {
                    let a = math::floor(cell.lo[i] * n as f64) as usize;
                    let b = (math::ceil(cell.hi[i] * n as f64) as usize).min(n);
                    (a, b.max(a + 1))
                })
                .collect();
            let count: usize = ranges.iter().map(|r| r.1 - r.0).product();
            for flat in 0..count {
                let mut rem = flat;
                let mut idx = 0usize;
                let mut stride = 1usize;
                let mut vol = rho;
                for i in 0..d {
                    let len = ranges[i].1 - ranges[i].0;
                    let t = ranges[i].0 + rem % len;
                    rem /= len;
                    let lo = (t as f64 * h).max(cell.lo[i]);
                    let hi = ((t + 1) as f64 * h).min(cell.hi[i]);
                    vol *= (hi - lo).max(0.0);
                    idx += t * stride;
                    stride *= n;
                }
                masses[idx] += vol;
            }
        }
    } else {
        let vol = math::powi(h, d as i32);
        let tol = 1e-12 * vol;
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for (flat, m) in masses.iter_mut().enumerate() {
            let mut rem = flat;
            for i in 0..d {
                let t = rem % n;
                rem /= n;
                lo[i] = t as f64 * h;
                hi[i] = (t + 1) as f64 * h;
            }
            *m = integrate_box(|x| model.eval(x), &lo, &hi, tol, 4096)?;
        }
    }
    let (alpha, levels) = transform(masses, d, top, j_max, &[1.0, 1.0], &[1.0, -1.0], true);
    Ok(CoefficientTree::from_parts(family.kind(), d, alpha, levels, Provenance::Exact))
}

fn cascade_exact(model: &DensityModel, family: &WaveletFamily, j_max: u32) -> Result<CoefficientTree> {
    let d = model.dim();
    let top = j_max + 1 + CASCADE_EXTRA_LEVELS;
    let mq = CASCADE_RULE_DEPTH.min(family.cascade_depth());
    let n = 1usize << top;
    let g = n << mq;
    let total = g.checked_pow(d as u32).filter(|&t| t <= GRID_LIMIT).ok_or_else(|| {
        invalid(format!("exact coefficients at j_max = {j_max} need too fine a grid in dimension {d}"))
    })?;
    let rule = moment_rule(family, mq);
    let mut grid = vec![0.0; total];
    let mut x = vec![0.0; d];
    for (flat, v) in grid.iter_mut().enumerate() {
        let mut rem = flat;
        for xi in x.iter_mut() {
            *xi = (rem % g) as f64 / g as f64;
            rem /= g;
        }
        *v = model.eval(&x);
    }
    // separable filtering with step 2^mq along each axis
    let mut dims = vec![g; d];
    let mut data = grid;
    let step = 1usize << mq;
    for axis in 0..d {
        let len = dims[axis];
        let out_len = len / step;
        let before: usize = dims[..axis].iter().product();
        let after: usize = dims[axis + 1..].iter().product();
        let mut out = vec![0.0; before * out_len * after];
        for a in 0..after {
            for b in 0..before {
                for k in 0..out_len {
                    let mut s = 0.0;
                    for (i, w) in rule.iter().enumerate() {
                        let src = (k * step + i) % len;
                        s += w * data[b + before * (src + len * a)];
                    }
                    out[b + before * (k + out_len * a)] = s;
                }
            }
        }
        dims[axis] = out_len;
        data = out;
    }
    let norm = 1.0 / math::powi(math::half_power(top), d as i32);
    for v in data.iter_mut() {
        *v *= norm;
    }
    let (alpha, levels) = transform(data, d, top, j_max, family.filter(), &family.high_pass(), false);
    Ok(CoefficientTree::from_parts(family.kind(), d, alpha, levels, Provenance::Exact))
}

/// Weights on `t_i = i 2^{-mq}` approximating `∫ f(t) φ(t) dt`: the sampled
/// father plus the least-norm correction that matches its moments up to
/// degree `min(2N−1, 5)` and keeps every residue class mod 1 summing to 0.
fn moment_rule(family: &WaveletFamily, mq: u32) -> Vec<f64> {
    let stride = 1usize << (family.cascade_depth() - mq);
    let per = 1usize << mq;
    let step = per as f64;
    let mut w: Vec<f64> = family.phi_nodes().iter().step_by(stride).map(|v| v / step).collect();
    let degree = (family.filter().len() - 1).min(5);
    let target = family.father_moments(degree);
    let t: Vec<f64> = (0..w.len()).map(|i| i as f64 / step).collect();
    let mut rows: Vec<Vec<f64>> = (0..per).map(|r| (0..w.len()).map(|i| (i % per == r) as u8 as f64).collect()).collect();
    let mut rhs = vec![0.0; per];
    for a in 1..=degree {
        let row: Vec<f64> = t.iter().map(|&x| math::powi(x, a as i32)).collect();
        rhs.push(target[a] - row.iter().zip(&w).map(|(u, v)| u * v).sum::<f64>());
        rows.push(row);
    }
    let m = rows.len();
    let mut sys = vec![vec![0.0; m + 1]; m];
    for a in 0..m {
        for b in 0..m {
            sys[a][b] = rows[a].iter().zip(&rows[b]).map(|(u, v)| u * v).sum();
        }
        sys[a][m] = rhs[a];
    }
    let lambda = solve(sys);
    for (i, wi) in w.iter_mut().enumerate() {
        *wi += (0..m).map(|a| lambda[a] * rows[a][i]).sum::<f64>();
    }
    w
}

/// Periodized separable pyramid from level `top` down to 0.
///
/// In `masses` mode the input holds cell masses, the filters are the
/// unnormalised Haar sums and differences, and level-`j` outputs are scaled by
/// `2^{Dj/2}`.
fn transform(
    mut a: Vec<f64>,
    d: usize,
    top: u32,
    j_max: u32,
    h: &[f64],
    g: &[f64],
    masses: bool,
) -> (f64, Vec<Level>) {
    let mut levels: Vec<Level> = (0..=j_max).map(|_| Level::default()).collect();
    for j in (0..top).rev() {
        let n = 1usize << j;
        let mut bands: Vec<Vec<f64>> = vec![a];
        let mut dims = vec![2 * n; d];
        for axis in 0..d {
            let mut next = vec![Vec::new(); bands.len() * 2];
            for (mask, band) in bands.into_iter().enumerate() {
                let (lo, hi) = split_axis(&band, &dims, axis, h, g);
                next[mask] = lo;
                next[mask | (1 << axis)] = hi;
            }
            dims[axis] = n;
            bands = next;
        }
        if j <= j_max {
            let scale = if masses { math::powi(math::half_power(j), d as i32) } else { 1.0 };
            let mut entries = Vec::new();
            for (e, band) in bands.iter().enumerate().skip(1) {
                for (linear, &v) in band.iter().enumerate() {
                    if v != 0.0 {
                        entries.push((Key { orientation: e as u32, linear: linear as u64 }, scale * v));
                    }
                }
            }
            levels[j as usize] = Level::from_sorted(entries);
        }
        a = bands.swap_remove(0);
    }
    (a[0], levels)
}

fn split_axis(data: &[f64], dims: &[usize], axis: usize, h: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = dims[axis];
    let half = len / 2;
    let before: usize = dims[..axis].iter().product();
    let after: usize = dims[axis + 1..].iter().product();
    let mut lo = vec![0.0; before * half * after];
    let mut hi = vec![0.0; before * half * after];
    for a in 0..after {
        for b in 0..before {
            for k in 0..half {
                let (mut sl, mut sh) = (0.0, 0.0);
                for l in 0..h.len() {
                    let v = data[b + before * ((2 * k + l) % len + len * a)];
                    sl += h[l] * v;
                    sh += g[l] * v;
                }
                let o = b + before * (k + half * a);
                lo[o] = sl;
                hi[o] = sh;
            }
        }
    }
    (lo, hi)
}
