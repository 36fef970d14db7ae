//! Adaptive tensor Gauss–Legendre quadrature on boxes.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gl8_1d() -> ([f64; 8], [f64; 8]) {
    let mut x = [0.0; 8];
    let mut w = [0.0; 8];
    for i in 0..4 {
        x[i] = -NODES[3 - i];
        w[i] = WEIGHTS[3 - i];
        x[7 - i] = NODES[3 - i];
        w[7 - i] = WEIGHTS[3 - i];
    }
    (x, w)
}

/// Order-8 tensor rule on the box `[lo, hi]`.
fn rule<F: FnMut(&[f64]) -> f64>(f: &mut F, lo: &[f64], hi: &[f64], buf: &mut Vec<f64>) -> f64 {
    let d = lo.len();
    let (x, w) = gl8_1d();
    let total = 8usize.pow(d as u32);
    buf.resize(d, 0.0);
    let mut sum = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        let mut weight = 1.0;
        for i in 0..d {
            let t = rem % 8;
            rem /= 8;
            let half = 0.5 * (hi[i] - lo[i]);
            buf[i] = lo[i] + half * (x[t] + 1.0);
            weight *= w[t] * half;
        }
        sum += weight * f(buf);
    }
    sum
}

/// Integrates `f` over the box `[lo, hi]` to absolute tolerance `tol`,
/// bisecting every axis when the coarse and refined estimates disagree.
pub fn integrate_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    budget: usize,
) -> Result<f64> {
    let mut buf = Vec::new();
    let mut used = 0usize;
    let coarse = rule(&mut f, lo, hi, &mut buf);
    refine(&mut f, lo, hi, coarse, tol, tol * 1e-6, budget, &mut used, &mut buf, 0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    lo: &[f64],
    hi: &[f64],
    coarse: f64,
    tol: f64,
    floor: f64,
    budget: usize,
    used: &mut usize,
    buf: &mut Vec<f64>,
    depth: u32,
) -> Result<f64> {
    let d = lo.len();
    let children = 1usize << d;
    let mut parts = Vec::with_capacity(children);
    let mut fine = 0.0;
    for c in 0..children {
        let (clo, chi) = child(lo, hi, c);
        let v = rule(f, &clo, &chi, buf);
        fine += v;
        parts.push((clo, chi, v));
    }
    if (fine - coarse).abs() <= tol.max(8.0 * f64::EPSILON * fine.abs()) {
        return Ok(fine);
    }
    *used += 1;
    if *used > budget || depth >= 48 {
        return Err(Error::QuadratureFailure { tolerance: tol, budget });
    }
    let sub_tol = tol / children as f64;
    let mut total = 0.0;
    for (clo, chi, v) in parts {
        total += refine(f, &clo, &chi, v, sub_tol.max(floor), floor, budget, used, buf, depth + 1)?;
    }
    Ok(total)
}

fn child(lo: &[f64], hi: &[f64], c: usize) -> (Vec<f64>, Vec<f64>) {
    let mut clo = Vec::with_capacity(lo.len());
    let mut chi = Vec::with_capacity(lo.len());
    for i in 0..lo.len() {
        let mid = 0.5 * (lo[i] + hi[i]);
        if c >> i & 1 == 0 {
            clo.push(lo[i]);
            chi.push(mid);
        } else {
            clo.push(mid);
            chi.push(hi[i]);
        }
    }
    (clo, chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate_box(|x| x[0].powi(15), &[0.0], &[1.0], 1e-14, 10).unwrap();
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
        let v = integrate_box(|x| x[0] * x[1], &[0.0, 0.0], &[1.0, 2.0], 1e-14, 10).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kink_converges() {
        let v = integrate_box(|x| (x[0] - 0.3).abs(), &[0.0], &[1.0], 1e-13, 1000).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
    }
}
