//! Thin wrappers over `libm` so the crate stays `no_std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
/// `x^n` by repeated squaring.
pub fn powi(x: f64, n: i32) -> f64 {
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

pub fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = libm::fmod(x, m);
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

/// `2^(j/2)` for a non-negative integer level.
#[inline]
pub fn half_power(j: u32) -> f64 {
    let whole = (1u64 << (j / 2)) as f64;
    if j % 2 == 1 {
        whole * core::f64::consts::SQRT_2
    } else {
        whole
    }
}

/// Hölder conjugate with `1' = ∞` and `∞' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `l^p` norm of a sequence, `p ∈ [1, ∞]`.
pub fn lp_norm<I: IntoIterator<Item = f64>>(values: I, p: f64) -> f64 {
    if p.is_infinite() {
        values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        values.into_iter().map(f64::abs).sum()
    } else if p == 2.0 {
        sqrt(values.into_iter().map(|v| v * v).sum())
    } else {
        // scale by the max entry to avoid overflow for large `p`
        let v: alloc::vec::Vec<f64> = values.into_iter().map(f64::abs).collect();
        let m = v.iter().cloned().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * pow(v.iter().map(|x| pow(x / m, p)).sum::<f64>(), 1.0 / p)
    }
}

/// Floor of `log2(x)` that tolerates values a hair below an exact power of two.
pub fn floor_log2(x: f64) -> i64 {
    floor(log2(x) + 1e-9) as i64
}
