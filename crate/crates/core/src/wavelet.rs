//! Compactly supported wavelet families on the unit cube.
//!
//! Daughter functions at level `j ≥ 0` are periodized tensor products
//! `2^{Dj/2} ψ_e(2^j x − k)` with `k ∈ [0, 2^j)^D`. The only father translate
//! on the cube is the level-0 periodized father, which is identically 1.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::math;

const DB2: [f64; 4] = [
    0.48296291314453416,
    0.8365163037378079,
    0.2241438680420134,
    -0.12940952255126037,
];
const DB3: [f64; 6] = [
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
];
const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

/// Largest number of per-coordinate translates that can be active at a point.
pub const MAX_SUPPORT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FamilyKind {
    Haar,
    /// Daubechies with `N` vanishing moments (`N = 2, 3, 4`).
    Daubechies(u8),
}

/// A father/mother pair with cascade tables for evaluation.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "FamilySpec", try_from = "FamilySpec"))]
pub struct WaveletFamily {
    kind: FamilyKind,
    regularity: u32,
    support_radius: f64,
    filter: Vec<f64>,
    cascade_depth: u32,
    sup_norm_psi: f64,
    sup_norm_phi: f64,
    phi: Arc<[f64]>,
    psi: Arc<[f64]>,
}

impl PartialEq for WaveletFamily {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.cascade_depth == other.cascade_depth
    }
}

pub const DEFAULT_CASCADE_DEPTH: u32 = 12;

/// Serialized form of a family: a name such as `"db2"`, or a name with a cascade depth.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum FamilySpec {
    Name(String),
    Detailed { name: String, cascade_depth: u32 },
}

impl From<WaveletFamily> for FamilySpec {
    fn from(f: WaveletFamily) -> Self {
        if f.cascade_depth == DEFAULT_CASCADE_DEPTH {
            FamilySpec::Name(f.name())
        } else {
            FamilySpec::Detailed { name: f.name(), cascade_depth: f.cascade_depth }
        }
    }
}

impl TryFrom<FamilySpec> for WaveletFamily {
    type Error = Error;
    fn try_from(s: FamilySpec) -> Result<Self> {
        match s {
            FamilySpec::Name(n) => WaveletFamily::from_name(&n),
            FamilySpec::Detailed { name, cascade_depth } => WaveletFamily::from_name_with_depth(&name, cascade_depth),
        }
    }
}

impl WaveletFamily {
    pub fn haar() -> Self {
        WaveletFamily {
            kind: FamilyKind::Haar,
            regularity: 0,
            support_radius: 0.5,
            filter: vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            cascade_depth: DEFAULT_CASCADE_DEPTH,
            sup_norm_psi: 1.0,
            sup_norm_phi: 1.0,
            phi: Arc::from(Vec::new()),
            psi: Arc::from(Vec::new()),
        }
    }

    pub fn daubechies(n: u8) -> Result<Self> {
        Self::daubechies_with_depth(n, DEFAULT_CASCADE_DEPTH)
    }

    pub fn daubechies_with_depth(n: u8, depth: u32) -> Result<Self> {
        let filter: Vec<f64> = match n {
            1 => return Ok(Self::haar().with_kind(FamilyKind::Daubechies(1))),
            2 => DB2.to_vec(),
            3 => DB3.to_vec(),
            4 => DB4.to_vec(),
            _ => return Err(invalid(format!("Daubechies({n}) is not available; use N in 1..=4"))),
        };
        if !(1..=20).contains(&depth) {
            return Err(invalid(format!("cascade depth {depth} outside 1..=20")));
        }
        let phi = cascade(&filter, depth);
        let psi = mother_table(&filter, &phi, depth);
        let sup = |t: &[f64]| t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(WaveletFamily {
            kind: FamilyKind::Daubechies(n),
            regularity: n as u32 - 1,
            support_radius: (2 * n as usize - 1) as f64 / 2.0,
            sup_norm_psi: sup(&psi),
            sup_norm_phi: sup(&phi),
            filter,
            cascade_depth: depth,
            phi: Arc::from(phi),
            psi: Arc::from(psi),
        })
    }

    fn with_kind(mut self, kind: FamilyKind) -> Self {
        self.kind = kind;
        self
    }

    /// Parses `"haar"`, `"db1"` … `"db4"`.
    pub fn from_name(name: &str) -> Result<Self> {
        Self::from_name_with_depth(name, DEFAULT_CASCADE_DEPTH)
    }

    pub fn from_name_with_depth(name: &str, depth: u32) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "haar" {
            return Ok(Self::haar());
        }
        let n = lower
            .strip_prefix("db")
            .and_then(|s| s.parse::<u8>().ok())
            .ok_or_else(|| invalid(format!("unknown wavelet family '{name}'")))?;
        Self::daubechies_with_depth(n, depth)
    }

    pub fn from_kind(kind: FamilyKind, depth: u32) -> Result<Self> {
        match kind {
            FamilyKind::Haar => Ok(Self::haar()),
            FamilyKind::Daubechies(n) => Self::daubechies_with_depth(n, depth),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            FamilyKind::Haar => String::from("haar"),
            FamilyKind::Daubechies(n) => format!("db{n}"),
        }
    }

    pub fn regularity(&self) -> u32 {
        self.regularity
    }

    /// Half-width `A` of the mother support.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Integer support width `2N − 1` (1 for Haar).
    pub fn support_width(&self) -> usize {
        self.filter.len() - 1
    }

    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    /// High-pass filter `g_l = (−1)^l h_{L−l}`.
    pub fn high_pass(&self) -> Vec<f64> {
        let l = self.filter.len() - 1;
        (0..=l)
            .map(|i| if i % 2 == 0 { self.filter[l - i] } else { -self.filter[l - i] })
            .collect()
    }

    pub fn cascade_depth(&self) -> u32 {
        self.cascade_depth
    }

    pub fn sup_norm_psi(&self) -> f64 {
        self.sup_norm_psi
    }

    pub fn sup_norm_phi(&self) -> f64 {
        self.sup_norm_phi
    }

    fn is_haar_like(&self) -> bool {
        self.phi.is_empty()
    }

    /// Father `φ(t)` on the real line.
    pub fn phi(&self, t: f64) -> f64 {
        if self.is_haar_like() {
            if (0.0..1.0).contains(&t) {
                1.0
            } else {
                0.0
            }
        } else {
            interpolate(&self.phi, self.cascade_depth, t)
        }
    }

    /// Mother `ψ(t)` on the real line.
    pub fn psi(&self, t: f64) -> f64 {
        if self.is_haar_like() {
            if (0.0..0.5).contains(&t) {
                1.0
            } else if (0.5..1.0).contains(&t) {
                -1.0
            } else {
                0.0
            }
        } else {
            interpolate(&self.psi, self.cascade_depth, t)
        }
    }

    /// `∫ t^a φ(t) dt` for `a = 0..=max`, from the refinement equation.
    pub fn father_moments(&self, max: usize) -> Vec<f64> {
        let h = &self.filter;
        let mut m = vec![1.0];
        for a in 1..=max {
            let mut s = 0.0;
            for (k, hk) in h.iter().enumerate() {
                let mut binom = 1.0;
                for b in 0..a {
                    s += hk * binom * math::powi(k as f64, (a - b) as i32) * m[b];
                    binom = binom * (a - b) as f64 / (b + 1) as f64;
                }
            }
            let scale = SQRT_2 / math::exp2(a as f64 + 1.0);
            m.push(scale * s / (1.0 - math::exp2(-(a as f64))));
        }
        m
    }

    /// Cascade node values `φ(i 2^{-m})`, `i = 0 ..= L 2^m` (empty for Haar).
    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi_nodes(&self) -> &[f64] {
        &self.psi
    }

    /// Periodized one-dimensional father (`mother = false`) or mother at `(j, k)`.
    pub fn periodic_1d(&self, mother: bool, j: u32, k: u64, x: f64) -> f64 {
        let n = (1u64 << j) as f64;
        let width = self.support_width() as f64;
        let mut t = math::rem_euclid(x * n - k as f64, n);
        let mut s = 0.0;
        while t < width {
            s += if mother { self.psi(t) } else { self.phi(t) };
            t += n;
        }
        math::half_power(j) * s
    }

    /// Per-coordinate translates at level `j` whose father or mother is nonzero at `x`.
    pub(crate) fn active_1d(&self, j: u32, x: f64) -> Active1d {
        let n = 1u64 << j;
        let xw = if x >= 1.0 { x - 1.0 } else { x };
        let c = (math::floor(xw * n as f64) as i64).clamp(0, n as i64 - 1);
        let width = self.support_width() as i64;
        let mut out = Active1d::default();
        let mut seen = [u64::MAX; MAX_SUPPORT];
        let span = width.min(n as i64);
        for off in 0..span {
            let k = (c - off).rem_euclid(n as i64) as u64;
            if seen[..off as usize].contains(&k) {
                continue;
            }
            seen[off as usize] = k;
            let f = self.periodic_1d(false, j, k, xw);
            if f != 0.0 {
                out.father[out.n_father] = (k, f);
                out.n_father += 1;
            }
            let m = self.periodic_1d(true, j, k, xw);
            if m != 0.0 {
                out.mother[out.n_mother] = (k, m);
                out.n_mother += 1;
            }
        }
        out
    }

    /// `∫ |ψ^{per}_{j,k}|` over `[0, 1]` (independent of `k`).
    pub fn abs_integral_1d(&self, mother: bool, j: u32) -> f64 {
        if self.is_haar_like() {
            return 1.0 / math::half_power(j);
        }
        let n = 1u64 << j;
        let m = self.cascade_depth;
        let steps = n << m;
        let h = 1.0 / steps as f64;
        let mut s = 0.0;
        for i in 0..steps {
            s += self.periodic_1d(mother, j, 0, i as f64 * h).abs();
        }
        s * h
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Active1d {
    pub father: [(u64, f64); MAX_SUPPORT],
    pub n_father: usize,
    pub mother: [(u64, f64); MAX_SUPPORT],
    pub n_mother: usize,
}

impl Active1d {
    pub fn list(&self, mother: bool) -> &[(u64, f64)] {
        if mother {
            &self.mother[..self.n_mother]
        } else {
            &self.father[..self.n_father]
        }
    }
}

fn interpolate(table: &[f64], depth: u32, t: f64) -> f64 {
    if table.is_empty() || !(t >= 0.0) {
        return 0.0;
    }
    let pos = t * (1u64 << depth) as f64;
    let i = math::floor(pos) as usize;
    if i + 1 >= table.len() {
        return if i + 1 == table.len() && pos == i as f64 { table[i] } else { 0.0 };
    }
    let frac = pos - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

/// Father values on the dyadic grid `i 2^{-m}` over `[0, L]`.
pub(crate) fn cascade(h: &[f64], depth: u32) -> Vec<f64> {
    let l = h.len() - 1;
    let size = l + 1;
    // integer values: eigenvector of M_ij = √2 h_{2i−j} for eigenvalue 1, normalised to sum 1
    let mut a = vec![vec![0.0; size + 1]; size];
    for i in 0..size {
        for j in 0..size {
            let idx = 2 * i as i64 - j as i64;
            let m = if (0..=l as i64).contains(&idx) { SQRT_2 * h[idx as usize] } else { 0.0 };
            a[i][j] = m - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..size {
        a[size - 1][j] = 1.0;
    }
    a[size - 1][size] = 1.0;
    let v = solve(a);
    let step = 1usize << depth;
    let mut tab = vec![0.0; l * step + 1];
    for (i, vi) in v.iter().enumerate() {
        tab[i * step] = *vi;
    }
    for s in 1..=depth {
        let stride = 1usize << (depth - s);
        let mut idx = stride;
        while idx < tab.len() {
            let mut sum = 0.0;
            for (k, hk) in h.iter().enumerate() {
                let src = 2 * idx as i64 - (k * step) as i64;
                if src >= 0 && (src as usize) < tab.len() {
                    sum += hk * tab[src as usize];
                }
            }
            tab[idx] = SQRT_2 * sum;
            idx += 2 * stride;
        }
    }
    tab
}

fn mother_table(h: &[f64], phi: &[f64], depth: u32) -> Vec<f64> {
    let l = h.len() - 1;
    let step = 1usize << depth;
    let g: Vec<f64> = (0..=l).map(|i| if i % 2 == 0 { h[l - i] } else { -h[l - i] }).collect();
    (0..phi.len())
        .map(|idx| {
            let mut sum = 0.0;
            for (k, gk) in g.iter().enumerate() {
                let src = 2 * idx as i64 - (k * step) as i64;
                if src >= 0 && (src as usize) < phi.len() {
                    sum += gk * phi[src as usize];
                }
            }
            SQRT_2 * sum
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub(crate) fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// Level, translation and orientation of one basis function.
///
/// `level = -1` is the father translate at scale 0 (`orientation = 0`).
/// Bit `i` of `orientation` selects the mother in coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaveletIndex {
    pub level: i32,
    pub k: Vec<u64>,
    pub orientation: u32,
}

impl WaveletIndex {
    pub fn father(k: Vec<u64>) -> Self {
        WaveletIndex { level: -1, k, orientation: 0 }
    }

    pub fn new(level: u32, k: Vec<u64>, orientation: u32) -> Result<Self> {
        let idx = WaveletIndex { level: level as i32, k, orientation };
        idx.validate(idx.dim())?;
        Ok(idx)
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.k.len() != dim || dim == 0 {
            return Err(invalid(format!("index has {} coordinates, expected {dim}", self.k.len())));
        }
        if self.level < -1 {
            return Err(invalid("level below -1"));
        }
        let full = if dim >= 32 { u32::MAX } else { (1u32 << dim) - 1 };
        if self.orientation & !full != 0 {
            return Err(invalid("orientation has bits beyond the dimension"));
        }
        if self.level == -1 {
            if self.orientation != 0 || self.k.iter().any(|&k| k != 0) {
                return Err(invalid("the only father translate on the unit cube is k = 0, e = 0"));
            }
            return Ok(());
        }
        if self.orientation == 0 {
            return Err(invalid("mother indices need a nonzero orientation"));
        }
        let n = 1u64 << self.level;
        if self.k.iter().any(|&k| k >= n) {
            return Err(invalid(format!("translation outside [0, 2^{})", self.level)));
        }
        if self.level as usize * dim > 62 {
            return Err(invalid("level too deep for this dimension"));
        }
        Ok(())
    }

    pub(crate) fn key(&self) -> Key {
        Key::from_index(self)
    }
}

/// Packed `(orientation, linear translation)` used inside trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub orientation: u32,
    pub linear: u64,
}

impl Key {
    pub fn from_index(idx: &WaveletIndex) -> Key {
        let j = idx.level.max(0) as u32;
        let mut linear = 0u64;
        for (i, &k) in idx.k.iter().enumerate() {
            linear |= k << (j as usize * i);
        }
        Key { orientation: idx.orientation, linear }
    }

    pub fn to_index(self, level: i32, dim: usize) -> WaveletIndex {
        let j = level.max(0) as u32;
        let mask = (1u64 << j) - 1;
        let k = (0..dim).map(|i| (self.linear >> (j as usize * i)) & mask).collect();
        WaveletIndex { level, k, orientation: self.orientation }
    }
}

/// Raw tensor father `∏ φ(x_i)` on `R^D`, not periodized.
pub fn eval_father(family: &WaveletFamily, x: &[f64]) -> f64 {
    x.iter().map(|&t| family.phi(t)).product()
}

/// Periodized basis function at `idx`; 0 outside the closed unit cube.
pub fn eval_wavelet(family: &WaveletFamily, idx: &WaveletIndex, x: &[f64]) -> f64 {
    if x.len() != idx.k.len() || x.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return 0.0;
    }
    if idx.level < 0 {
        return x.iter().map(|&t| family.periodic_1d(false, 0, 0, t)).product();
    }
    let j = idx.level as u32;
    let mut v = 1.0;
    for (i, (&t, &k)) in x.iter().zip(idx.k.iter()).enumerate() {
        v *= family.periodic_1d(idx.orientation >> i & 1 == 1, j, k, t);
        if v == 0.0 {
            return 0.0;
        }
    }
    v
}

/// Calls `f(key, value)` for every level-`j` daughter that is nonzero at `x`,
/// ordered by orientation and then by the per-coordinate enumeration.
pub(crate) fn for_each_active<F: FnMut(Key, f64)>(family: &WaveletFamily, j: u32, x: &[f64], mut f: F) {
    let d = x.len();
    let mut per: [Active1d; 8] = [Active1d::default(); 8];
    for i in 0..d {
        per[i] = family.active_1d(j, x[i]);
    }
    let shift = j as usize;
    for e in 1u32..(1u32 << d) {
        let lists: [&[(u64, f64)]; 8] = core::array::from_fn(|i| {
            if i < d {
                per[i].list(e >> i & 1 == 1)
            } else {
                &[(0, 1.0)][..]
            }
        });
        if lists[..d].iter().any(|l| l.is_empty()) {
            continue;
        }
        let mut pos = [0usize; 8];
        loop {
            let mut v = 1.0;
            let mut linear = 0u64;
            for i in 0..d {
                let (k, w) = lists[i][pos[i]];
                v *= w;
                linear |= k << (shift * i);
            }
            if v != 0.0 {
                f(Key { orientation: e, linear }, v);
            }
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                pos[i] += 1;
                if pos[i] < lists[i].len() {
                    break;
                }
                pos[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }
}

/// Exactly the level-`j` indices whose basis function is nonzero at `x`.
pub fn active_indices(family: &WaveletFamily, j: u32, x: &[f64]) -> Vec<WaveletIndex> {
    let mut out = Vec::new();
    if x.iter().any(|&t| !(0.0..=1.0).contains(&t)) || x.len() > 8 {
        return out;
    }
    for_each_active(family, j, x, |key, _| out.push(key.to_index(j as i32, x.len())));
    out
}

/// Number of level-`j` daughters on the cube: `(2^D − 1) 2^{Dj}`.
pub fn level_index_count(_family: &WaveletFamily, j: u32, dim: usize) -> u64 {
    ((1u64 << dim) - 1) << (dim as u32 * j)
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > 8 {
        return Err(Error::InvalidParameter(format!("dimension {dim} outside 1..=8")));
    }
    Ok(())
}
