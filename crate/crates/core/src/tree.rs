//! Sparse multilevel coefficient trees.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::wavelet::{check_dim, FamilyKind, Key, WaveletFamily, WaveletIndex};

/// Magnitudes below this are not stored.
pub const PRUNE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Provenance {
    Empirical(u64),
    Exact,
    Estimate,
    Difference,
}

/// Sorted sparse coefficients of one level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Level {
    entries: Vec<(Key, f64)>,
}

impl Level {
    /// Builds from entries sorted by key with no duplicates; prunes tiny values.
    pub(crate) fn from_sorted(entries: Vec<(Key, f64)>) -> Self {
        let mut entries = entries;
        entries.retain(|(_, v)| v.abs() >= PRUNE);
        Level { entries }
    }

    /// Builds from arbitrary entries, summing duplicates in input order.
    pub fn from_entries(mut entries: Vec<(Key, f64)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Key, f64)> = Vec::with_capacity(entries.len());
        for (k, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += v,
                _ => merged.push((k, v)),
            }
        }
        Self::from_sorted(merged)
    }

    pub fn get(&self, key: Key) -> f64 {
        match self.entries.binary_search_by(|e| e.0.cmp(&key)) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Key, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn combine(a: f64, x: &Level, y: &Level) -> Level {
        let mut out = Vec::with_capacity(x.len() + y.len());
        let (mut i, mut k) = (0, 0);
        while i < x.entries.len() || k < y.entries.len() {
            let take_x = k >= y.entries.len() || (i < x.entries.len() && x.entries[i].0 <= y.entries[k].0);
            let take_y = i >= x.entries.len() || (k < y.entries.len() && y.entries[k].0 <= x.entries[i].0);
            let key = if take_x { x.entries[i].0 } else { y.entries[k].0 };
            let mut v = 0.0;
            if take_x {
                v += a * x.entries[i].1;
                i += 1;
            }
            if take_y {
                v += y.entries[k].1;
                k += 1;
            }
            out.push((key, v));
        }
        Level::from_sorted(out)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Level {
        Level::from_sorted(self.entries.iter().map(|&(k, v)| (k, f(v))).collect())
    }

    fn retain(&mut self, f: impl FnMut(&(Key, f64)) -> bool) {
        self.entries.retain(f);
    }
}

/// Coefficients `α` (father) and `β_j` (levels `0..=j_max`) of a function on the cube.
///
/// Absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTree {
    family: FamilyKind,
    dim: usize,
    alpha: Level,
    beta: Vec<Level>,
    provenance: Provenance,
}

impl CoefficientTree {
    /// All-zero tree with levels `0..=j_max`.
    pub fn zero(family: &WaveletFamily, dim: usize, j_max: u32, provenance: Provenance) -> Result<Self> {
        check_dim(dim)?;
        Ok(CoefficientTree {
            family: family.kind(),
            dim,
            alpha: Level::default(),
            beta: (0..=j_max).map(|_| Level::default()).collect(),
            provenance,
        })
    }

    pub(crate) fn from_parts(
        family: FamilyKind,
        dim: usize,
        alpha: f64,
        beta: Vec<Level>,
        provenance: Provenance,
    ) -> Self {
        CoefficientTree {
            family,
            dim,
            alpha: Level::from_sorted(alpha_entries(alpha)),
            beta,
            provenance,
        }
    }

    /// Builds a tree from explicit entries; rejects non-finite values and invalid indices.
    pub fn from_entries(
        family: FamilyKind,
        dim: usize,
        j_max: u32,
        provenance: Provenance,
        entries: impl IntoIterator<Item = (WaveletIndex, f64)>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let mut alpha = Vec::new();
        let mut levels: Vec<Vec<(Key, f64)>> = (0..=j_max).map(|_| Vec::new()).collect();
        for (idx, v) in entries {
            idx.validate(dim)?;
            if !v.is_finite() {
                return Err(invalid("tree values must be finite"));
            }
            if idx.level < 0 {
                alpha.push((idx.key(), v));
            } else if idx.level as u32 > j_max {
                return Err(invalid("entry above j_max"));
            } else {
                levels[idx.level as usize].push((idx.key(), v));
            }
        }
        Ok(CoefficientTree {
            family,
            dim,
            alpha: Level::from_entries(alpha),
            beta: levels.into_iter().map(Level::from_entries).collect(),
            provenance,
        })
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn j_max(&self) -> u32 {
        self.beta.len() as u32 - 1
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// The single father coefficient on the cube.
    pub fn alpha(&self) -> f64 {
        self.alpha.get(Key { orientation: 0, linear: 0 })
    }

    pub fn alpha_level(&self) -> &Level {
        &self.alpha
    }

    pub fn level(&self, j: u32) -> Option<&Level> {
        self.beta.get(j as usize)
    }

    pub fn levels(&self) -> &[Level] {
        &self.beta
    }

    pub fn get(&self, idx: &WaveletIndex) -> f64 {
        if idx.level < 0 {
            return self.alpha.get(idx.key());
        }
        self.beta.get(idx.level as usize).map_or(0.0, |l| l.get(idx.key()))
    }

    /// Number of stored coefficients.
    pub fn nnz(&self) -> usize {
        self.alpha.len() + self.beta.iter().map(Level::len).sum::<usize>()
    }

    /// `(index, value)` pairs in storage order (father first, then by level).
    pub fn entries(&self) -> impl Iterator<Item = (WaveletIndex, f64)> + '_ {
        let d = self.dim;
        self.alpha
            .iter()
            .map(move |(k, v)| (k.to_index(-1, d), v))
            .chain(
                self.beta
                    .iter()
                    .enumerate()
                    .flat_map(move |(j, l)| l.iter().map(move |(k, v)| (k.to_index(j as i32, d), v))),
            )
    }

    pub fn compatible(&self, other: &CoefficientTree) -> Result<()> {
        if self.family != other.family {
            return Err(Error::IncompatibleTrees("wavelet families differ"));
        }
        if self.dim != other.dim {
            return Err(Error::IncompatibleTrees("dimensions differ"));
        }
        Ok(())
    }

    /// Entrywise `a·self + other`, over the larger of the two level ranges.
    pub fn axpy(&self, a: f64, other: &CoefficientTree) -> Result<CoefficientTree> {
        tree_axpy(a, self, other)
    }

    pub fn scale(&self, a: f64) -> CoefficientTree {
        CoefficientTree {
            family: self.family,
            dim: self.dim,
            alpha: self.alpha.map(|v| a * v),
            beta: self.beta.iter().map(|l| l.map(|v| a * v)).collect(),
            provenance: self.provenance,
        }
    }

    /// Drops levels above `j_max` or pads empty levels up to it.
    pub fn truncate(&self, j_max: u32) -> CoefficientTree {
        let mut beta: Vec<Level> = self.beta.iter().take(j_max as usize + 1).cloned().collect();
        while beta.len() < j_max as usize + 1 {
            beta.push(Level::default());
        }
        CoefficientTree { beta, ..self.clone() }
    }

    /// Removes coefficients at levels in `(from, to]` for which `keep` is false.
    pub(crate) fn filter_levels(&mut self, from: u32, to: u32, mut keep: impl FnMut(u32, f64) -> bool) {
        for (j, level) in self.beta.iter_mut().enumerate() {
            let j = j as u32;
            if j > from && j <= to {
                level.retain(|&(_, v)| keep(j, v));
            }
        }
    }

    /// `Σ` products of matching coefficients.
    pub fn inner(&self, other: &CoefficientTree) -> Result<f64> {
        self.compatible(other)?;
        let dot = |x: &Level, y: &Level| -> f64 {
            let mut s = 0.0;
            let (mut i, mut k) = (0, 0);
            while i < x.entries.len() && k < y.entries.len() {
                match x.entries[i].0.cmp(&y.entries[k].0) {
                    core::cmp::Ordering::Less => i += 1,
                    core::cmp::Ordering::Greater => k += 1,
                    core::cmp::Ordering::Equal => {
                        s += x.entries[i].1 * y.entries[k].1;
                        i += 1;
                        k += 1;
                    }
                }
            }
            s
        };
        let mut s = dot(&self.alpha, &other.alpha);
        for (a, b) in self.beta.iter().zip(other.beta.iter()) {
            s += dot(a, b);
        }
        Ok(s)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &CoefficientTree) -> Result<f64> {
        let d = tree_axpy(-1.0, other, self)?;
        Ok(d.entries().fold(0.0, |m, (_, v)| m.max(v.abs())))
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }
}

fn alpha_entries(alpha: f64) -> Vec<(Key, f64)> {
    Vec::from([(Key { orientation: 0, linear: 0 }, alpha)])
}

/// `a·t1 + t2` with provenance `Difference`.
pub fn tree_axpy(a: f64, t1: &CoefficientTree, t2: &CoefficientTree) -> Result<CoefficientTree> {
    t1.compatible(t2)?;
    if !a.is_finite() {
        return Err(invalid("axpy scale must be finite"));
    }
    let n = t1.beta.len().max(t2.beta.len());
    let empty = Level::default();
    let beta = (0..n)
        .map(|j| Level::combine(a, t1.beta.get(j).unwrap_or(&empty), t2.beta.get(j).unwrap_or(&empty)))
        .collect();
    Ok(CoefficientTree {
        family: t1.family,
        dim: t1.dim,
        alpha: Level::combine(a, &t1.alpha, &t2.alpha),
        beta,
        provenance: Provenance::Difference,
    })
}
