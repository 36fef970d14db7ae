use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// A list of points in `[0,1]^D`, stored row-major.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        PointSet { dim, coords: Vec::new() }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        PointSet { dim, coords: Vec::with_capacity(dim * n) }
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(invalid("coordinate count is not a multiple of the dimension"));
        }
        Ok(PointSet { dim, coords })
    }

    /// One-dimensional points.
    pub fn from_1d(xs: &[f64]) -> Self {
        PointSet { dim: 1, coords: xs.to_vec() }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut p = PointSet::with_capacity(dim, rows.len());
        for r in rows {
            if r.len() != dim {
                return Err(invalid("row length differs from the dimension"));
            }
            p.push(r);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
    }

    pub fn extend(&mut self, other: &PointSet) {
        self.coords.extend_from_slice(&other.coords);
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    /// Values of one coordinate across all points.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.iter().map(|p| p[i]).collect()
    }

    /// Checks that every coordinate lies in `[0, 1]`.
    pub fn check_domain(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, p) in self.iter().enumerate() {
            if p.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
                return Err(Error::OutOfDomain { index: i });
            }
        }
        Ok(())
    }
}
