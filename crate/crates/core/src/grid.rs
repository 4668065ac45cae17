//! Cartesian k-space grid geometry.
//!
//! Axis `a` of the grid carries coordinate `a` of k-space positions. Cells are
//! flattened row-major (last axis fastest). The k = 0 cell sits at index
//! `n / 2` on every axis, so even sizes have one more negative frequency than
//! positive ones, matching `fftshift`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<usize>,
    /// Full k-space extent per axis, m⁻¹.
    fov_k: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, fov_k: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::Shape(format!(
                "grid must have 1 to 3 axes, got {}",
                dims.len()
            )));
        }
        if dims.len() != fov_k.len() {
            return Err(Error::Shape(format!(
                "dims has {} axes but fov_k has {}",
                dims.len(),
                fov_k.len()
            )));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::Shape("grid axes must be non-empty".into()));
        }
        if fov_k.iter().any(|&f| !f.is_finite() || f <= 0.0) {
            return Err(Error::InvalidArgument(
                "fov_k must be finite and positive".into(),
            ));
        }
        Ok(Grid { dims, fov_k })
    }

    /// Square/cubic grid with the same extent on every axis.
    pub fn isotropic(n: usize, ndim: usize, fov_k: f64) -> Result<Self> {
        Grid::new(vec![n; ndim], vec![fov_k; ndim])
    }

    /// Grid for an image of `n` pixels per axis at spatial `resolution_m`.
    pub fn from_resolution(dims: Vec<usize>, resolution_m: f64) -> Result<Self> {
        if !(resolution_m > 0.0) {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let fov = vec![1.0 / resolution_m; dims.len()];
        Grid::new(dims, fov)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn fov_k(&self) -> &[f64] {
        &self.fov_k
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of cells N.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size(&self, axis: usize) -> f64 {
        self.fov_k[axis] / self.dims[axis] as f64
    }

    pub fn min_cell_size(&self) -> f64 {
        (0..self.ndim())
            .map(|a| self.cell_size(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn center_index(&self, axis: usize) -> usize {
        self.dims[axis] / 2
    }

    /// Largest radius fully inside the grid along every axis.
    pub fn k_max(&self) -> f64 {
        (0..self.ndim())
            .map(|a| (self.dims[a] / 2) as f64 * self.cell_size(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// k-space coordinate of the centre of cell `i` along `axis`.
    pub fn cell_center(&self, axis: usize, i: usize) -> f64 {
        (i as f64 - self.center_index(axis) as f64) * self.cell_size(axis)
    }

    /// Lower and upper physical bounds covered by the grid on `axis`.
    pub fn extent(&self, axis: usize) -> (f64, f64) {
        let h = self.cell_size(axis);
        let lo = self.cell_center(axis, 0) - 0.5 * h;
        (lo, lo + self.fov_k[axis])
    }

    /// Continuous cell coordinate: cell `i` spans `[i, i + 1)`.
    pub fn to_cell_coord(&self, axis: usize, k: f64) -> f64 {
        k / self.cell_size(axis) + self.center_index(axis) as f64 + 0.5
    }

    pub fn from_cell_coord(&self, axis: usize, u: f64) -> f64 {
        (u - self.center_index(axis) as f64 - 0.5) * self.cell_size(axis)
    }

    /// Cell containing the physical point, or `None` when outside.
    pub fn locate(&self, k: &[f64]) -> Option<usize> {
        let mut flat = 0usize;
        for (a, &n) in self.dims.iter().enumerate() {
            let u = self.to_cell_coord(a, k[a]).floor();
            if !(u >= 0.0 && u < n as f64) {
                return None;
            }
            flat = flat * n + u as usize;
        }
        Some(flat)
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            idx[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
        idx
    }

    /// Physical centre of the cell with flat index `flat`.
    pub fn center_of(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.cell_center(a, i))
            .collect()
    }

    /// |k| at the centre of every cell, in flat order.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len())
            .map(|f| self.center_of(f).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    pub fn contains(&self, k: &[f64]) -> bool {
        k.iter().enumerate().all(|(a, &x)| {
            let (lo, hi) = self.extent(a);
            x >= lo && x <= hi
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_convention() {
        let g = Grid::isotropic(4, 2, 4.0).unwrap();
        assert_eq!(g.center_index(0), 2);
        assert_eq!(g.cell_center(0, 2), 0.0);
        assert_eq!(g.cell_center(0, 0), -2.0);
        assert_eq!(g.extent(0), (-2.5, 1.5));
        assert_eq!(g.k_max(), 2.0);
        assert_eq!(g.locate(&[0.0, 0.0]), Some(2 * 4 + 2));
        assert_eq!(g.locate(&[1.6, 0.0]), None);
    }

    #[test]
    fn flatten_roundtrip() {
        let g = Grid::new(vec![3, 4, 5], vec![1.0, 1.0, 1.0]).unwrap();
        for f in 0..g.len() {
            assert_eq!(g.flatten(&g.unflatten(f)), f);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(vec![], vec![]).is_err());
        assert!(Grid::new(vec![2, 2], vec![1.0]).is_err());
        assert!(Grid::new(vec![2], vec![-1.0]).is_err());
    }
}
