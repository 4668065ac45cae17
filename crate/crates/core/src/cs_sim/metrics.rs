//! Image quality and sampling-density metrics.

use super::mask::SamplingMask;
use super::ImageVolume;
use crate::density::{DensityGrid, PointCloud};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinematics::Curve;

/// `20 log10(peak / √MSE)` with `peak = max |reference|`.
///
/// Identical images give `f64::INFINITY`.
pub fn psnr(reference: &ImageVolume, test: &ImageVolume) -> Result<f64> {
    if reference.dims() != test.dims() {
        return Err(Error::Shape(format!(
            "reference {:?} and test {:?} differ",
            reference.dims(),
            test.dims()
        )));
    }
    let mse = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / reference.len() as f64;
    let peak = reference.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (peak / mse.sqrt()).log10())
}

/// Uniform density over the measured cells.
pub fn empirical_density(mask: &SamplingMask, grid: &Grid) -> Result<DensityGrid> {
    if mask.dims() != grid.dims() {
        return Err(Error::Shape("mask and grid dims differ".into()));
    }
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let w = mask.flags().iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    DensityGrid::from_weights(grid.clone(), w)
}

/// Normalized histogram of points over the grid; points outside are ignored.
pub fn point_density(pc: &PointCloud, grid: &Grid) -> Result<DensityGrid> {
    let mut w = vec![0.0; grid.len()];
    for p in pc.iter() {
        if let Some(f) = grid.locate(p) {
            w[f] += 1.0;
        }
    }
    DensityGrid::from_weights(grid.clone(), w).map_err(|_| Error::InvalidArgument("no point falls on the grid".into()))
}

/// Time spent per cell by a curve: samples binned with equal weight.
pub fn curve_density(c: &Curve, grid: &Grid) -> Result<DensityGrid> {
    if c.dim() != grid.ndim() {
        return Err(Error::Shape("curve and grid dimensions differ".into()));
    }
    let mut w = vec![0.0; grid.len()];
    for p in c.points() {
        if let Some(f) = grid.locate(p) {
            w[f] += 1.0;
        }
    }
    DensityGrid::from_weights(grid.clone(), w).map_err(|_| Error::InvalidArgument("curve never visits the grid".into()))
}

/// Radial marginal of a density: `(|k|, mass)` atoms sorted by radius.
pub fn radial_atoms(p: &DensityGrid) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = p
        .grid()
        .radii()
        .into_iter()
        .zip(p.values().iter().copied())
        .filter(|a| a.1 > 0.0)
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

/// 1-D Wasserstein-2 distance between two discrete measures on the line,
/// each given as atoms sorted by position. Computed exactly by sweeping the
/// two quantile functions.
pub fn w2_sorted_atoms(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a.first().map_or(0.0, |x| x.1), b.first().map_or(0.0, |x| x.1));
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        let t = ra.min(rb);
        let dx = a[i].0 - b[j].0;
        acc += t * dx * dx;
        ra -= t;
        rb -= t;
        if ra <= 0.0 {
            i += 1;
            ra = a.get(i).map_or(0.0, |x| x.1);
        }
        if rb <= 0.0 {
            j += 1;
            rb = b.get(j).map_or(0.0, |x| x.1);
        }
    }
    acc.sqrt()
}

/// W2 distance between the radial marginals of two densities on the same grid.
pub fn radial_w2(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    if p.grid().dims() != q.grid().dims() || p.grid().fov_k() != q.grid().fov_k() {
        return Err(Error::Shape("densities live on different grids".into()));
    }
    Ok(w2_sorted_atoms(&radial_atoms(p), &radial_atoms(q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn psnr_formula_and_sentinel() {
        let r = ImageVolume::from_real(vec![10, 10], {
            let mut v = vec![0.0; 100];
            v[0] = 1.0;
            v
        })
        .unwrap();
        assert_eq!(psnr(&r, &r).unwrap(), f64::INFINITY);
        // MSE 1e-4 from a uniform 0.01 offset
        let t = ImageVolume::new(
            vec![10, 10],
            r.data().iter().map(|v| v + Complex64::new(0.01, 0.0)).collect(),
        )
        .unwrap();
        assert!((psnr(&r, &t).unwrap() - 40.0).abs() < 1e-9);
    }

    #[test]
    fn point_masses() {
        let g = Grid::isotropic(8, 2, 8.0).unwrap();
        let mut a = vec![0.0; 64];
        a[g.flatten(&[4, 5])] = 1.0; // r = 1
        let mut b = vec![0.0; 64];
        b[g.flatten(&[4, 7])] = 1.0; // r = 3
        let p = DensityGrid::from_weights(g.clone(), a).unwrap();
        let q = DensityGrid::from_weights(g, b).unwrap();
        assert!((radial_w2(&p, &q).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(radial_w2(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn split_mass_transport() {
        // ½δ0 + ½δ2 vs δ1: every unit of mass moves by 1
        let a = [(0.0, 0.5), (2.0, 0.5)];
        let b = [(1.0, 1.0)];
        assert!((w2_sorted_atoms(&a, &b) - 1.0).abs() < 1e-15);
    }
}
