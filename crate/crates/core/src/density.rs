//! Target sampling densities on a Cartesian k-space grid and i.i.d. drawing.
//!
//! Points are drawn by inverse-CDF lookup over the flattened grid: the
//! cumulative mass is built in flat (row-major) order and a uniform variate in
//! `[0, total)` is located by binary search. The generator is ChaCha8 seeded
//! from a 64-bit seed, so a seed fixes the cloud bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cs_sim::SamplingMask;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Name of the generator recorded in bundle descriptors.
pub const RNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

/// Nonnegative mass per grid cell, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityGrid {
    /// Normalizes `weights` into a density. Negative or non-finite weights are rejected.
    pub fn from_weights(grid: Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} weights for a grid of {} cells",
                weights.len(),
                grid.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::DegenerateDensity(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateDensity("all-zero mass".into()));
        }
        // Already a density up to summation rounding: keep it bit for bit.
        if (total - 1.0).abs() <= 4.0 * f64::EPSILON * weights.len() as f64 {
            return Ok(DensityGrid { grid, values: weights });
        }
        let mut values: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        // Pin the residual rounding on the largest cell so the sum is 1 to ~1 ulp.
        let resid = 1.0 - values.iter().sum::<f64>();
        if let Some(m) = values
            .iter_mut()
            .max_by(|a, b| a.partial_cmp(b).unwrap())
        {
            *m += resid;
        }
        Ok(DensityGrid { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `π^p`, renormalized.
    pub fn powf(&self, p: f64) -> Result<Self> {
        if p == 1.0 {
            return Ok(self.clone());
        }
        DensityGrid::from_weights(
            self.grid.clone(),
            self.values.iter().map(|v| if *v > 0.0 { v.powf(p) } else { 0.0 }).collect(),
        )
    }

    /// Total-variation distance `½ Σ |p − q|`.
    pub fn tv_distance(&self, other: &DensityGrid) -> Result<f64> {
        if self.grid.dims() != other.grid.dims() {
            return Err(Error::Shape("density grids differ".into()));
        }
        Ok(0.5
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

/// `π(k) ∝ 1 / max(|k|, r₀)^q` with `r₀ = center_radius_frac · k_max`.
///
/// When `r₀` is zero and `q > 0` the DC cell is clamped at half a cell width.
pub fn radial_density(grid: &Grid, exponent: f64, center_radius_frac: f64) -> Result<DensityGrid> {
    if !(exponent >= 0.0) || !exponent.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "density exponent must be ≥ 0, got {exponent}"
        )));
    }
    if !(0.0..1.0).contains(&center_radius_frac) {
        return Err(Error::InvalidArgument(format!(
            "center_radius_frac must be in [0, 1), got {center_radius_frac}"
        )));
    }
    let mut r0 = center_radius_frac * grid.k_max();
    if r0 == 0.0 {
        r0 = 0.5 * grid.min_cell_size();
    }
    let weights = grid
        .radii()
        .into_iter()
        .map(|r| r.max(r0).powf(-exponent))
        .collect();
    DensityGrid::from_weights(grid.clone(), weights)
}

/// Exponent applied to π before drawing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawExponent {
    /// `(d − 1) / d` for a d-dimensional grid.
    #[default]
    DimensionRatio,
    /// Draw from π itself.
    Identity,
    /// `d / (d − 1)`: a shortest tour through the drawn points then has
    /// length density close to π.
    TourCorrected,
}

impl DrawExponent {
    pub fn value(self, ndim: usize) -> f64 {
        match self {
            DrawExponent::DimensionRatio => (ndim as f64 - 1.0) / ndim as f64,
            DrawExponent::Identity => 1.0,
            DrawExponent::TourCorrected => ndim as f64 / (ndim as f64 - 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    /// Flattened `n × dim`, m⁻¹.
    pub points: Vec<f64>,
    pub seed: u64,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::Shape("point buffer does not match dimension".into()));
        }
        Ok(PointCloud { dim, points, seed })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Copy with `p` inserted as the first point.
    pub fn with_first(&self, p: &[f64]) -> PointCloud {
        let mut points = Vec::with_capacity(self.points.len() + self.dim);
        points.extend_from_slice(p);
        points.extend_from_slice(&self.points);
        PointCloud {
            dim: self.dim,
            points,
            seed: self.seed,
        }
    }
}

/// Draws `n_points` i.i.d. from `π^p` (p from `exponent`).
///
/// Points sit at cell centres, or uniformly inside the cell when `jitter` is set.
pub fn draw_points(
    density: &DensityGrid,
    n_points: usize,
    exponent: DrawExponent,
    seed: u64,
    jitter: bool,
) -> Result<PointCloud> {
    if n_points == 0 {
        return Err(Error::InvalidArgument("n_points must be ≥ 1".into()));
    }
    let grid = density.grid();
    let target = density.powf(exponent.value(grid.ndim()))?;
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for v in target.values() {
        acc += v;
        cdf.push(acc);
    }
    let total = acc;
    let ndim = grid.ndim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_points * ndim);
    for _ in 0..n_points {
        let u = rng.random::<f64>() * total;
        let cell = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let idx = grid.unflatten(cell);
        for (a, &i) in idx.iter().enumerate() {
            let mut k = grid.cell_center(a, i);
            if jitter {
                k += (rng.random::<f64>() - 0.5) * grid.cell_size(a);
            }
            points.push(k);
        }
    }
    PointCloud::new(ndim, points, seed)
}

/// Cells with `|k| ≤ center_radius_frac · k_max`.
pub fn center_mask(grid: &Grid, center_radius_frac: f64) -> Result<SamplingMask> {
    if !(center_radius_frac > 0.0 && center_radius_frac < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "center_radius_frac must be in (0, 1), got {center_radius_frac}"
        )));
    }
    let r0 = center_radius_frac * grid.k_max();
    let flags = grid.radii().into_iter().map(|r| r <= r0).collect();
    SamplingMask::new(grid.dims().to_vec(), flags)
}
