//! Analytic reference trajectories: EPI rasters and variable-density spirals.

use serde::{Deserialize, Serialize};

use crate::density::{radial_density, DensityGrid};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinematics::{Curve, KinematicLimits};
use crate::projection::{project_curve, ProjectionDiagnostics, ProjectionOptions};
use crate::reparam::{time_optimal_polyline, ReparamReport};
use crate::tour::{constant_speed_param, Polyline, SpeedMode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpiRegion {
    Full,
    /// `round(frac · rows)` rows around the k-space centre.
    CenterFrac(f64),
}

/// Rows (indices along axis 0) covered by `region`.
pub fn epi_rows(grid: &Grid, region: EpiRegion) -> Result<std::ops::Range<usize>> {
    let n = grid.dims()[0];
    match region {
        EpiRegion::Full => Ok(0..n),
        EpiRegion::CenterFrac(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("center fraction must be in (0, 1], got {f}")));
            }
            let count = ((f * n as f64).round() as usize).clamp(1, n);
            let start = grid.center_index(0).saturating_sub(count / 2).min(n - count);
            Ok(start..start + count)
        }
    }
}

/// Serpentine raster: readouts along axis 1 through the cell centres of each
/// selected row, joined by one-row blips. Every readout and blip is a
/// time-optimal rest-to-rest move.
pub fn epi_trajectory(
    grid: &Grid,
    lim: &KinematicLimits,
    dt: f64,
    region: EpiRegion,
) -> Result<(Curve, ReparamReport)> {
    if grid.ndim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "EPI needs a 2-D grid, got {} axes",
            grid.ndim()
        )));
    }
    let cols = grid.dims()[1];
    if cols < 2 {
        return Err(Error::InvalidArgument("EPI readouts need at least two columns".into()));
    }
    let first = grid.cell_center(1, 0);
    let last = grid.cell_center(1, cols - 1);
    let mut v = Vec::new();
    for (i, row) in epi_rows(grid, region)?.enumerate() {
        let ky = grid.cell_center(0, row);
        let (a, b) = if i % 2 == 0 { (first, last) } else { (last, first) };
        v.extend_from_slice(&[ky, a, ky, b]);
    }
    let poly = Polyline::new(2, v)?;
    time_optimal_polyline(&poly, lim, dt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralOptions {
    /// Turn spacing at `k_max`, in cells.
    pub edge_pitch_cells: f64,
    /// Lower bound on the turn spacing, in cells.
    pub min_pitch_cells: f64,
    /// Constant traversal speed as a fraction of α before projection.
    pub speed_fraction: f64,
    pub projection: ProjectionOptions,
}

impl Default for SpiralOptions {
    fn default() -> Self {
        SpiralOptions {
            edge_pitch_cells: 8.0,
            min_pitch_cells: 1.0,
            speed_fraction: 1.0,
            projection: ProjectionOptions::default(),
        }
    }
}

impl SpiralOptions {
    /// Radius below which the pitch is clamped, as a fraction of `k_max`.
    pub fn clamp_frac(&self, q: f64) -> f64 {
        if q == 0.0 || self.min_pitch_cells >= self.edge_pitch_cells {
            return 0.0;
        }
        (self.min_pitch_cells / self.edge_pitch_cells).powf(1.0 / q)
    }
}

/// Support of the spiral as a fine polyline from the centre to `k_max`.
///
/// At constant speed the time spent per unit area is inversely proportional
/// to the spacing between turns `p(r) = 2π dr/dθ`, so a radial density
/// `∝ r^−q` needs `dr/dθ ∝ r^q`; `q = 0` gives an Archimedean spiral. The
/// spacing is `edge_pitch · (r / k_max)^q`, floored at `min_pitch`.
pub fn spiral_support(grid: &Grid, q: f64, opts: &SpiralOptions) -> Result<Polyline> {
    if grid.ndim() != 2 {
        return Err(Error::InvalidArgument("spiral needs a 2-D grid".into()));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("density exponent must be ≥ 0, got {q}")));
    }
    if !(opts.edge_pitch_cells > 0.0 && opts.min_pitch_cells > 0.0) {
        return Err(Error::InvalidArgument("spiral pitches must be positive".into()));
    }
    let cell = grid.min_cell_size();
    let k_max = grid.k_max();
    let r_end = k_max - 0.5 * cell;
    let pitch = |r: f64| -> f64 {
        (opts.edge_pitch_cells * (r / k_max).powf(q)).max(opts.min_pitch_cells) * cell
    };
    let drdt = |r: f64| pitch(r) / (2.0 * std::f64::consts::PI);
    let step_len = 0.25 * cell;
    let mut pts = vec![0.0, 0.0];
    let (mut r, mut theta) = (0.0f64, 0.0f64);
    while r < r_end {
        // arc-length step ≤ step_len, RK2 in θ
        let h = step_len / (r * r + drdt(r).powi(2)).sqrt().max(1e-300);
        let h = h.min(0.5);
        let k1 = drdt(r);
        let k2 = drdt(r + h * k1);
        r = (r + 0.5 * h * (k1 + k2)).min(r_end);
        theta += h;
        pts.push(r * theta.cos());
        pts.push(r * theta.sin());
    }
    Polyline::new(2, pts)
}

/// Radial target density matching [`spiral_support`].
pub fn spiral_target_density(grid: &Grid, q: f64, opts: &SpiralOptions) -> Result<DensityGrid> {
    radial_density(grid, q, opts.clamp_frac(q))
}

/// Variable-density spiral at constant speed, projected onto the admissible set.
pub fn vd_spiral(
    grid: &Grid,
    q: f64,
    lim: &KinematicLimits,
    dt: f64,
    opts: &SpiralOptions,
) -> Result<(Curve, ProjectionDiagnostics)> {
    if !(opts.speed_fraction > 0.0) {
        return Err(Error::InvalidArgument("speed fraction must be positive".into()));
    }
    let support = spiral_support(grid, q, opts)?;
    let c = constant_speed_param(&support, SpeedMode::FixedSpeed(opts.speed_fraction * lim.alpha), dt)?;
    project_curve(&c, lim, &opts.projection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cs_sim::rasterize_mask;
    use crate::kinematics::{check_admissible, NormMode};

    fn limits() -> KinematicLimits {
        KinematicLimits::new(4.2576e7, 2.256528e11, NormMode::RotationInvariant).unwrap()
    }

    #[test]
    fn small_epi_covers_grid() {
        let g = Grid::isotropic(4, 2, 4.0 * 43.4).unwrap();
        let (c, rep) = epi_trajectory(&g, &limits(), 1e-6, EpiRegion::Full).unwrap();
        assert_eq!(rep.n_segments, 7); // 4 readouts, 3 blips
        let m = rasterize_mask(&c, &g).unwrap();
        assert_eq!(m.count(), 16);
        assert!(check_admissible(&c, &limits(), 1e-9).admissible);
    }

    #[test]
    fn center_rows() {
        let g = Grid::isotropic(64, 2, 64.0 * 43.4).unwrap();
        let rows = epi_rows(&g, EpiRegion::CenterFrac(0.25)).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.contains(&32));
        let (c, _) = epi_trajectory(&g, &limits(), 1e-5, EpiRegion::CenterFrac(0.25)).unwrap();
        let m = rasterize_mask(&c, &g).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(m.get(g.flatten(&[i, j])), rows.contains(&i), "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn spiral_radius_is_monotone() {
        let g = Grid::isotropic(64, 2, 64.0).unwrap();
        for q in [0.0, 1.0, 2.0] {
            let p = spiral_support(&g, q, &SpiralOptions::default()).unwrap();
            let mut prev = -1.0;
            for v in p.vertices() {
                let r = v[0].hypot(v[1]);
                assert!(r >= prev - 1e-12);
                prev = r;
            }
            assert!((prev - 31.5).abs() < 1e-9);
        }
    }

    #[test]
    fn archimedean_pitch_is_constant() {
        let g = Grid::isotropic(64, 2, 64.0).unwrap();
        let opts = SpiralOptions { edge_pitch_cells: 2.0, ..Default::default() };
        let p = spiral_support(&g, 0.0, &opts).unwrap();
        // radius grows by one pitch per turn: r = 2θ/(2π)
        for v in p.vertices().skip(1).step_by(97) {
            let r = v[0].hypot(v[1]);
            let ang = v[1].atan2(v[0]).rem_euclid(2.0 * std::f64::consts::PI);
            let turns = (r / 2.0 - ang / (2.0 * std::f64::consts::PI)).round();
            let expect = 2.0 * (turns + ang / (2.0 * std::f64::consts::PI));
            assert!((r - expect).abs() < 1e-6, "{r} vs {expect}");
        }
    }
}
