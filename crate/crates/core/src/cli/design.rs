//! `design`: density → points → tour → parameterization → projection → mask.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Config, DurationConfig, Parameterization, Scheme, Target, TspScheme};
use crate::cs_sim::{acceleration_factor, empirical_density, radial_w2, rasterize_mask, SamplingMask};
use crate::density::{center_mask, draw_points, radial_density, DensityGrid, PointCloud, RNG_NAME};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io;
use crate::kinematics::{check_admissible, to_gradients, Curve, GradientWaveform, KinematicLimits};
use crate::projection::{project_curve, ProjectionDiagnostics};
use crate::reparam::{polyline_time, time_optimal_polyline, time_optimal_smooth, EndpointSpeed, ReparamReport, SmoothOptions};
use crate::tour::{constant_speed_param, solve_tsp, tour_to_polyline, Polyline, SpeedMode, Tour};
use crate::trajectories::{epi_rows, epi_trajectory, spiral_target_density, vd_spiral, EpiRegion};

/// Summary written to `descriptor.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub scheme: String,
    #[serde(rename = "T_s")]
    pub t_s: f64,
    /// Time-optimal duration of the same support, when defined.
    #[serde(rename = "T_OC_s")]
    pub t_oc_s: Option<f64>,
    pub r: f64,
    pub m: usize,
    pub n_samples: usize,
    pub n_cities: Option<usize>,
    /// Radial W2 between the mask's empirical density and the target density, m⁻¹.
    pub radial_w2: f64,
    pub max_speed_ratio: f64,
    pub max_accel_ratio: f64,
    pub seed: u64,
    pub rng: String,
    pub projection: Option<ProjectionDiagnostics>,
    pub reparam: Option<ReparamReport>,
    pub config: Config,
}

#[derive(Clone, Debug)]
pub struct DesignOutput {
    pub curve: Curve,
    pub waveform: GradientWaveform,
    pub mask: SamplingMask,
    pub target: DensityGrid,
    pub points: Option<PointCloud>,
    pub tour: Option<Tour>,
    pub polyline: Option<Polyline>,
    pub descriptor: Descriptor,
}

impl DesignOutput {
    /// `true` when an iterative stage stopped before its tolerance.
    pub fn non_converged(&self) -> bool {
        self.descriptor.projection.as_ref().is_some_and(|p| !p.converged)
    }
}

struct TspRun {
    curve: Curve,
    mask: SamplingMask,
    points: PointCloud,
    tour: Tour,
    polyline: Polyline,
    t_oc: f64,
    projection: Option<ProjectionDiagnostics>,
    reparam: Option<ReparamReport>,
}

/// Removes repeated points (cell-centre draws collide), keeping first occurrences.
fn unique_points(pc: &PointCloud) -> Result<PointCloud> {
    let mut seen = std::collections::HashSet::new();
    let mut pts = Vec::with_capacity(pc.points.len());
    for p in pc.iter() {
        let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
        if seen.insert(key) {
            pts.extend_from_slice(p);
        }
    }
    PointCloud::new(pc.dim, pts, pc.seed)
}

fn base_mask(grid: &Grid, cfg: &Config) -> Result<SamplingMask> {
    match &cfg.center {
        Some(c) => center_mask(grid, c.radius_frac),
        None => Ok(SamplingMask::empty(grid.dims().to_vec())),
    }
}

fn run_tsp(cfg: &Config, t: &TspScheme, n_cities: usize, grid: &Grid, lim: &KinematicLimits, target: &DensityGrid) -> Result<TspRun> {
    let drawn = draw_points(target, n_cities, t.draw_exponent, cfg.seed, t.jitter)?;
    let mut points = unique_points(&drawn)?;
    let mut opts = t.tsp.clone();
    if t.start_at_center {
        let origin = vec![0.0; grid.ndim()];
        let keep: Vec<f64> = points.iter().filter(|p| p.iter().any(|&x| x != 0.0)).flatten().copied().collect();
        points = PointCloud::new(grid.ndim(), keep, cfg.seed)?.with_first(&origin);
        opts.start = Some(0);
    }
    if points.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two distinct cities were drawn".into()));
    }
    let tour = solve_tsp(&points, &opts, cfg.seed)?;
    let polyline = tour_to_polyline(&points, &tour)?;
    let t_oc = polyline_time(&polyline, lim)?;
    let (curve, projection, reparam) = match t.parameterization {
        Parameterization::TimeOptimal => {
            let (c, rep) = time_optimal_polyline(&polyline, lim, cfg.dt_s)?;
            (c, None, Some(rep))
        }
        Parameterization::ConstantSpeed => {
            let mode = match t.duration {
                DurationConfig::SpeedFraction(f) => SpeedMode::FixedSpeed(f * lim.alpha),
                DurationConfig::FixedS(s) => SpeedMode::FixedDuration(s),
                DurationConfig::MatchTimeOptimal => SpeedMode::FixedDuration(t_oc),
            };
            let c = constant_speed_param(&polyline, mode, cfg.dt_s)?;
            if t.project {
                let (p, diag) = project_curve(&c, lim, &t.projection)?;
                (p, Some(diag), None)
            } else {
                (c, None, None)
            }
        }
    };
    let mut mask = base_mask(grid, cfg)?;
    mask.union_with(&rasterize_mask(&curve, grid)?)?;
    Ok(TspRun { curve, mask, points, tour, polyline, t_oc, projection, reparam })
}

/// Safeguarded secant search on the city count toward `goal`, in log-log
/// coordinates, with at most eight design runs. `r` is assumed to decrease and
/// `T` to increase with the count; the closest run is kept.
fn search_cities(
    cfg: &Config,
    t: &TspScheme,
    goal: Target,
    grid: &Grid,
    lim: &KinematicLimits,
    target: &DensityGrid,
) -> Result<TspRun> {
    let (want, sign, slope0) = match goal {
        Target::R(r) => (r, -1.0, -1.0),
        Target::TimeS(s) => (s, 1.0, 0.5),
    };
    let value = |run: &TspRun| -> Result<f64> {
        Ok(match goal {
            Target::R(_) => acceleration_factor(&run.mask)?,
            Target::TimeS(_) => run.curve.duration(),
        })
    };
    // bracket in ln(n): (ln n, g) with g = ln(value / want)
    let mut below: Option<(f64, f64)> = None; // g·sign < 0: too few cities
    let mut above: Option<(f64, f64)> = None;
    let mut last: Option<(f64, f64)> = None;
    let max_n = grid.len().max(4) as f64;
    let mut n = t.n_cities.clamp(2, max_n as usize);
    let mut tried = std::collections::BTreeSet::new();
    let mut best: Option<(f64, TspRun)> = None;
    for _ in 0..8 {
        tried.insert(n);
        let run = run_tsp(cfg, t, n, grid, lim, target)?;
        let g = (value(&run)? / want).ln();
        let x = (n as f64).ln();
        if best.as_ref().map_or(true, |(e, _)| g.abs() < *e) {
            best = Some((g.abs(), run));
        }
        if g.abs() <= 0.01f64.ln_1p() {
            break;
        }
        if g * sign < 0.0 {
            below = Some((x, g));
        } else {
            above = Some((x, g));
        }
        let mut next = match (below, above) {
            (Some((x0, g0)), Some((x1, g1))) if g1 != g0 => x0 - g0 * (x1 - x0) / (g1 - g0),
            _ => {
                let slope = match last {
                    Some((xp, gp)) if xp != x && (g - gp) / (x - xp) * sign > 0.0 => (g - gp) / (x - xp),
                    _ => slope0,
                };
                x - g / slope
            }
        };
        // stay strictly inside the bracket
        let lo = below.map_or(2f64.ln(), |b| b.0);
        let hi = above.map_or(max_n.ln(), |a| a.0);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        last = Some((x, g));
        let cand = (next.exp().round() as usize).clamp(2, max_n as usize);
        if tried.contains(&cand) {
            break;
        }
        n = cand;
    }
    let (err, run) = best.expect("at least one design run");
    if err > 0.05f64.ln_1p() {
        log::warn!(
            "target {want} not reached within 5%: best run gives {} with {} cities",
            value(&run)?,
            run.points.len()
        );
    }
    Ok(run)
}

pub fn run_design(cfg: &Config) -> Result<DesignOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let lim = cfg.limits()?;
    let (curve, mask, target, points, tour, polyline, t_oc, projection, reparam) = match &cfg.scheme {
        Scheme::Tsp(t) => {
            let target = radial_density(&grid, t.density.exponent, t.density.center_radius_frac)?;
            let run = match t.target {
                Some(goal) => search_cities(cfg, t, goal, &grid, &lim, &target)?,
                None => run_tsp(cfg, t, t.n_cities, &grid, &lim, &target)?,
            };
            let t_oc = match t.parameterization {
                Parameterization::TimeOptimal => run.reparam.as_ref().map_or(run.t_oc, |r| r.t_oc_s),
                Parameterization::ConstantSpeed => run.t_oc,
            };
            (run.curve, run.mask, target, Some(run.points), Some(run.tour), Some(run.polyline), Some(t_oc), run.projection, run.reparam)
        }
        Scheme::Epi(e) => {
            let (curve, rep) = epi_trajectory(&grid, &lim, cfg.dt_s, e.region)?;
            let mut mask = base_mask(&grid, cfg)?;
            mask.union_with(&rasterize_mask(&curve, &grid)?)?;
            let weights = match e.region {
                EpiRegion::Full => vec![1.0; grid.len()],
                EpiRegion::CenterFrac(_) => {
                    let rows = epi_rows(&grid, e.region)?;
                    (0..grid.len()).map(|f| if rows.contains(&grid.unflatten(f)[0]) { 1.0 } else { 0.0 }).collect()
                }
            };
            let target = DensityGrid::from_weights(grid.clone(), weights)?;
            let t_oc = rep.t_oc_s;
            (curve, mask, target, None, None, None, Some(t_oc), None, Some(rep))
        }
        Scheme::Spiral(s) => {
            let (curve, diag) = vd_spiral(&grid, s.q, &lim, cfg.dt_s, &s.spiral)?;
            let mut mask = base_mask(&grid, cfg)?;
            mask.union_with(&rasterize_mask(&curve, &grid)?)?;
            let target = spiral_target_density(&grid, s.q, &s.spiral)?;
            let smooth = SmoothOptions { ds: None, endpoints: EndpointSpeed::Rest, dt: cfg.dt_s };
            let t_oc = time_optimal_smooth(&curve, &lim, &smooth).ok().map(|(_, r)| r.duration_s);
            (curve, mask, target, None, None, None, t_oc, Some(diag), None)
        }
    };
    let report = check_admissible(&curve, &lim, 0.0);
    let r = acceleration_factor(&mask)?;
    let w2 = radial_w2(&empirical_density(&mask, &grid)?, &target)?;
    let t_s = match (&cfg.scheme, &reparam) {
        (Scheme::Epi(_), Some(rep)) => rep.t_oc_s,
        (Scheme::Tsp(t), Some(rep)) if t.parameterization == Parameterization::TimeOptimal => rep.t_oc_s,
        _ => curve.duration(),
    };
    let descriptor = Descriptor {
        scheme: cfg.scheme.name(),
        t_s,
        t_oc_s: t_oc,
        r,
        m: mask.count(),
        n_samples: curve.len(),
        n_cities: points.as_ref().map(|p| p.len()),
        radial_w2: w2,
        max_speed_ratio: report.max_speed_ratio,
        max_accel_ratio: report.max_accel_ratio,
        seed: cfg.seed,
        rng: RNG_NAME.into(),
        projection,
        reparam,
        config: cfg.clone(),
    };
    let waveform = to_gradients(&curve, &cfg.hardware);
    Ok(DesignOutput { curve, waveform, mask, target, points, tour, polyline, descriptor })
}

pub const CURVE_FILE: &str = "curve.csv";
pub const WAVEFORM_FILE: &str = "waveform.csv";
pub const MASK_PBM_FILE: &str = "mask.pbm";
pub const MASK_RLE_FILE: &str = "mask.rle.json";
pub const DESCRIPTOR_FILE: &str = "descriptor.json";
pub const CONFIG_FILE: &str = "config.json";

pub fn write_bundle(out: &Path, d: &DesignOutput) -> Result<()> {
    std::fs::create_dir_all(out)?;
    io::write_curve_csv(&out.join(CURVE_FILE), &d.curve)?;
    io::write_waveform_csv(&out.join(WAVEFORM_FILE), &d.waveform)?;
    if d.mask.dims().len() == 2 {
        io::write_mask_pbm(&out.join(MASK_PBM_FILE), &d.mask)?;
    }
    io::write_mask_rle(&out.join(MASK_RLE_FILE), &d.mask)?;
    if let Some(p) = &d.points {
        io::write_points_csv(&out.join("points.csv"), p)?;
    }
    if let Some(t) = &d.tour {
        io::write_tour_json(&out.join("tour.json"), t)?;
    }
    io::write_density(&out.join("target_density.f64"), &d.target)?;
    io::write_json(&out.join(DESCRIPTOR_FILE), &d.descriptor)?;
    std::fs::write(out.join(CONFIG_FILE), d.descriptor.config.to_json()? + "\n")?;
    Ok(())
}

/// Reads the mask of a bundle (run-length file, falling back to PBM).
pub fn read_bundle_mask(dir: &Path) -> Result<SamplingMask> {
    let rle = dir.join(MASK_RLE_FILE);
    if rle.exists() {
        io::read_mask_rle(&rle)
    } else {
        io::read_mask_pbm(&dir.join(MASK_PBM_FILE))
    }
}

pub fn cmd_design(cfg: &Config, out: &Path) -> Result<DesignOutput> {
    let d = run_design(cfg)?;
    write_bundle(out, &d)?;
    log::info!(
        "{}: T = {:.3} ms, r = {:.3}, m = {}",
        d.descriptor.scheme,
        d.descriptor.t_s * 1e3,
        d.descriptor.r,
        d.descriptor.m
    );
    Ok(d)
}
