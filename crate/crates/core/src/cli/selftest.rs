//! `selftest`: fast end-to-end sanity checks of the installed binary.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cs_sim::{wavelet_analysis, wavelet_synthesis, FourierOp, WaveletConfig};
use crate::density::PointCloud;
use crate::error::Result;
use crate::kinematics::{check_admissible, Curve, KinematicLimits, NormMode};
use crate::projection::{project_curve, ProjectionOptions};
use crate::reparam::segment_time;
use crate::tour::{solve_tsp, TspOptions};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn projection_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let lim = KinematicLimits::new(1.0, 0.05, NormMode::RotationInvariant)?;
    let pts: Vec<[f64; 2]> = (0..128).map(|_| [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)]).collect();
    let c = Curve::from_points(&pts, 1.0)?;
    let (p, diag) = project_curve(&c, &lim, &ProjectionOptions::default())?;
    let rep = check_admissible(&p, &lim, 1e-6);
    Ok(Check {
        name: "projection feasibility",
        passed: rep.admissible,
        detail: format!(
            "speed ratio {:.3e}, accel ratio {:.3e}, {} iterations",
            rep.max_speed_ratio, rep.max_accel_ratio, diag.iterations
        ),
    })
}

fn fourier_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let dims = [32usize, 48];
    let op = FourierOp::new(&dims)?;
    let x = random_complex(rng, op.len());
    let mut y = x.clone();
    op.forward(&mut y);
    let energy = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let parseval = (energy(&y) / energy(&x) - 1.0).abs();
    op.inverse(&mut y);
    let e = rel_err(&y, &x);
    Ok(Check {
        name: "fourier unitarity",
        passed: e < 1e-10 && parseval < 1e-10,
        detail: format!("round trip {e:.2e}, Parseval {parseval:.2e}"),
    })
}

fn wavelet_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let dims = [64usize, 64];
    let cfg = WaveletConfig::default();
    let x = random_complex(rng, 64 * 64);
    let w = wavelet_analysis(&x, &dims, &cfg)?;
    let back = wavelet_synthesis(&w, &dims, &cfg)?;
    let e = rel_err(&back, &x);
    Ok(Check {
        name: "wavelet round trip",
        passed: e < 1e-10,
        detail: format!("{e:.2e}"),
    })
}

fn segment_check() -> Result<Check> {
    let lim = KinematicLimits::new(2.0, 1.0, NormMode::RotationInvariant)?;
    // α²/β = 4: a length-1 move is triangular (2 s), a length-8 move trapezoidal (6 s).
    let a = segment_time(1.0, &lim)?.duration;
    let b = segment_time(8.0, &lim)?.duration;
    Ok(Check {
        name: "segment timing",
        passed: (a - 2.0).abs() < 1e-12 && (b - 6.0).abs() < 1e-12,
        detail: format!("{a} s, {b} s"),
    })
}

fn tsp_check() -> Result<Check> {
    // Corners of a unit square listed in crossing order; the open optimum is 3.
    let pc = PointCloud::new(2, vec![0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0], 0)?;
    let tour = solve_tsp(&pc, &TspOptions::default(), 0)?;
    let len = tour.length(&pc);
    Ok(Check {
        name: "tsp square",
        passed: (len - 3.0).abs() < 1e-12,
        detail: format!("length {len}"),
    })
}

pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        projection_check(&mut rng)?,
        fourier_check(&mut rng)?,
        wavelet_check(&mut rng)?,
        segment_check()?,
        tsp_check()?,
    ])
}

/// Prints one line per check; returns whether all passed.
pub fn cmd_selftest(seed: u64) -> Result<bool> {
    let checks = run_selftest(seed)?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}
