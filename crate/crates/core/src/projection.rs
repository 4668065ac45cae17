//! Euclidean projection of a sampled curve onto the set of admissible curves.
//!
//! For a curve `c` with `n` samples the problem is
//!
//! ```text
//! minimize   ½ Σᵢ ‖sᵢ − cᵢ‖² dt
//! subject to ‖sᵢ₊₁ − sᵢ‖ ≤ α dt                (i = 0 … n−2)
//!            ‖sᵢ₊₁ − 2sᵢ + sᵢ₋₁‖ ≤ β dt²         (i = 1 … n−2)
//!            [s₀ = c₀, sₙ₋₁ = cₙ₋₁]             (optional)
//! ```
//!
//! which is the discrete problem measured by [`check_admissible`], with rows
//! multiplied by `dt` and `dt²` so both blocks have O(1) norm. Writing the
//! constraints as `A s ∈ B` (a product of balls), the dual is
//!
//! ```text
//! minimize_q  D(q) = ½‖c − Aᵀq‖² − ½‖c‖² + σ_B(q)
//! ```
//!
//! with `σ_B` the support function of `B`. The smooth part has a gradient
//! `−A(c − Aᵀq)` that is `‖A‖²`-Lipschitz, and the prox of `σ_B` is a radial
//! (ℓ2 balls) or componentwise (boxes) shrinkage. Primal iterates are
//! recovered as `s = c − Aᵀq`.
//!
//! Iterations use FISTA with a monotone restart: a step that would increase
//! `D` is discarded and momentum is reset, so the recorded dual objective
//! never increases. Progress is certified by a duality gap computed on a
//! feasible point obtained by shrinking the primal iterate toward a curve
//! known to be admissible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{check_admissible, Curve, KinematicLimits, NormMode};
use crate::tour::{constant_speed_param, Polyline, SpeedMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionOptions {
    /// Iteration cap; `None` means `max(20·n, 10 000)`.
    pub max_iter: Option<usize>,
    /// Relative duality gap at which iterations stop.
    pub tol_rel: f64,
    pub pin_endpoints: bool,
    /// Evaluate the gap every this many iterations.
    pub check_every: usize,
    /// Record the dual objective at every accepted iteration.
    #[serde(skip)]
    pub record_trace: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            max_iter: None,
            tol_rel: 1e-6,
            pin_endpoints: false,
            check_every: 10,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDiagnostics {
    pub iterations: usize,
    /// Relative duality gap of the returned curve.
    pub final_gap: f64,
    /// ½ Σ ‖sᵢ − cᵢ‖² dt of the returned curve.
    pub objective: f64,
    pub max_speed_ratio: f64,
    pub max_accel_ratio: f64,
    pub converged: bool,
    pub restarts: usize,
    pub lipschitz: f64,
    /// Dual objective after each accepted step, when requested.
    #[serde(skip)]
    pub dual_trace: Vec<f64>,
    /// Dual variables of the returned iterate (speed rows, accel rows, pins).
    #[serde(skip)]
    pub dual: Vec<f64>,
}

/// Stacked first/second difference operator plus optional endpoint rows.
#[derive(Clone, Copy, Debug)]
pub struct ConstraintOperator {
    pub n: usize,
    pub d: usize,
    pub pinned: bool,
}

impl ConstraintOperator {
    pub fn speed_rows(&self) -> usize {
        self.n - 1
    }

    pub fn accel_rows(&self) -> usize {
        self.n - 2
    }

    pub fn accel_offset(&self) -> usize {
        self.speed_rows() * self.d
    }

    pub fn pin_offset(&self) -> usize {
        (self.speed_rows() + self.accel_rows()) * self.d
    }

    pub fn dual_len(&self) -> usize {
        self.pin_offset() + if self.pinned { 2 * self.d } else { 0 }
    }

    /// `out = A s`.
    pub fn apply(&self, s: &[f64], out: &mut [f64]) {
        let (n, d) = (self.n, self.d);
        for j in 0..(n - 1) * d {
            out[j] = s[j + d] - s[j];
        }
        let off = self.accel_offset();
        for j in d..(n - 1) * d {
            out[off + j - d] = s[j + d] - 2.0 * s[j] + s[j - d];
        }
        if self.pinned {
            let p = self.pin_offset();
            out[p..p + d].copy_from_slice(&s[..d]);
            out[p + d..p + 2 * d].copy_from_slice(&s[(n - 1) * d..]);
        }
    }

    /// `out = Aᵀ q`.
    pub fn apply_t(&self, q: &[f64], out: &mut [f64]) {
        let (n, d) = (self.n, self.d);
        out.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..(n - 1) * d {
            out[j + d] += q[j];
            out[j] -= q[j];
        }
        let off = self.accel_offset();
        for j in d..(n - 1) * d {
            let v = q[off + j - d];
            out[j + d] += v;
            out[j] -= 2.0 * v;
            out[j - d] += v;
        }
        if self.pinned {
            let p = self.pin_offset();
            for k in 0..d {
                out[k] += q[p + k];
                out[(n - 1) * d + k] += q[p + d + k];
            }
        }
    }

    /// Power-iteration estimate of `‖A‖²`, computed on one coordinate (the
    /// operator acts identically on every axis).
    pub fn norm_squared(&self, iters: usize, tol: f64) -> f64 {
        let scalar = ConstraintOperator { d: 1, ..*self };
        let n = self.n;
        // deterministic start with energy at every frequency
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let h = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11;
                (h as f64 / (1u64 << 53) as f64) - 0.5 + if i % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        let mut ax = vec![0.0; scalar.dual_len()];
        let mut y = vec![0.0; n];
        let mut est = 0.0;
        for it in 0..iters.max(20) {
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            scalar.apply(&x, &mut ax);
            scalar.apply_t(&ax, &mut y);
            let new = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            std::mem::swap(&mut x, &mut y);
            if it >= 20 && (new - est).abs() <= tol * new {
                est = new;
                break;
            }
            est = new;
        }
        est
    }
}

/// Constraint radii and pin targets.
struct Balls<'a> {
    op: ConstraintOperator,
    mode: NormMode,
    speed_radius: f64,
    accel_radius: f64,
    pins: Option<(&'a [f64], &'a [f64])>,
}

impl Balls<'_> {
    /// `q ← prox_{τσ}(q)`, in place.
    fn prox(&self, q: &mut [f64], tau: f64) {
        let d = self.op.d;
        let shrink = |rows: &mut [f64], r: f64| match self.mode {
            NormMode::RotationInvariant => {
                for v in rows.chunks_exact_mut(d) {
                    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let keep = if nv > tau * r { 1.0 - tau * r / nv } else { 0.0 };
                    v.iter_mut().for_each(|x| *x *= keep);
                }
            }
            NormMode::RotationVariant => {
                for x in rows.iter_mut() {
                    *x = x.signum() * (x.abs() - tau * r).max(0.0);
                }
            }
        };
        let a = self.op.accel_offset();
        let p = self.op.pin_offset();
        shrink(&mut q[..a], self.speed_radius);
        shrink(&mut q[a..p], self.accel_radius);
        if let Some((c0, c1)) = self.pins {
            for k in 0..d {
                q[p + k] -= tau * c0[k];
                q[p + d + k] -= tau * c1[k];
            }
        }
    }

    /// Support function `σ_B(q)`.
    fn support(&self, q: &[f64]) -> f64 {
        let d = self.op.d;
        let dual_norm = |rows: &[f64]| -> f64 {
            match self.mode {
                NormMode::RotationInvariant => rows
                    .chunks_exact(d)
                    .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
                    .sum(),
                NormMode::RotationVariant => rows.iter().map(|x| x.abs()).sum(),
            }
        };
        let a = self.op.accel_offset();
        let p = self.op.pin_offset();
        let mut s = self.speed_radius * dual_norm(&q[..a]) + self.accel_radius * dual_norm(&q[a..p]);
        if let Some((c0, c1)) = self.pins {
            for k in 0..d {
                s += q[p + k] * c0[k] + q[p + d + k] * c1[k];
            }
        }
        s
    }
}

/// Worst speed and acceleration ratios of flat positions against the radii.
fn ratios(pos: &[f64], d: usize, mode: NormMode, r1: f64, r2: f64) -> (f64, f64) {
    let n = pos.len() / d;
    let mut v = vec![0.0; d];
    let mut speed = 0.0f64;
    for i in 0..n - 1 {
        for k in 0..d {
            v[k] = pos[(i + 1) * d + k] - pos[i * d + k];
        }
        speed = speed.max(mode.norm(&v));
    }
    let mut accel = 0.0f64;
    for i in 1..n - 1 {
        for k in 0..d {
            v[k] = pos[(i + 1) * d + k] - 2.0 * pos[i * d + k] + pos[(i - 1) * d + k];
        }
        accel = accel.max(mode.norm(&v));
    }
    (speed / r1, accel / r2)
}

const POLISH_MARGIN: f64 = 1e-12;
/// Floor on the default iteration cap; short curves need more than `20·n`.
const MIN_DEFAULT_ITER: usize = 10_000;

/// Moves `s` toward an admissible reference until it is admissible.
///
/// Free endpoints use the constant curve at the centroid of `s`; pinned
/// endpoints use the constant-speed segment from `c₀` to `cₙ₋₁`. Ratios of a
/// blend `z + λ(s − z)` are bounded by `(1−λ)·ρ(z) + λ·ρ(s)` per sample.
fn polish(s: &[f64], c: &[f64], balls: &Balls) -> Vec<f64> {
    let d = balls.op.d;
    let n = balls.op.n;
    let mut s = s.to_vec();
    let reference: Vec<f64> = if balls.pins.is_some() {
        s[..d].copy_from_slice(&c[..d]);
        s[(n - 1) * d..].copy_from_slice(&c[(n - 1) * d..]);
        (0..n)
            .flat_map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (0..d).map(move |k| c[k] + t * (c[(n - 1) * d + k] - c[k]))
            })
            .collect()
    } else {
        let mut mean = vec![0.0; d];
        for p in s.chunks_exact(d) {
            for k in 0..d {
                mean[k] += p[k] / n as f64;
            }
        }
        mean.iter().copied().cycle().take(n * d).collect()
    };
    let (rs1, rs2) = ratios(&s, d, balls.mode, balls.speed_radius, balls.accel_radius);
    let (rz1, _) = ratios(&reference, d, balls.mode, balls.speed_radius, balls.accel_radius);
    let target = 1.0 - POLISH_MARGIN;
    let mut lambda = 1.0f64;
    if rs1 > target {
        lambda = lambda.min((target - rz1).max(0.0) / (rs1 - rz1));
    }
    if rs2 > target {
        lambda = lambda.min(target / rs2);
    }
    if lambda < 1.0 {
        for (x, z) in s.iter_mut().zip(&reference) {
            *x = z + lambda * (*x - z);
        }
    }
    s
}

fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

/// Projects `c` onto the admissible set for `lim`.
///
/// The result keeps the sample count and time step of `c`. When the gap
/// target is not met within the iteration cap, the best admissible iterate is
/// returned with `converged = false`.
pub fn project_curve(
    c: &Curve,
    lim: &KinematicLimits,
    opts: &ProjectionOptions,
) -> Result<(Curve, ProjectionDiagnostics)> {
    if !(opts.tol_rel > 0.0) {
        return Err(Error::InvalidArgument("tol_rel must be positive".into()));
    }
    if opts.max_iter == Some(0) || opts.check_every == 0 {
        return Err(Error::InvalidArgument("max_iter and check_every must be ≥ 1".into()));
    }
    let n = c.len();
    let d = c.dim();
    let dt = c.dt();
    let cflat = c.as_flat();
    let mode = lim.norm_mode;
    let op = ConstraintOperator {
        n,
        d,
        pinned: opts.pin_endpoints,
    };
    let balls = Balls {
        op,
        mode,
        speed_radius: lim.alpha * dt,
        accel_radius: lim.beta * dt * dt,
        pins: opts
            .pin_endpoints
            .then(|| (&cflat[..d], &cflat[(n - 1) * d..])),
    };
    if opts.pin_endpoints {
        let gap: Vec<f64> = (0..d).map(|k| cflat[(n - 1) * d + k] - cflat[k]).collect();
        if mode.norm(&gap) > lim.alpha * c.duration() {
            return Err(Error::Infeasible(format!(
                "endpoints are {:e} m⁻¹ apart but at most {:e} m⁻¹ can be covered in {:e} s",
                mode.norm(&gap),
                lim.alpha * c.duration(),
                c.duration()
            )));
        }
    }

    let report = check_admissible(c, lim, 0.0);
    let mut diag = ProjectionDiagnostics {
        max_speed_ratio: report.max_speed_ratio,
        max_accel_ratio: report.max_accel_ratio,
        ..Default::default()
    };
    if report.max_speed_ratio <= 1.0 + POLISH_MARGIN && report.max_accel_ratio <= 1.0 + POLISH_MARGIN {
        diag.converged = true;
        diag.dual = vec![0.0; op.dual_len()];
        return Ok((c.clone(), diag));
    }

    let max_iter = opts.max_iter.unwrap_or((20 * n).max(MIN_DEFAULT_ITER));
    let lip = op.norm_squared(50, 1e-6) * 1.01;
    let tau = 1.0 / lip;
    diag.lipschitz = lip;

    let m = op.dual_len();
    let mut q = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut s_q = cflat.to_vec();
    let mut s_y = cflat.to_vec();
    let mut s_new = vec![0.0; n * d];
    let mut grad = vec![0.0; m];
    let mut q_new = vec![0.0; m];
    let dual_obj = |q: &[f64], s: &[f64]| -> f64 {
        0.5 * s.iter().zip(cflat).map(|(a, b)| (a - b) * (a + b)).sum::<f64>() + balls.support(q)
    };
    let mut d_q = dual_obj(&q, &s_q);
    // D is a difference of terms of size ‖c‖²; changes below this are rounding.
    let d_noise = 8.0 * f64::EPSILON * cflat.iter().map(|x| x * x).sum::<f64>();
    let mut theta = 1.0f64;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, f64)> = None; // (primal, s, q, gap)
    let mut iterations = 0;

    let evaluate = |q: &[f64], s_q: &[f64], d_q: f64, best: &mut Option<(f64, Vec<f64>, Vec<f64>, f64)>| -> f64 {
        let feasible = polish(s_q, cflat, &balls);
        let primal = half_sq_dist(&feasible, cflat);
        let gap = (primal + d_q).max(0.0);
        let scale = primal.max(1e-300);
        let rel = gap / scale;
        if best.as_ref().map_or(true, |b| primal < b.0) {
            *best = Some((primal, feasible, q.to_vec(), rel));
        }
        rel
    };

    let mut converged = false;
    for it in 1..=max_iter {
        iterations = it;
        op.apply(&s_y, &mut grad);
        for j in 0..m {
            q_new[j] = y[j] + tau * grad[j];
        }
        balls.prox(&mut q_new, tau);
        op.apply_t(&q_new, &mut s_new);
        for j in 0..n * d {
            s_new[j] = cflat[j] - s_new[j];
        }
        let d_new = dual_obj(&q_new, &s_new);
        if d_new > d_q + d_noise {
            // discard and restart momentum from the last accepted point
            diag.restarts += 1;
            theta = 1.0;
            y.copy_from_slice(&q);
            s_y.copy_from_slice(&s_q);
        } else {
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let mom = (theta - 1.0) / theta_next;
            for j in 0..m {
                y[j] = q_new[j] + mom * (q_new[j] - q[j]);
            }
            for j in 0..n * d {
                s_y[j] = s_new[j] + mom * (s_new[j] - s_q[j]);
            }
            std::mem::swap(&mut q, &mut q_new);
            std::mem::swap(&mut s_q, &mut s_new);
            d_q = d_new;
            theta = theta_next;
            if opts.record_trace {
                diag.dual_trace.push(d_q);
            }
        }
        if it % opts.check_every == 0 || it == max_iter {
            let rel = evaluate(&q, &s_q, d_q, &mut best);
            if rel <= opts.tol_rel {
                converged = true;
                break;
            }
        }
    }

    let (_, s_best, q_best, gap) = best.expect("at least one gap evaluation");
    let out = Curve::new(d, dt, s_best)?;
    let report = check_admissible(&out, lim, 0.0);
    diag.iterations = iterations;
    diag.final_gap = gap;
    diag.objective = half_sq_dist(out.as_flat(), cflat) * dt;
    diag.max_speed_ratio = report.max_speed_ratio;
    diag.max_accel_ratio = report.max_accel_ratio;
    diag.converged = converged;
    diag.dual = q_best;
    if !converged {
        log::warn!(
            "projection stopped after {iterations} iterations at relative gap {gap:e} (target {:e})",
            opts.tol_rel
        );
    }
    Ok((out, diag))
}

/// How long the constant-speed input curve should take.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationChoice {
    /// Fixed traversal time, s.
    Fixed(f64),
    /// Constant speed equal to this fraction of α.
    SpeedFraction(f64),
}

/// Constant-speed parameterization of `poly` followed by [`project_curve`].
pub fn project_polyline_pipeline(
    poly: &Polyline,
    lim: &KinematicLimits,
    choice: DurationChoice,
    dt: f64,
    opts: &ProjectionOptions,
) -> Result<(Curve, ProjectionDiagnostics)> {
    let mode = match choice {
        DurationChoice::Fixed(t) => SpeedMode::FixedDuration(t),
        DurationChoice::SpeedFraction(f) if f > 0.0 => SpeedMode::FixedSpeed(f * lim.alpha),
        DurationChoice::SpeedFraction(f) => {
            return Err(Error::InvalidArgument(format!("speed fraction must be positive, got {f}")))
        }
    };
    let input = constant_speed_param(poly, mode, dt)?;
    project_curve(&input, lim, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lim(mode: NormMode) -> KinematicLimits {
        KinematicLimits::new(1.0, 1.0, mode).unwrap()
    }

    #[test]
    fn adjoint_identity() {
        for pinned in [false, true] {
            let op = ConstraintOperator { n: 9, d: 2, pinned };
            let s: Vec<f64> = (0..18).map(|i| ((i * 7 % 5) as f64) - 1.3).collect();
            let q: Vec<f64> = (0..op.dual_len()).map(|i| ((i * 3 % 7) as f64) * 0.5 - 1.0).collect();
            let mut as_ = vec![0.0; op.dual_len()];
            let mut atq = vec![0.0; 18];
            op.apply(&s, &mut as_);
            op.apply_t(&q, &mut atq);
            let lhs: f64 = as_.iter().zip(&q).map(|(a, b)| a * b).sum();
            let rhs: f64 = s.iter().zip(&atq).map(|(a, b)| a * b).sum();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn operator_norm_estimate() {
        // ‖D1‖² → 4 and ‖D2‖² → 16 with aligned top singular vectors: ‖A‖² → 20.
        let op = ConstraintOperator { n: 400, d: 1, pinned: false };
        let l = op.norm_squared(500, 1e-10);
        assert!(l <= 20.0 + 1e-9 && l > 19.0, "{l}");
    }

    #[test]
    fn admissible_input_is_returned() {
        let c = Curve::from_points(&[[0.0, 0.0], [0.5, 0.0], [1.0, 0.1], [1.4, 0.3]], 1.0).unwrap();
        let (p, diag) = project_curve(&c, &lim(NormMode::RotationInvariant), &Default::default()).unwrap();
        assert_eq!(p, c);
        assert_eq!(diag.iterations, 0);
        assert!(diag.converged);
    }

    #[test]
    fn fast_line_slows_to_alpha_about_midpoint() {
        // Constant speed 2α, free endpoints: the optimum is the line at speed α
        // through the same midpoint.
        let n = 21;
        let pts: Vec<[f64; 1]> = (0..n).map(|i| [2.0 * i as f64]).collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let lim = KinematicLimits::new(1.0, 10.0, NormMode::RotationInvariant).unwrap();
        // The 1e-12 polish margin sets a floor of about 1e-12 on the gap.
        let opts = ProjectionOptions { tol_rel: 1e-10, max_iter: Some(100_000), ..Default::default() };
        let (p, diag) = project_curve(&c, &lim, &opts).unwrap();
        assert!(diag.converged, "{diag:?}");
        let mid = 20.0;
        for (i, x) in p.points().enumerate() {
            let expect = mid + (i as f64 - 10.0);
            assert!((x[0] - expect).abs() < 1e-5, "{i}: {} vs {expect}", x[0]);
        }
    }

    #[test]
    fn feasibility_after_projection() {
        for mode in [NormMode::RotationInvariant, NormMode::RotationVariant] {
            let pts: Vec<[f64; 2]> = (0..40)
                .map(|i| {
                    let t = i as f64;
                    [3.0 * (t * 0.7).sin() + t, 2.0 * (t * 1.3).cos()]
                })
                .collect();
            let c = Curve::from_points(&pts, 1.0).unwrap();
            let (p, diag) = project_curve(&c, &lim(mode), &Default::default()).unwrap();
            assert!(diag.max_speed_ratio <= 1.0 + 1e-9);
            assert!(diag.max_accel_ratio <= 1.0 + 1e-9);
            assert_eq!(p.len(), c.len());
            assert_eq!(p.dt(), c.dt());
            assert!(diag.converged, "{mode:?} {diag:?}");
        }
    }

    #[test]
    fn dual_objective_is_monotone() {
        let pts: Vec<[f64; 2]> = (0..60).map(|i| [(i % 7) as f64 * 2.0, (i % 3) as f64]).collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let opts = ProjectionOptions { record_trace: true, ..Default::default() };
        let (_, diag) = project_curve(&c, &lim(NormMode::RotationInvariant), &opts).unwrap();
        assert!(diag.dual_trace.len() > 10);
        for w in diag.dual_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15 * w[0].abs());
        }
    }

    #[test]
    fn pinned_endpoints() {
        let pts: Vec<[f64; 2]> = (0..30).map(|i| [i as f64 * 0.5, ((i * 5) % 4) as f64]).collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let opts = ProjectionOptions { pin_endpoints: true, ..Default::default() };
        let (p, diag) = project_curve(&c, &lim(NormMode::RotationInvariant), &opts).unwrap();
        assert_eq!(p.point(0), c.point(0));
        assert_eq!(p.point(29), c.point(29));
        assert!(diag.max_speed_ratio <= 1.0 + 1e-9 && diag.max_accel_ratio <= 1.0 + 1e-9);

        let far: Vec<[f64; 2]> = (0..5).map(|i| [i as f64 * 3.0, 0.0]).collect();
        let c = Curve::from_points(&far, 1.0).unwrap();
        assert!(matches!(
            project_curve(&c, &lim(NormMode::RotationInvariant), &opts),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let pts: Vec<[f64; 2]> = (0..200).map(|i| [(i % 9) as f64 * 5.0, (i % 4) as f64 * 3.0]).collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let opts = ProjectionOptions { max_iter: Some(3), check_every: 1, ..Default::default() };
        let (p, diag) = project_curve(&c, &lim(NormMode::RotationInvariant), &opts).unwrap();
        assert!(!diag.converged);
        assert_eq!(diag.iterations, 3);
        assert!(check_admissible(&p, &lim(NormMode::RotationInvariant), 1e-9).admissible);
    }
}
