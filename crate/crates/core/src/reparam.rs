//! Time-optimal traversal of a fixed support under speed/acceleration limits.
//!
//! On a polyline, direction changes instantaneously at every vertex, so any
//! finite-acceleration traversal must stop there. Each segment is then an
//! independent rest-to-rest move of a double integrator whose optimum is
//! bang-bang: accelerate at β, cruise at α if the segment is long enough,
//! decelerate at β. Smooth supports use the usual two-pass velocity profile
//! over arc length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{dist, Curve, KinematicLimits};
use crate::tour::{ArcLengthCursor, Polyline};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Triangular,
    Trapezoidal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentTiming {
    pub length: f64,
    pub duration: f64,
    pub profile: ProfileKind,
    pub peak_speed: f64,
    alpha: f64,
    beta: f64,
}

impl SegmentTiming {
    /// Distance travelled `t` seconds after leaving the start vertex.
    pub fn distance_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration);
        let ramp = self.peak_speed / self.beta;
        let half = 0.5 * self.beta;
        if t <= ramp {
            half * t * t
        } else if t <= self.duration - ramp {
            half * ramp * ramp + self.peak_speed * (t - ramp)
        } else {
            let r = self.duration - t;
            self.length - half * r * r
        }
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration);
        (self.beta * t).min(self.alpha).min(self.beta * (self.duration - t)).min(self.peak_speed)
    }
}

/// Minimum rest-to-rest traversal time of a straight segment of length `length`.
pub fn segment_time(length: f64, lim: &KinematicLimits) -> Result<SegmentTiming> {
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "segment length must be finite and ≥ 0, got {length}"
        )));
    }
    let (a, b) = (lim.alpha, lim.beta);
    let (duration, profile, peak) = if length >= a * a / b {
        (length / a + a / b, ProfileKind::Trapezoidal, a)
    } else {
        let t = 2.0 * (length / b).sqrt();
        (t, ProfileKind::Triangular, (length * b).sqrt())
    };
    Ok(SegmentTiming {
        length,
        duration,
        profile,
        peak_speed: peak,
        alpha: a,
        beta: b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReparamReport {
    #[serde(rename = "T_OC_s")]
    pub t_oc_s: f64,
    pub n_segments: usize,
    pub triangular: usize,
    pub trapezoidal: usize,
    pub dt_s: f64,
}

/// Concatenated rest-to-rest bang-bang profiles, sampled every `dt`.
///
/// Samples past `T_OC` (at most one step) hold the final vertex. If `dt` is
/// longer than the shortest segment traversal it is halved until it is not.
pub fn time_optimal_polyline(
    poly: &Polyline,
    lim: &KinematicLimits,
    dt: f64,
) -> Result<(Curve, ReparamReport)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let timings: Vec<SegmentTiming> = poly
        .segment_lengths()
        .into_iter()
        .map(|l| segment_time(l, lim))
        .collect::<Result<_>>()?;
    let t_oc: f64 = timings.iter().map(|s| s.duration).sum();
    let shortest = timings.iter().map(|s| s.duration).fold(f64::INFINITY, f64::min);
    let mut dt = dt;
    let mut halvings = 0;
    while dt > shortest && halvings < 30 {
        dt *= 0.5;
        halvings += 1;
    }
    if halvings > 0 {
        log::warn!(
            "time step refined {halvings} time(s) to {dt:e} s (shortest segment takes {shortest:e} s)"
        );
    }
    let steps = ((t_oc / dt).ceil() as usize).max(2);
    let d = poly.dim();
    let mut pos = vec![0.0; (steps + 1) * d];
    let mut seg = 0usize;
    let mut seg_start = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        while seg + 1 < timings.len() && t >= seg_start + timings[seg].duration {
            seg_start += timings[seg].duration;
            seg += 1;
        }
        let timing = &timings[seg];
        let a = poly.vertex(seg);
        let b = poly.vertex(seg + 1);
        let frac = if timing.length > 0.0 {
            timing.distance_at(t - seg_start) / timing.length
        } else {
            0.0
        };
        for c in 0..d {
            pos[k * d + c] = a[c] + frac * (b[c] - a[c]);
        }
    }
    let report = ReparamReport {
        t_oc_s: t_oc,
        n_segments: timings.len(),
        triangular: timings.iter().filter(|s| s.profile == ProfileKind::Triangular).count(),
        trapezoidal: timings.iter().filter(|s| s.profile == ProfileKind::Trapezoidal).count(),
        dt_s: dt,
    };
    Ok((Curve::new(d, dt, pos)?, report))
}

/// Total `T_OC` of a polyline without sampling it.
pub fn polyline_time(poly: &Polyline, lim: &KinematicLimits) -> Result<f64> {
    poly.segment_lengths()
        .into_iter()
        .map(|l| segment_time(l, lim).map(|s| s.duration))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointSpeed {
    /// Start and finish at rest.
    Rest,
    /// Endpoint speeds limited only by the kinematic bounds.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothOptions {
    /// Arc-length step; `None` uses the smallest radius of curvature (or the
    /// length, for straight supports) divided by 16.
    pub ds: Option<f64>,
    pub endpoints: EndpointSpeed,
    /// Largest output sampling step, s; the step used divides the duration exactly.
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothReport {
    pub duration_s: f64,
    pub ds: f64,
    pub n_steps: usize,
}

const MAX_PROFILE_STEPS: usize = 4_000_000;

/// Curvature from the circumcircle of three points.
fn circumcurvature(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = dist(a, b);
    let bc = dist(b, c);
    let ca = dist(c, a);
    // |(b − a) × (c − a)| in any dimension via Lagrange's identity
    let mut uu = 0.0;
    let mut vv = 0.0;
    let mut uv = 0.0;
    for k in 0..a.len() {
        let u = b[k] - a[k];
        let v = c[k] - a[k];
        uu += u * u;
        vv += v * v;
        uv += u * v;
    }
    let cross = (uu * vv - uv * uv).max(0.0).sqrt();
    let denom = ab * bc * ca;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * cross / denom
    }
}

/// Time-optimal traversal of the support of `c` (treated as a polyline
/// through its samples) with velocity `v(s) ≤ min(α, √(β/κ(s)))` and a
/// tangential acceleration budget `√(β² − (κv²)²)`.
///
/// Positions are interpolated linearly along the support, so the sampled
/// acceleration is only close to the profile's when `α·dt` spans several
/// support samples.
pub fn time_optimal_smooth(
    c: &Curve,
    lim: &KinematicLimits,
    opts: &SmoothOptions,
) -> Result<(Curve, SmoothReport)> {
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    for i in 1..c.len() {
        if c.point(i) == c.point(i - 1) {
            return Err(Error::InvalidArgument(format!(
                "repeated point at sample {i}: curvature is undefined"
            )));
        }
    }
    let support = Polyline::new(c.dim(), c.as_flat().to_vec())?;
    let cum = support.cumulative_lengths();
    let total = *cum.last().unwrap();
    let nv = support.len();

    // curvature at support vertices, one-sided at the ends
    let mut kappa_v = vec![0.0; nv];
    for i in 1..nv - 1 {
        kappa_v[i] = circumcurvature(support.vertex(i - 1), support.vertex(i), support.vertex(i + 1));
    }
    if nv > 2 {
        kappa_v[0] = kappa_v[1];
        kappa_v[nv - 1] = kappa_v[nv - 2];
    }
    if kappa_v.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidArgument("curvature is not finite".into()));
    }
    let kappa_max = kappa_v.iter().copied().fold(0.0, f64::max);
    let ds_target = match opts.ds {
        Some(ds) if ds > 0.0 => ds,
        Some(ds) => return Err(Error::InvalidArgument(format!("ds must be positive, got {ds}"))),
        None => {
            let feature = if kappa_max > 0.0 { (1.0 / kappa_max).min(total) } else { total };
            feature / 16.0
        }
    };
    let mut steps = (total / ds_target).ceil().max(1.0) as usize;
    if steps > MAX_PROFILE_STEPS {
        log::warn!("velocity profile capped at {MAX_PROFILE_STEPS} arc-length steps");
        steps = MAX_PROFILE_STEPS;
    }
    let ds = total / steps as f64;

    // κ interpolated linearly in arc length
    let mut kappa = vec![0.0; steps + 1];
    let mut seg = 0usize;
    for (i, k) in kappa.iter_mut().enumerate() {
        let s = total * i as f64 / steps as f64;
        while seg + 2 < nv && s > cum[seg + 1] {
            seg += 1;
        }
        let t = ((s - cum[seg]) / (cum[seg + 1] - cum[seg])).clamp(0.0, 1.0);
        *k = kappa_v[seg] + t * (kappa_v[seg + 1] - kappa_v[seg]);
    }

    let (alpha, beta) = (lim.alpha, lim.beta);
    let mut v: Vec<f64> = kappa
        .iter()
        .map(|&k| if k > 0.0 { alpha.min((beta / k).sqrt()) } else { alpha })
        .collect();
    if opts.endpoints == EndpointSpeed::Rest {
        v[0] = 0.0;
        v[steps] = 0.0;
    }
    let tangential = |k: f64, vi: f64| {
        let normal = k * vi * vi;
        (beta * beta - normal * normal).max(0.0).sqrt()
    };
    for i in 0..steps {
        let reach = (v[i] * v[i] + 2.0 * tangential(kappa[i], v[i]) * ds).sqrt();
        if v[i + 1] > reach {
            v[i + 1] = reach;
        }
    }
    for i in (0..steps).rev() {
        let reach = (v[i + 1] * v[i + 1] + 2.0 * tangential(kappa[i + 1], v[i + 1]) * ds).sqrt();
        if v[i] > reach {
            v[i] = reach;
        }
    }

    // time stamps of the arc-length nodes; v² is linear in s on each step
    let mut t = vec![0.0; steps + 1];
    for i in 0..steps {
        let vs = v[i] + v[i + 1];
        if vs <= 0.0 {
            return Err(Error::InvalidArgument("velocity profile stalls".into()));
        }
        t[i + 1] = t[i] + 2.0 * ds / vs;
    }
    let duration = t[steps];

    // Shrink dt slightly so the last sample lands on the end of the support;
    // holding the final point would be an instantaneous stop.
    let n_out = ((duration / opts.dt).ceil() as usize).max(2);
    let dt_out = duration / n_out as f64;
    let d = c.dim();
    let mut pos = vec![0.0; (n_out + 1) * d];
    let mut cursor = ArcLengthCursor::new(&support);
    let mut i = 0usize;
    for k in 0..=n_out {
        let tk = (k as f64 * dt_out).min(duration);
        while i + 1 < steps && tk > t[i + 1] {
            i += 1;
        }
        let tau = tk - t[i];
        let accel = (v[i + 1] * v[i + 1] - v[i] * v[i]) / (2.0 * ds);
        let s = (total * i as f64 / steps as f64 + v[i] * tau + 0.5 * accel * tau * tau)
            .clamp(0.0, total);
        cursor.at(s, &mut pos[k * d..(k + 1) * d]);
    }
    Ok((
        Curve::new(d, dt_out, pos)?,
        SmoothReport {
            duration_s: duration,
            ds,
            n_steps: steps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{check_admissible, finite_diff_speed, NormMode};
    use approx::assert_relative_eq;

    fn lim() -> KinematicLimits {
        KinematicLimits::new(2.0, 4.0, NormMode::RotationInvariant).unwrap()
    }

    #[test]
    fn segment_time_examples() {
        let l = lim();
        let sat = l.saturation_length();
        assert_eq!(segment_time(0.0, &l).unwrap().duration, 0.0);
        let at = segment_time(sat, &l).unwrap();
        assert_relative_eq!(at.duration, 2.0 * l.alpha / l.beta, max_relative = 1e-14);
        assert_relative_eq!(2.0 * (sat / l.beta).sqrt(), at.duration, max_relative = 1e-14);
        let two = segment_time(2.0 * sat, &l).unwrap();
        assert_eq!(two.profile, ProfileKind::Trapezoidal);
        assert_relative_eq!(two.duration, 3.0 * l.alpha / l.beta, max_relative = 1e-14);
        assert!(segment_time(-1.0, &l).is_err());
    }

    #[test]
    fn bang_bang_simulation_agrees() {
        // Oracle: explicit integration of the bang-bang control law.
        let l = lim();
        for &len in &[0.1, 0.7, 1.0, 2.0, 5.3] {
            let timing = segment_time(len, &l).unwrap();
            let h = 1e-6;
            let (mut x, mut v, mut t) = (0.0f64, 0.0f64, 0.0f64);
            loop {
                let brake = v * v / (2.0 * l.beta);
                let a = if len - x <= brake {
                    -l.beta
                } else if v < l.alpha {
                    l.beta
                } else {
                    0.0
                };
                let vn = (v + a * h).clamp(0.0, l.alpha);
                x += 0.5 * (v + vn) * h;
                v = vn;
                t += h;
                if v <= 0.0 && t > h {
                    break;
                }
            }
            assert_relative_eq!(t, timing.duration, max_relative = 1e-4);
            assert_relative_eq!(x, len, max_relative = 1e-4);
        }
    }

    #[test]
    fn distance_profile_is_consistent() {
        let l = lim();
        for len in [0.3, 3.0] {
            let s = segment_time(len, &l).unwrap();
            assert_eq!(s.distance_at(0.0), 0.0);
            assert_relative_eq!(s.distance_at(s.duration), len, max_relative = 1e-12);
            let mut prev = 0.0;
            for k in 0..=100 {
                let x = s.distance_at(s.duration * k as f64 / 100.0);
                assert!(x >= prev - 1e-15);
                prev = x;
            }
        }
    }

    #[test]
    fn single_segment_polyline() {
        let l = lim();
        let p = Polyline::from_points(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let (c, rep) = time_optimal_polyline(&p, &l, 1e-3).unwrap();
        assert_relative_eq!(rep.t_oc_s, segment_time(5.0, &l).unwrap().duration, max_relative = 1e-14);
        assert_eq!(c.point(c.len() - 1), &[3.0, 4.0]);
        assert!(check_admissible(&c, &l, 1e-9).admissible);
    }

    #[test]
    fn orthogonal_segments_stop_at_corner() {
        let l = lim();
        let s = l.saturation_length();
        let p = Polyline::from_points(&[[0.0, 0.0], [s, 0.0], [s, s]]).unwrap();
        let dt = 1e-4;
        let (c, rep) = time_optimal_polyline(&p, &l, dt).unwrap();
        assert_relative_eq!(rep.t_oc_s, 4.0 * l.alpha / l.beta, max_relative = 1e-14);
        let corner_step = (2.0 * l.alpha / l.beta / dt).round() as usize;
        let speeds = finite_diff_speed(&c);
        let v = speeds[2 * corner_step].hypot(speeds[2 * corner_step + 1]);
        assert!(v < 2.0 * l.beta * dt, "corner speed {v}");
        let rep = check_admissible(&c, &l, 1e-3);
        assert!(rep.admissible, "{rep:?}");
    }

    #[test]
    fn duration_independent_of_dt() {
        let l = lim();
        let p = Polyline::from_points(&[[0.0, 0.0], [1.0, 0.2], [0.5, 2.0], [3.0, 3.0]]).unwrap();
        let (_, a) = time_optimal_polyline(&p, &l, 1e-3).unwrap();
        let (_, b) = time_optimal_polyline(&p, &l, 5e-4).unwrap();
        assert!((a.t_oc_s - b.t_oc_s).abs() < 1e-9);
        assert!(a.t_oc_s >= p.total_length() / l.alpha);
    }

    #[test]
    fn coarse_dt_is_refined() {
        let l = lim();
        let p = Polyline::from_points(&[[0.0, 0.0], [1e-3, 0.0], [1.0, 0.0]]).unwrap();
        let (c, rep) = time_optimal_polyline(&p, &l, 0.1).unwrap();
        assert!(rep.dt_s < 0.1);
        assert_eq!(c.dt(), rep.dt_s);
    }

    fn sampled_circle(radius: f64, n: usize) -> Curve {
        let pts: Vec<[f64; 2]> = (0..=n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [radius * th.cos(), radius * th.sin()]
            })
            .collect();
        Curve::from_points(&pts, 1.0).unwrap()
    }

    #[test]
    fn circle_runs_at_centripetal_limit() {
        let l = lim();
        let r = 0.5; // α²/R = 8 > β
        let c = sampled_circle(r, 20_000);
        // dt spans several chords of the support, as in practice
        let opts = SmoothOptions { ds: None, endpoints: EndpointSpeed::Free, dt: 1e-3 };
        let (out, rep) = time_optimal_smooth(&c, &l, &opts).unwrap();
        let v = (l.beta * r).sqrt();
        let support = c.path_length();
        assert_relative_eq!(rep.duration_s, support / v, max_relative = 1e-9);
        assert_relative_eq!(rep.duration_s, 2.0 * std::f64::consts::PI * r / v, max_relative = 1e-4);
        let adm = check_admissible(&out, &l, 1e-2);
        assert!(adm.admissible, "{adm:?}");
    }

    #[test]
    fn straight_line_matches_segment_time() {
        let l = lim();
        let pts: Vec<[f64; 2]> = (0..=50).map(|i| [i as f64 * 0.1, 0.0]).collect();
        let c = Curve::from_points(&pts, 1.0).unwrap();
        let opts = SmoothOptions { ds: Some(1e-4), endpoints: EndpointSpeed::Rest, dt: 1e-3 };
        let (out, rep) = time_optimal_smooth(&c, &l, &opts).unwrap();
        let exact = segment_time(5.0, &l).unwrap().duration;
        assert_relative_eq!(rep.duration_s, exact, max_relative = 1e-3);
        let adm = check_admissible(&out, &l, 1e-2);
        assert!(adm.admissible, "{adm:?}");

        let free = SmoothOptions { endpoints: EndpointSpeed::Free, ..opts };
        let (_, rep) = time_optimal_smooth(&c, &l, &free).unwrap();
        assert_relative_eq!(rep.duration_s, 5.0 / l.alpha, max_relative = 1e-9);
    }

    #[test]
    fn repeated_points_rejected() {
        let c = Curve::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 1.0).unwrap();
        let opts = SmoothOptions { ds: None, endpoints: EndpointSpeed::Free, dt: 1e-3 };
        assert!(time_optimal_smooth(&c, &lim(), &opts).is_err());
    }
}
