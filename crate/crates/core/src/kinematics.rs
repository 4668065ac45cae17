//! Hardware limits, uniformly sampled curves and their discrete derivatives.
//!
//! A gradient waveform is the scaled velocity of the k-space trajectory,
//! `g = ṡ / γ`. Bounding `‖g‖` by `G_max` and `‖ġ‖` by `S_max` is therefore the
//! same as bounding the curve's speed by `α = γ·G_max` and its acceleration by
//! `β = γ·S_max`.
//!
//! Derivatives use forward first differences `(p[i+1] - p[i]) / dt` and centred
//! second differences `(p[i+1] - 2 p[i] + p[i-1]) / dt²`. Constraints apply only
//! where a stencil is defined; the projector uses the same stencils.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Proton gyromagnetic ratio γ/2π in Hz·T⁻¹.
pub const GAMMA_PROTON_HZ_PER_T: f64 = 42.576e6;

/// Which vector norm the speed and acceleration bounds apply to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// ℓ2 norm of the d-vector.
    #[default]
    RotationInvariant,
    /// ℓ∞ norm: each gradient axis is limited independently.
    RotationVariant,
}

impl NormMode {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormMode::RotationInvariant => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormMode::RotationVariant => v.iter().fold(0.0, |m, x| f64::max(m, x.abs())),
        }
    }
}

/// Gradient system limits as quoted on a scanner data sheet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareLimits {
    /// Gradient amplitude bound, T·m⁻¹.
    pub g_max: f64,
    /// Slew-rate bound, T·m⁻¹·ms⁻¹.
    pub s_max: f64,
    /// Gyromagnetic ratio, Hz·T⁻¹.
    pub gamma: f64,
    pub norm_mode: NormMode,
}

impl Default for HardwareLimits {
    /// 17.2 T preclinical system: 1 T/m, 5.3 T/m/ms, proton γ.
    fn default() -> Self {
        HardwareLimits {
            g_max: 1.0,
            s_max: 5.3,
            gamma: GAMMA_PROTON_HZ_PER_T,
            norm_mode: NormMode::RotationInvariant,
        }
    }
}

impl HardwareLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g_max", self.g_max), ("s_max", self.s_max), ("gamma", self.gamma)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidLimits(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Speed bound α (m⁻¹·s⁻¹) and acceleration bound β (m⁻¹·s⁻²) on the curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicLimits {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub norm_mode: NormMode,
}

impl KinematicLimits {
    pub fn new(alpha: f64, beta: f64, norm_mode: NormMode) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidLimits(format!(
                "alpha and beta must be finite and positive, got ({alpha}, {beta})"
            )));
        }
        Ok(KinematicLimits {
            alpha,
            beta,
            norm_mode,
        })
    }

    /// Length α²/β above which a rest-to-rest move reaches full speed.
    pub fn saturation_length(&self) -> f64 {
        self.alpha * self.alpha / self.beta
    }
}

pub fn derive_limits(hw: &HardwareLimits) -> Result<KinematicLimits> {
    hw.validate()?;
    // s_max is per millisecond.
    KinematicLimits::new(hw.gamma * hw.g_max, hw.gamma * hw.s_max * 1000.0, hw.norm_mode)
}

/// A trajectory sampled at a fixed time step.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    dim: usize,
    dt: f64,
    /// Row-major `n × dim`, m⁻¹.
    positions: Vec<f64>,
}

impl Curve {
    pub fn new(dim: usize, dt: f64, positions: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Shape(format!("curve dimension must be 1..=3, got {dim}")));
        }
        if positions.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "{} coordinates do not divide into {dim}-d points",
                positions.len()
            )));
        }
        if positions.len() / dim < 3 {
            return Err(Error::Shape(format!(
                "a curve needs at least 3 samples, got {}",
                positions.len() / dim
            )));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("curve has non-finite coordinates".into()));
        }
        Ok(Curve { dim, dt, positions })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P], dt: f64) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.as_ref().len() != dim {
                return Err(Error::Shape("points have mixed dimensions".into()));
            }
            flat.extend_from_slice(p.as_ref());
        }
        Curve::new(dim, dt, flat)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// T = (n − 1)·dt.
    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.positions
    }

    /// Copy with every position multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Curve {
        Curve {
            dim: self.dim,
            dt: self.dt,
            positions: self.positions.iter().map(|x| x * factor).collect(),
        }
    }

    /// Sum of distances between consecutive samples.
    pub fn path_length(&self) -> f64 {
        self.positions
            .windows(2 * self.dim)
            .step_by(self.dim)
            .map(|w| dist(&w[..self.dim], &w[self.dim..]))
            .sum()
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Forward differences `(p[i+1] − p[i]) / dt`, flattened `(n−1) × d`.
pub fn finite_diff_speed(c: &Curve) -> Vec<f64> {
    let d = c.dim;
    let inv = 1.0 / c.dt;
    let p = &c.positions;
    (0..p.len() - d).map(|j| (p[j + d] - p[j]) * inv).collect()
}

/// Centred second differences, flattened `(n−2) × d`.
pub fn finite_diff_accel(c: &Curve) -> Vec<f64> {
    let d = c.dim;
    let inv = 1.0 / (c.dt * c.dt);
    let p = &c.positions;
    (d..p.len() - d)
        .map(|j| (p[j + d] - 2.0 * p[j] + p[j - d]) * inv)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub max_speed_ratio: f64,
    pub max_accel_ratio: f64,
    pub admissible: bool,
}

fn max_ratio(samples: &[f64], dim: usize, mode: NormMode, limit: f64) -> f64 {
    samples
        .chunks_exact(dim)
        .map(|v| mode.norm(v))
        .fold(0.0, f64::max)
        / limit
}

pub fn check_admissible(c: &Curve, lim: &KinematicLimits, tol: f64) -> AdmissibilityReport {
    let speed = max_ratio(&finite_diff_speed(c), c.dim, lim.norm_mode, lim.alpha);
    let accel = max_ratio(&finite_diff_accel(c), c.dim, lim.norm_mode, lim.beta);
    AdmissibilityReport {
        max_speed_ratio: speed,
        max_accel_ratio: accel,
        admissible: speed <= 1.0 + tol && accel <= 1.0 + tol,
    }
}

/// Gradient samples (T·m⁻¹) between consecutive curve samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientWaveform {
    pub dim: usize,
    pub dt: f64,
    /// Flattened `(n−1) × dim`.
    pub samples: Vec<f64>,
}

impl GradientWaveform {
    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest gradient amplitude under `mode`, T·m⁻¹.
    pub fn max_amplitude(&self, mode: NormMode) -> f64 {
        self.samples
            .chunks_exact(self.dim)
            .map(|g| mode.norm(g))
            .fold(0.0, f64::max)
    }

    /// Largest finite-difference slew under `mode`, T·m⁻¹·ms⁻¹.
    pub fn max_slew(&self, mode: NormMode) -> f64 {
        let d = self.dim;
        let mut diff = vec![0.0; d];
        let mut best = 0.0f64;
        for w in self.samples.windows(2 * d).step_by(d) {
            for a in 0..d {
                diff[a] = (w[d + a] - w[a]) / self.dt;
            }
            best = best.max(mode.norm(&diff));
        }
        best / 1000.0
    }

    /// Cumulative integration `p[i+1] = p[i] + γ·g[i]·dt` from `start`.
    pub fn integrate(&self, start: &[f64], gamma: f64) -> Result<Curve> {
        if start.len() != self.dim {
            return Err(Error::Shape("start point dimension mismatch".into()));
        }
        let mut pos = Vec::with_capacity(self.samples.len() + self.dim);
        pos.extend_from_slice(start);
        for (i, g) in self.samples.iter().enumerate() {
            let prev = pos[i];
            pos.push(prev + gamma * g * self.dt);
        }
        Curve::new(self.dim, self.dt, pos)
    }
}

pub fn to_gradients(c: &Curve, hw: &HardwareLimits) -> GradientWaveform {
    let inv_gamma = 1.0 / hw.gamma;
    GradientWaveform {
        dim: c.dim,
        dt: c.dt,
        samples: finite_diff_speed(c).into_iter().map(|v| v * inv_gamma).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(v: &[f64], n: usize, dt: f64) -> Curve {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| v.iter().map(|x| x * i as f64 * dt).collect())
            .collect();
        Curve::from_points(&pts, dt).unwrap()
    }

    #[test]
    fn derive_limits_scanner_values() {
        let lim = derive_limits(&HardwareLimits::default()).unwrap();
        assert_relative_eq!(lim.alpha, 4.2576e7, max_relative = 1e-12);
        assert_relative_eq!(lim.beta, 2.256528e11, max_relative = 1e-12);
    }

    #[test]
    fn derive_limits_unit_identity_and_linearity() {
        let hw = HardwareLimits {
            g_max: 1.0,
            s_max: 1.0,
            gamma: 1.0,
            norm_mode: NormMode::RotationInvariant,
        };
        let lim = derive_limits(&hw).unwrap();
        assert_eq!((lim.alpha, lim.beta), (1.0, 1000.0));
        let doubled = derive_limits(&HardwareLimits { gamma: 2.0, ..hw }).unwrap();
        assert_eq!((doubled.alpha, doubled.beta), (2.0, 2000.0));
    }

    #[test]
    fn derive_limits_rejects_bad_input() {
        for hw in [
            HardwareLimits { g_max: 0.0, ..Default::default() },
            HardwareLimits { s_max: -1.0, ..Default::default() },
            HardwareLimits { gamma: f64::NAN, ..Default::default() },
            HardwareLimits { g_max: f64::INFINITY, ..Default::default() },
        ] {
            assert!(matches!(derive_limits(&hw), Err(Error::InvalidLimits(_))));
        }
    }

    #[test]
    fn curve_shape_errors() {
        assert!(matches!(Curve::new(2, 1.0, vec![0.0; 4]), Err(Error::Shape(_))));
        assert!(Curve::new(2, 0.0, vec![0.0; 6]).is_err());
        assert!(Curve::new(2, 1.0, vec![0.0, 0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn derivatives_of_simple_curves() {
        let c = Curve::from_points(&[[1.0, 2.0]; 5], 0.1).unwrap();
        assert!(finite_diff_speed(&c).iter().all(|&v| v == 0.0));
        assert!(finite_diff_accel(&c).iter().all(|&v| v == 0.0));

        let c = line(&[3.0, -1.0], 10, 0.5);
        for v in finite_diff_speed(&c).chunks(2) {
            assert_relative_eq!(v[0], 3.0, max_relative = 1e-12);
            assert_relative_eq!(v[1], -1.0, max_relative = 1e-12);
        }
        assert!(finite_diff_accel(&c).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn quadratic_has_exact_second_difference() {
        let (a, dt) = (2.5, 0.01);
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let t = i as f64 * dt;
                [0.5 * a * t * t, -0.5 * a * t * t]
            })
            .collect();
        let c = Curve::from_points(&pts, dt).unwrap();
        for acc in finite_diff_accel(&c).chunks(2) {
            assert_relative_eq!(acc[0], a, max_relative = 1e-8);
            assert_relative_eq!(acc[1], -a, max_relative = 1e-8);
        }
    }

    #[test]
    fn admissibility_examples() {
        let lim = KinematicLimits::new(1.0, 10.0, NormMode::RotationInvariant).unwrap();
        let r = check_admissible(&Curve::from_points(&[[0.0, 0.0]; 3], 1.0).unwrap(), &lim, 0.0);
        assert_eq!((r.max_speed_ratio, r.max_accel_ratio, r.admissible), (0.0, 0.0, true));

        let r = check_admissible(&line(&[2.0, 0.0], 8, 0.1), &lim, 1e-9);
        assert_relative_eq!(r.max_speed_ratio, 2.0, max_relative = 1e-12);
        assert!(!r.admissible);

        let diag = line(&[1.0, 1.0], 8, 0.1);
        let ri = check_admissible(&diag, &lim, 1e-9);
        assert_relative_eq!(ri.max_speed_ratio, 2f64.sqrt(), max_relative = 1e-12);
        assert!(!ri.admissible);
        let lim_v = KinematicLimits { norm_mode: NormMode::RotationVariant, ..lim };
        let rv = check_admissible(&diag, &lim_v, 1e-9);
        assert_relative_eq!(rv.max_speed_ratio, 1.0, max_relative = 1e-12);
        assert!(rv.admissible);
    }

    #[test]
    fn gradient_definition() {
        let hw = HardwareLimits::default();
        let c = line(&[hw.gamma * 0.5, 0.0], 6, 1e-5);
        let g = to_gradients(&c, &hw);
        assert_eq!(g.len(), 5);
        for s in g.samples.chunks(2) {
            assert_relative_eq!(s[0], 0.5, max_relative = 1e-9);
            assert_eq!(s[1], 0.0);
        }
        let z = to_gradients(&Curve::from_points(&[[1.0, 1.0]; 4], 1e-5).unwrap(), &hw);
        assert!(z.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn admissible_curve_gives_admissible_waveform() {
        let hw = HardwareLimits::default();
        let lim = derive_limits(&hw).unwrap();
        // Circle at speed 0.9α whose centripetal acceleration is 0.9β.
        let v = 0.9 * lim.alpha;
        let radius = v * v / (0.9 * lim.beta);
        let dt = 1e-6;
        let omega = v / radius;
        let pts: Vec<[f64; 2]> = (0..2000)
            .map(|i| {
                let th = omega * i as f64 * dt;
                [radius * th.cos(), radius * th.sin()]
            })
            .collect();
        let c = Curve::from_points(&pts, dt).unwrap();
        assert!(check_admissible(&c, &lim, 1e-6).admissible);
        let g = to_gradients(&c, &hw);
        assert!(g.max_amplitude(hw.norm_mode) <= hw.g_max * (1.0 + 1e-6));
        assert!(g.max_slew(hw.norm_mode) <= hw.s_max * (1.0 + 1e-6));
    }

    fn arb_curve() -> impl Strategy<Value = Curve> {
        (2usize..=3, 3usize..40).prop_flat_map(|(d, n)| {
            prop::collection::vec(-1e3f64..1e3, n * d)
                .prop_map(move |p| Curve::new(d, 1e-5, p).unwrap())
        })
    }

    proptest! {
        #[test]
        fn gradient_roundtrip(c in arb_curve()) {
            let hw = HardwareLimits::default();
            let back = to_gradients(&c, &hw).integrate(c.point(0), hw.gamma).unwrap();
            let scale = c.as_flat().iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (a, b) in c.as_flat().iter().zip(back.as_flat()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn ratios_scale_linearly(c in arb_curve(), lambda in 1.0f64..10.0) {
            let lim = KinematicLimits::new(1e6, 1e10, NormMode::RotationInvariant).unwrap();
            let a = check_admissible(&c, &lim, 0.0);
            let b = check_admissible(&c.scaled(lambda), &lim, 0.0);
            prop_assert!((b.max_speed_ratio - lambda * a.max_speed_ratio).abs()
                <= 1e-12 * b.max_speed_ratio.max(1e-300));
            prop_assert!((b.max_accel_ratio - lambda * a.max_accel_ratio).abs()
                <= 1e-12 * b.max_accel_ratio.max(1e-300));
        }

        #[test]
        fn norm_ordering(c in arb_curve()) {
            let d = c.dim() as f64;
            for v in finite_diff_speed(&c).chunks(c.dim()) {
                let linf = NormMode::RotationVariant.norm(v);
                let l2 = NormMode::RotationInvariant.norm(v);
                prop_assert!(linf <= l2 * (1.0 + 1e-12));
                prop_assert!(l2 <= d.sqrt() * linf * (1.0 + 1e-12));
            }
        }
    }
}
