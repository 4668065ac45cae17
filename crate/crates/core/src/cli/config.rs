//! Run configuration: one JSON document per experiment.
//!
//! Every field has a default, so `{}` is a valid configuration. Unknown
//! fields are rejected and errors carry the JSON path of the offending field.
//! The documented schema lives in `docs/config.schema.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cs_sim::ReconConfig;
use crate::density::DrawExponent;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinematics::{derive_limits, HardwareLimits, KinematicLimits};
use crate::projection::ProjectionOptions;
use crate::tour::TspOptions;
use crate::trajectories::{EpiRegion, SpiralOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub grid: GridConfig,
    pub hardware: HardwareLimits,
    /// Gradient raster time, s.
    pub dt_s: f64,
    pub scheme: Scheme,
    /// Fully sampled k-space centre added to every mask.
    pub center: Option<CenterConfig>,
    pub recon: ReconConfig,
    /// Complex noise standard deviation added to the measurements.
    pub noise_sigma: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            grid: GridConfig::default(),
            hardware: HardwareLimits::default(),
            dt_s: 1e-5,
            scheme: Scheme::Tsp(TspScheme::default()),
            center: Some(CenterConfig::default()),
            recon: ReconConfig::default(),
            noise_sigma: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    /// Image resolution, m; sets `fov_k = 1 / resolution` on every axis.
    pub resolution_m: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dims: vec![256, 256],
            resolution_m: 90e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CenterConfig {
    /// Disk radius as a fraction of `k_max`.
    pub radius_frac: f64,
}

impl Default for CenterConfig {
    fn default() -> Self {
        CenterConfig { radius_frac: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scheme {
    Tsp(TspScheme),
    Epi(EpiScheme),
    Spiral(SpiralScheme),
}

impl Scheme {
    pub fn name(&self) -> String {
        match self {
            Scheme::Tsp(t) => match (t.parameterization, t.project) {
                (Parameterization::TimeOptimal, _) => "tsp+optimal_control".into(),
                (Parameterization::ConstantSpeed, true) => "tsp+projection".into(),
                (Parameterization::ConstantSpeed, false) => "tsp+constant_speed".into(),
            },
            Scheme::Epi(e) => match e.region {
                EpiRegion::Full => "epi".into(),
                EpiRegion::CenterFrac(_) => "epi_center".into(),
            },
            Scheme::Spiral(_) => "spiral+projection".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    ConstantSpeed,
    TimeOptimal,
}

/// Traversal time of the constant-speed curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationConfig {
    /// `T = L / (f · α)`.
    SpeedFraction(f64),
    FixedS(f64),
    /// `T` equal to the time-optimal duration of the same tour.
    MatchTimeOptimal,
}

/// City-count search toward a design target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Acceleration factor `N / m`.
    R(f64),
    /// Traversal time of the emitted curve, s.
    TimeS(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    /// `π ∝ 1 / max(|k|, r₀)^exponent`.
    pub exponent: f64,
    /// `r₀` as a fraction of `k_max`.
    pub center_radius_frac: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            exponent: 2.0,
            center_radius_frac: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TspScheme {
    pub density: DensityConfig,
    pub draw_exponent: DrawExponent,
    /// Draw uniformly inside cells instead of at cell centres.
    pub jitter: bool,
    pub n_cities: usize,
    pub target: Option<Target>,
    /// Prepend the k-space origin and start the tour there.
    pub start_at_center: bool,
    pub tsp: TspOptions,
    pub parameterization: Parameterization,
    pub duration: DurationConfig,
    pub project: bool,
    pub projection: ProjectionOptions,
}

impl Default for TspScheme {
    fn default() -> Self {
        TspScheme {
            density: DensityConfig::default(),
            draw_exponent: DrawExponent::default(),
            jitter: true,
            n_cities: 2000,
            target: None,
            start_at_center: true,
            tsp: TspOptions::default(),
            parameterization: Parameterization::ConstantSpeed,
            duration: DurationConfig::SpeedFraction(1.0),
            project: true,
            projection: ProjectionOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpiScheme {
    pub region: EpiRegion,
}

impl Default for EpiScheme {
    fn default() -> Self {
        EpiScheme { region: EpiRegion::Full }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralScheme {
    /// Radial density exponent.
    pub q: f64,
    pub spiral: SpiralOptions,
}

impl Default for SpiralScheme {
    fn default() -> Self {
        SpiralScheme {
            q: 2.0,
            spiral: SpiralOptions::default(),
        }
    }
}

fn from_value<T: serde::de::DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner == ".") {
            (true, _) => inner,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{inner}"),
        };
        Error::config(path, e.into_inner().to_string())
    })
}

fn parse_scheme(mut value: serde_json::Value) -> Result<Scheme> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::config("scheme", "expected an object"))?;
    let kind = match obj.remove("kind") {
        Some(serde_json::Value::String(k)) => k,
        Some(other) => return Err(Error::config("scheme.kind", format!("expected a string, got {other}"))),
        None => return Err(Error::config("scheme.kind", "missing field `kind`")),
    };
    match kind.as_str() {
        "tsp" => Ok(Scheme::Tsp(from_value(value, "scheme")?)),
        "epi" => Ok(Scheme::Epi(from_value(value, "scheme")?)),
        "spiral" => Ok(Scheme::Spiral(from_value(value, "scheme")?)),
        other => Err(Error::config(
            "scheme.kind",
            format!("unknown scheme `{other}`, expected one of tsp, epi, spiral"),
        )),
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::config(".", e.to_string()))?;
        // The scheme is decoded on its own: an internally tagged enum would
        // hide the path of errors inside it.
        let scheme = value.as_object_mut().and_then(|o| o.remove("scheme"));
        let mut cfg: Config = from_value(value, "")?;
        if let Some(s) = scheme {
            cfg.scheme = parse_scheme(s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Config::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid.dims.len();
        if !(d == 2 || d == 3) {
            return Err(Error::config("grid.dims", format!("expected 2 or 3 axes, got {d}")));
        }
        if d == 3 && self.grid.dims.iter().any(|&n| n > 64) {
            return Err(Error::config("grid.dims", "3-D grids are limited to 64 per axis"));
        }
        if !(self.grid.resolution_m > 0.0) {
            return Err(Error::config("grid.resolution_m", "must be positive"));
        }
        if !(self.dt_s > 0.0) || !self.dt_s.is_finite() {
            return Err(Error::config("dt_s", "must be positive"));
        }
        self.hardware
            .validate()
            .map_err(|e| Error::config("hardware", e.to_string()))?;
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::config("noise_sigma", "must be ≥ 0"));
        }
        if let Some(c) = &self.center {
            if !(c.radius_frac > 0.0 && c.radius_frac < 1.0) {
                return Err(Error::config("center.radius_frac", "must be in (0, 1)"));
            }
        }
        match &self.scheme {
            Scheme::Tsp(t) => {
                if t.n_cities < 2 {
                    return Err(Error::config("scheme.n_cities", "need at least 2 cities"));
                }
                if t.projection.tol_rel <= 0.0 || t.projection.max_iter == Some(0) {
                    return Err(Error::config("scheme.projection", "tol_rel must be > 0 and max_iter ≥ 1"));
                }
                match t.duration {
                    DurationConfig::SpeedFraction(f) if !(f > 0.0) => {
                        return Err(Error::config("scheme.duration.speed_fraction", "must be positive"))
                    }
                    DurationConfig::FixedS(s) if !(s > 0.0) => {
                        return Err(Error::config("scheme.duration.fixed_s", "must be positive"))
                    }
                    _ => {}
                }
                match t.target {
                    Some(Target::R(r)) if !(r >= 1.0) => {
                        return Err(Error::config("scheme.target.r", "must be ≥ 1"))
                    }
                    Some(Target::TimeS(s)) if !(s > 0.0) => {
                        return Err(Error::config("scheme.target.time_s", "must be positive"))
                    }
                    _ => {}
                }
            }
            Scheme::Epi(_) | Scheme::Spiral(_) => {
                if d != 2 {
                    return Err(Error::config("scheme.kind", "EPI and spiral schemes are 2-D only"));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::from_resolution(self.grid.dims.clone(), self.grid.resolution_m)
    }

    pub fn limits(&self) -> Result<KinematicLimits> {
        derive_limits(&self.hardware)
    }
}
