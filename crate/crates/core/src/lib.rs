//! Design of physically admissible k-space sampling trajectories.
//!
//! The crate covers the full chain used to evaluate variable-density
//! samplers under gradient hardware limits:
//!
//! * [`kinematics`]: hardware limits, curves, discrete derivatives, admissibility.
//! * [`density`]: target densities on Cartesian k-space grids and point drawing.
//! * [`tour`]: nearest-neighbour + 2-opt tours and constant-speed parameterization.
//! * [`reparam`]: time-optimal reparameterization of a fixed support.
//! * [`projection`]: projection of a discretized curve onto the admissible set.
//! * [`trajectories`]: EPI rasters and variable-density spirals.
//! * [`cs_sim`]: masks, Fourier/wavelet operators, Douglas-Rachford reconstruction, metrics.
//! * [`cli`]: configuration-driven pipelines behind the `kspace-forge` binary.

pub mod cli;
pub mod cs_sim;
pub mod density;
pub mod error;
pub mod grid;
pub mod io;
pub mod kinematics;
pub mod projection;
pub mod reparam;
pub mod tour;
pub mod trajectories;

pub use error::{Error, Result};
pub use grid::Grid;
pub use kinematics::{Curve, HardwareLimits, KinematicLimits, NormMode};
