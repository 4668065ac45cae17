//! Retrospective compressed-sensing evaluation of sampling schemes.
//!
//! A curve is turned into a Cartesian mask by supercover rasterization, a
//! reference image is sampled through the centered unitary DFT on that mask,
//! and the image is recovered by ℓ1-wavelet minimization under exact data
//! consistency, solved with Douglas-Rachford splitting.

pub mod fourier;
pub mod mask;
pub mod metrics;
pub mod phantom;
pub mod recon;
pub mod wavelet;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use fourier::{adjoint_model, forward_model, FourierOp};
pub use mask::{acceleration_factor, bin_samples, rasterize_mask, SamplingMask};
pub use metrics::{curve_density, empirical_density, point_density, psnr, radial_w2};
pub use phantom::shepp_logan;
pub use recon::{add_noise, reconstruct_dr, ReconConfig, ReconReport};
pub use wavelet::{wavelet_analysis, wavelet_synthesis, WaveletConfig, WaveletFamily};

/// Image samples on a d-dimensional grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageVolume {
    dims: Vec<usize>,
    data: Vec<Complex64>,
    /// Factor applied when the image was quantized for storage.
    pub scale: f64,
}

impl ImageVolume {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n != data.len() {
            return Err(Error::Shape(format!("{} samples for dims {:?}", data.len(), dims)));
        }
        if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("image contains non-finite samples".into()));
        }
        Ok(ImageVolume { dims, data, scale: 1.0 })
    }

    pub fn from_real(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        ImageVolume::new(dims, data.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.re).collect()
    }
}
