//! Centered unitary discrete Fourier transform on d-dimensional arrays.
//!
//! Both image and k-space arrays keep their origin at index `n / 2` on every
//! axis (the `fftshift` layout used by [`Grid`](crate::grid::Grid)). The
//! transform is `fftshift ∘ FFT ∘ ifftshift` scaled by `1/√N`, so it is
//! unitary and its adjoint is its inverse.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::mask::SamplingMask;
use super::ImageVolume;
use crate::error::{Error, Result};

pub struct FourierOp {
    dims: Vec<usize>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    scale: f64,
}

impl std::fmt::Debug for FourierOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierOp").field("dims", &self.dims).finish()
    }
}

impl FourierOp {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&n| n == 0) {
            return Err(Error::Shape(format!("invalid dims {dims:?}")));
        }
        let mut planner = FftPlanner::new();
        let fwd = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inv = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let total: usize = dims.iter().product();
        Ok(FourierOp {
            dims: dims.to_vec(),
            fwd,
            inv,
            scale: 1.0 / (total as f64).sqrt(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In-place forward transform.
    pub fn forward(&self, x: &mut [Complex64]) {
        self.run(x, &self.fwd);
    }

    /// In-place inverse (= adjoint) transform.
    pub fn inverse(&self, x: &mut [Complex64]) {
        self.run(x, &self.inv);
    }

    fn run(&self, x: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(x.len(), self.len(), "array length does not match the operator");
        let total = self.len();
        for (axis, &n) in self.dims.iter().enumerate() {
            let stride: usize = self.dims[axis + 1..].iter().product();
            let plan = &plans[axis];
            let half = n / 2;
            let lines: Vec<Vec<Complex64>> = (0..total / n)
                .into_par_iter()
                .map(|l| {
                    let base = (l / stride) * stride * n + l % stride;
                    // ifftshift on gather: buf[j] = x[(j + n/2) mod n]
                    let mut buf: Vec<Complex64> =
                        (0..n).map(|j| x[base + ((j + half) % n) * stride]).collect();
                    plan.process(&mut buf);
                    buf
                })
                .collect();
            for (l, buf) in lines.into_iter().enumerate() {
                let base = (l / stride) * stride * n + l % stride;
                // fftshift on scatter: out[(j + n/2) mod n] = buf[j]
                for (j, v) in buf.into_iter().enumerate() {
                    x[base + ((j + half) % n) * stride] = v;
                }
            }
        }
        x.iter_mut().for_each(|v| *v *= self.scale);
    }
}

fn check_dims(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("dims {a:?} and {b:?} differ")));
    }
    Ok(())
}

/// Fourier coefficients of `x` on the measured cells, in ascending flat order.
pub fn forward_model(x: &ImageVolume, mask: &SamplingMask) -> Result<Vec<Complex64>> {
    check_dims(x.dims(), mask.dims())?;
    let op = FourierOp::new(x.dims())?;
    let mut k = x.data().to_vec();
    op.forward(&mut k);
    Ok(mask.indices().into_iter().map(|i| k[i]).collect())
}

/// Zero-filled inverse: places `y` on the mask and applies the inverse transform.
pub fn adjoint_model(y: &[Complex64], mask: &SamplingMask) -> Result<ImageVolume> {
    let idx = mask.indices();
    if idx.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} measurements for a mask with {} cells",
            y.len(),
            idx.len()
        )));
    }
    let op = FourierOp::new(mask.dims())?;
    let mut k = vec![Complex64::new(0.0, 0.0); mask.len()];
    for (&i, &v) in idx.iter().zip(y) {
        k[i] = v;
    }
    op.inverse(&mut k);
    ImageVolume::new(mask.dims().to_vec(), k)
}
