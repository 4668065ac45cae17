//! Orthogonal separable multilevel wavelet transform with periodic extension.
//!
//! Layout follows the Mallat pyramid: after level ℓ the approximation band
//! occupies the leading `n / 2^ℓ` entries of every axis and detail bands fill
//! the rest, so coefficients live in an array of the image's shape.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletFamily {
    #[default]
    Symmlet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletConfig {
    pub family: WaveletFamily,
    /// Number of vanishing moments (filter length is twice this).
    pub order: usize,
    pub levels: usize,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        WaveletConfig {
            family: WaveletFamily::Symmlet,
            order: 8,
            levels: 3,
        }
    }
}

// Decomposition low-pass filters, solved to double precision from the
// orthonormality and vanishing-moment conditions.
const SYM2: [f64; 4] = [
    -0.12940952255092145,
    0.22414386804185735,
    0.836516303737469,
    0.48296291314469025,
];
const SYM4: [f64; 8] = [
    -0.07576571478950221,
    -0.029635527646002493,
    0.497618667632775,
    0.8037387518051321,
    0.29785779560530606,
    -0.09921954357663353,
    -0.012603967262031304,
    0.032223100604051466,
];
const SYM6: [f64; 12] = [
    0.015404109327044824,
    0.0034907120842221626,
    -0.11799011114852002,
    -0.04831174258569806,
    0.49105594192797375,
    0.787641141028651,
    0.3379294217281658,
    -0.07263752278637658,
    -0.02106029251237085,
    0.04472490177078139,
    0.0017677118642540077,
    -0.00780070832503238,
];
const SYM8: [f64; 16] = [
    -0.0033824159510050028,
    -0.0005421323318000107,
    0.03169508781152599,
    0.007607487324976609,
    -0.14329423835127267,
    -0.061273359067811076,
    0.4813596512590534,
    0.777185751699628,
    0.36444189483617895,
    -0.0519458381078818,
    -0.027219029917103486,
    0.04913717967373029,
    0.0038087520138944896,
    -0.014952258337062199,
    -0.0003029205147241331,
    0.001889950332767689,
];
const SYM10: [f64; 20] = [
    0.0007701598091144901,
    9.563267072289475e-05,
    -0.008641299277022422,
    -0.0014653825813050513,
    0.0459272392310922,
    0.011609893903711381,
    -0.15949427888491757,
    -0.07088053578324385,
    0.47169066693843925,
    0.7695100370211071,
    0.38382676106708546,
    -0.03553674047381755,
    -0.0319900568824278,
    0.04999497207737669,
    0.005764912033581909,
    -0.02035493981231129,
    -0.0008043589320165449,
    0.004593173585311828,
    5.7036083618494284e-05,
    -0.0004593294210046588,
];

/// Filter pair of an orthogonal wavelet.
#[derive(Clone, Debug)]
pub struct Wavelet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Wavelet {
    pub fn symmlet(order: usize) -> Result<Self> {
        let lo: &[f64] = match order {
            2 => &SYM2,
            4 => &SYM4,
            6 => &SYM6,
            8 => &SYM8,
            10 => &SYM10,
            _ => {
                return Err(Error::config(
                    "wavelet.order",
                    format!("Symmlet order must be one of 2, 4, 6, 8, 10; got {order}"),
                ))
            }
        };
        let l = lo.len();
        let hi = (0..l)
            .map(|j| if j % 2 == 0 { lo[l - 1 - j] } else { -lo[l - 1 - j] })
            .collect();
        Ok(Wavelet { lo: lo.to_vec(), hi })
    }

    pub fn from_config(cfg: &WaveletConfig) -> Result<Self> {
        match cfg.family {
            WaveletFamily::Symmlet => Wavelet::symmlet(cfg.order),
        }
    }

    /// One periodic analysis step: `a[k] = Σ h[j] x[2k+j]`, `d[k] = Σ g[j] x[2k+j]`.
    fn analyze(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = x.len();
        let half = n / 2;
        let l = self.lo.len();
        // periodic extension avoids a modulo in the inner loop
        let ext: Vec<Complex64> = (0..n + l).map(|i| x[i % n]).collect();
        for k in 0..half {
            let mut a = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            let seg = &ext[2 * k..2 * k + l];
            for j in 0..l {
                a += seg[j] * self.lo[j];
                d += seg[j] * self.hi[j];
            }
            out[k] = a;
            out[half + k] = d;
        }
    }

    /// Adjoint (= inverse) of [`analyze`](Self::analyze).
    fn synthesize(&self, c: &[Complex64], out: &mut [Complex64]) {
        let n = c.len();
        let half = n / 2;
        let l = self.lo.len();
        let mut ext = vec![Complex64::new(0.0, 0.0); n + l];
        for k in 0..half {
            let a = c[k];
            let d = c[half + k];
            let seg = &mut ext[2 * k..2 * k + l];
            for j in 0..l {
                seg[j] += a * self.lo[j] + d * self.hi[j];
            }
        }
        for i in 0..n + l {
            if i < n {
                out[i] = ext[i];
            } else {
                out[i % n] += ext[i];
            }
        }
    }
}

/// Checks that every axis is divisible by `2^levels`.
pub fn check_levels(dims: &[usize], cfg: &WaveletConfig) -> Result<()> {
    if cfg.levels == 0 {
        return Err(Error::config("wavelet.levels", "levels must be ≥ 1"));
    }
    let block = 1usize
        .checked_shl(cfg.levels as u32)
        .ok_or_else(|| Error::config("wavelet.levels", "too many levels"))?;
    for &n in dims {
        if n % block != 0 {
            return Err(Error::config(
                "wavelet.levels",
                format!("axis of length {n} is not divisible by 2^{} = {block}", cfg.levels),
            ));
        }
    }
    Ok(())
}

/// Applies the 1-D step along `axis` to the sub-block `[0, size)^d`.
fn pass(
    data: &mut [Complex64],
    dims: &[usize],
    size: &[usize],
    axis: usize,
    f: impl Fn(&[Complex64], &mut [Complex64]) + Sync,
) {
    let stride: usize = dims[axis + 1..].iter().product();
    let n = size[axis];
    let d = dims.len();
    // offsets of every line in the sub-block (axis coordinate 0)
    let mut bases = Vec::new();
    let mut idx = vec![0usize; d];
    'outer: loop {
        bases.push(idx.iter().zip(dims).fold(0, |acc, (&i, &m)| acc * m + i));
        let mut a = d;
        loop {
            if a == 0 {
                break 'outer;
            }
            a -= 1;
            if a == axis {
                continue;
            }
            idx[a] += 1;
            if idx[a] < size[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    let src: &[Complex64] = data;
    let lines: Vec<Vec<Complex64>> = bases
        .par_iter()
        .map(|&base| {
            let line: Vec<Complex64> = (0..n).map(|j| src[base + j * stride]).collect();
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            f(&line, &mut out);
            out
        })
        .collect();
    for (&base, out) in bases.iter().zip(lines) {
        for (j, v) in out.into_iter().enumerate() {
            data[base + j * stride] = v;
        }
    }
}

/// Multilevel analysis of a d-dimensional array (row-major, `dims`).
pub fn wavelet_analysis(x: &[Complex64], dims: &[usize], cfg: &WaveletConfig) -> Result<Vec<Complex64>> {
    check_levels(dims, cfg)?;
    check_len(x, dims)?;
    let w = Wavelet::from_config(cfg)?;
    let mut data = x.to_vec();
    let mut size = dims.to_vec();
    for _ in 0..cfg.levels {
        for axis in 0..dims.len() {
            pass(&mut data, dims, &size, axis, |a, b| w.analyze(a, b));
        }
        size.iter_mut().for_each(|s| *s /= 2);
    }
    Ok(data)
}

/// Inverse of [`wavelet_analysis`].
pub fn wavelet_synthesis(c: &[Complex64], dims: &[usize], cfg: &WaveletConfig) -> Result<Vec<Complex64>> {
    check_levels(dims, cfg)?;
    check_len(c, dims)?;
    let w = Wavelet::from_config(cfg)?;
    let mut data = c.to_vec();
    for level in (0..cfg.levels).rev() {
        let size: Vec<usize> = dims.iter().map(|&n| n >> level).collect();
        for axis in (0..dims.len()).rev() {
            pass(&mut data, dims, &size, axis, |a, b| w.synthesize(a, b));
        }
    }
    Ok(data)
}

fn check_len(x: &[Complex64], dims: &[usize]) -> Result<()> {
    let n: usize = dims.iter().product();
    if x.len() != n {
        return Err(Error::Shape(format!("{} values for dims {dims:?}", x.len())));
    }
    Ok(())
}
