//! Modified Shepp-Logan phantom (Toft's higher-contrast intensities).

use super::ImageVolume;
use crate::error::{Error, Result};

// intensity, semi-axes (a, b, c), centre (x, y, z), rotation about z in degrees
const ELLIPSOIDS: [[f64; 8]; 10] = [
    [1.0, 0.69, 0.92, 0.81, 0.0, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.78, 0.0, -0.0184, 0.0, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.22, 0.0, 0.0, -18.0],
    [-0.2, 0.16, 0.41, 0.28, -0.22, 0.0, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.41, 0.0, 0.35, -0.15, 0.0],
    [0.1, 0.046, 0.046, 0.05, 0.0, 0.1, 0.25, 0.0],
    [0.1, 0.046, 0.046, 0.05, 0.0, -0.1, 0.25, 0.0],
    [0.1, 0.046, 0.023, 0.05, -0.08, -0.605, 0.0, 0.0],
    [0.1, 0.023, 0.023, 0.02, 0.0, -0.606, 0.0, 0.0],
    [0.1, 0.023, 0.046, 0.02, 0.06, -0.605, 0.0, 0.0],
];

/// Phantom on a 2-D (`[rows, cols]`) or 3-D (`[slices, rows, cols]`) grid.
///
/// Coordinates span `[-1, 1]` across each axis; `y` points up the rows. The
/// 2-D version uses the in-plane ellipses only.
pub fn shepp_logan(dims: &[usize]) -> Result<ImageVolume> {
    let d = dims.len();
    if !(d == 2 || d == 3) || dims.iter().any(|&n| n == 0) {
        return Err(Error::Shape(format!("phantom needs 2 or 3 non-empty axes, got {dims:?}")));
    }
    let coord = |i: usize, n: usize| (2 * i + 1) as f64 / n as f64 - 1.0;
    let total: usize = dims.iter().product();
    let mut data = vec![0.0; total];
    for (flat, v) in data.iter_mut().enumerate() {
        let col = flat % dims[d - 1];
        let row = (flat / dims[d - 1]) % dims[d - 2];
        let x = coord(col, dims[d - 1]);
        let y = -coord(row, dims[d - 2]);
        let z = if d == 3 { coord(flat / (dims[1] * dims[2]), dims[0]) } else { 0.0 };
        for e in &ELLIPSOIDS {
            let (s, c) = e[7].to_radians().sin_cos();
            let (dx, dy, dz) = (x - e[4], y - e[5], z - e[6]);
            let u = dx * c + dy * s;
            let w = -dx * s + dy * c;
            let r = (u / e[1]).powi(2) + (w / e[2]).powi(2) + if d == 3 { (dz / e[3]).powi(2) } else { 0.0 };
            if r <= 1.0 {
                *v += e[0];
            }
        }
    }
    ImageVolume::from_real(dims.to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_intensities() {
        let img = shepp_logan(&[128, 128]).unwrap().real_part();
        let at = |x: f64, y: f64| {
            let col = ((x + 1.0) / 2.0 * 128.0) as usize;
            let row = ((1.0 - y) / 2.0 * 128.0) as usize;
            img[row * 128 + col]
        };
        assert!((at(0.0, 0.0) - 0.2).abs() < 1e-12); // brain matter
        assert!((at(0.0, 0.89) - 1.0).abs() < 1e-12); // skull
        assert_eq!(at(0.95, 0.95), 0.0);
        assert!((at(0.22, 0.0) - 0.0).abs() < 1e-12); // ventricle
        let peak = img.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_d_shape() {
        let v = shepp_logan(&[16, 32, 32]).unwrap();
        assert_eq!(v.len(), 16 * 32 * 32);
        assert!(shepp_logan(&[4]).is_err());
    }
}
