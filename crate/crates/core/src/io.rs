//! File formats for curves, waveforms, point clouds, densities, images and masks.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back yields bit-identical values and repeated runs produce identical
//! bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cs_sim::{ImageVolume, SamplingMask};
use crate::density::{DensityGrid, PointCloud};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinematics::{Curve, GradientWaveform};
use crate::tour::{Polyline, Tour};

const AXES: [&str; 3] = ["x", "y", "z"];

fn header(first: &str, prefix: &str, suffix: &str, dim: usize) -> String {
    let mut h = String::from(first);
    for a in AXES.iter().take(dim) {
        if !h.is_empty() {
            h.push(',');
        }
        let _ = write!(h, "{prefix}{a}{suffix}");
    }
    h.push('\n');
    h
}

fn write_rows(path: &Path, head: String, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut s = head;
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

/// Parses a numeric CSV with one header line into rows.
fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let what = path.display().to_string();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::parse(&what, "empty file"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(&what, format!("line {}: {e}", i + 2)))?;
        if row.len() != head.len() {
            return Err(Error::parse(&what, format!("line {} has {} fields, expected {}", i + 2, row.len(), head.len())));
        }
        rows.push(row);
    }
    Ok((head, rows))
}

/// `t_s,kx_per_m,ky_per_m[,kz_per_m]`.
pub fn write_curve_csv(path: &Path, c: &Curve) -> Result<()> {
    let dt = c.dt();
    write_rows(
        path,
        header("t_s", "k", "_per_m", c.dim()),
        c.points().enumerate().map(|(i, p)| {
            let mut row = vec![i as f64 * dt];
            row.extend_from_slice(p);
            row
        }),
    )
}

pub fn read_curve_csv(path: &Path) -> Result<Curve> {
    let (head, rows) = read_rows(path)?;
    let what = path.display().to_string();
    if head.first().map(String::as_str) != Some("t_s") || head.len() < 2 {
        return Err(Error::parse(&what, "expected header t_s,kx_per_m,..."));
    }
    if rows.len() < 3 {
        return Err(Error::parse(&what, "a curve needs at least 3 samples"));
    }
    let dt = rows[1][0] - rows[0][0];
    for (i, r) in rows.iter().enumerate() {
        let expect = i as f64 * dt;
        if (r[0] - rows[0][0] - expect).abs() > 1e-9 * (expect.abs() + dt) {
            return Err(Error::parse(&what, format!("non-uniform time step at row {}", i + 1)));
        }
    }
    let d = head.len() - 1;
    let pos = rows.iter().flat_map(|r| r[1..].to_vec()).collect();
    Curve::new(d, dt, pos)
}

/// `t_s,gx_T_per_m,gy_T_per_m[,gz_T_per_m]`.
pub fn write_waveform_csv(path: &Path, g: &GradientWaveform) -> Result<()> {
    write_rows(
        path,
        header("t_s", "g", "_T_per_m", g.dim),
        (0..g.len()).map(|i| {
            let mut row = vec![i as f64 * g.dt];
            row.extend_from_slice(g.sample(i));
            row
        }),
    )
}

pub fn read_waveform_csv(path: &Path) -> Result<GradientWaveform> {
    let (head, rows) = read_rows(path)?;
    let what = path.display().to_string();
    if rows.len() < 2 || head.len() < 2 {
        return Err(Error::parse(&what, "waveform needs a header and two rows"));
    }
    let dt = rows[1][0] - rows[0][0];
    Ok(GradientWaveform {
        dim: head.len() - 1,
        dt,
        samples: rows.iter().flat_map(|r| r[1..].to_vec()).collect(),
    })
}

/// `kx_per_m,ky_per_m[,kz_per_m]`, one point per line.
pub fn write_points_csv(path: &Path, pc: &PointCloud) -> Result<()> {
    write_rows(path, header("", "k", "_per_m", pc.dim), pc.iter().map(|p| p.to_vec()))
}

pub fn read_points_csv(path: &Path, seed: u64) -> Result<PointCloud> {
    let (head, rows) = read_rows(path)?;
    PointCloud::new(head.len(), rows.concat(), seed)
}

pub fn write_polyline_csv(path: &Path, poly: &Polyline) -> Result<()> {
    write_rows(path, header("", "k", "_per_m", poly.dim()), poly.vertices().map(|p| p.to_vec()))
}

pub fn read_polyline_csv(path: &Path) -> Result<Polyline> {
    let (head, rows) = read_rows(path)?;
    Polyline::new(head.len(), rows.concat())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

pub fn write_tour_json(path: &Path, tour: &Tour) -> Result<()> {
    write_json(path, tour)
}

pub fn read_tour_json(path: &Path) -> Result<Tour> {
    read_json(path)
}

/// Sidecar path: `name.f64` → `name.json`.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

fn write_f64_le(path: &Path, values: impl Iterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = values.flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    Ok(())
}

fn read_f64_le(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::parse(path.display().to_string(), "length is not a multiple of 8 bytes"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySidecar {
    pub dims: Vec<usize>,
    pub fov_k: Vec<f64>,
    pub sum: f64,
}

/// Little-endian f64 values plus a JSON sidecar `{dims, fov_k, sum}`.
pub fn write_density(path: &Path, p: &DensityGrid) -> Result<()> {
    write_f64_le(path, p.values().iter().copied())?;
    write_json(
        &sidecar_path(path),
        &DensitySidecar {
            dims: p.grid().dims().to_vec(),
            fov_k: p.grid().fov_k().to_vec(),
            sum: p.values().iter().sum(),
        },
    )
}

pub fn read_density(path: &Path) -> Result<DensityGrid> {
    let side: DensitySidecar = read_json(&sidecar_path(path))?;
    let grid = Grid::new(side.dims, side.fov_k)?;
    DensityGrid::from_weights(grid, read_f64_le(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub dims: Vec<usize>,
    pub scale: f64,
    /// Interleaved real/imaginary parts when set.
    #[serde(default)]
    pub complex: bool,
}

/// Raw little-endian f64 image with a JSON sidecar `{dims, scale, complex}`.
pub fn write_image_raw(path: &Path, img: &ImageVolume, complex: bool) -> Result<()> {
    if complex {
        write_f64_le(path, img.data().iter().flat_map(|v| [v.re, v.im]))?;
    } else {
        write_f64_le(path, img.data().iter().map(|v| v.re))?;
    }
    write_json(
        &sidecar_path(path),
        &ImageSidecar {
            dims: img.dims().to_vec(),
            scale: img.scale,
            complex,
        },
    )
}

pub fn read_image_raw(path: &Path) -> Result<ImageVolume> {
    let side: ImageSidecar = read_json(&sidecar_path(path))?;
    let v = read_f64_le(path)?;
    let mut img = if side.complex {
        let data = v.chunks_exact(2).map(|c| num_complex::Complex64::new(c[0], c[1])).collect();
        ImageVolume::new(side.dims, data)?
    } else {
        ImageVolume::from_real(side.dims, v)?
    };
    img.scale = side.scale;
    Ok(img)
}

/// Binary PGM of `|x|` scaled so the maximum maps to the top grey level.
/// 3-D volumes are written as slices stacked vertically.
pub fn write_pgm(path: &Path, img: &ImageVolume, sixteen_bit: bool) -> Result<()> {
    let dims = img.dims();
    let cols = dims[dims.len() - 1];
    let rows = img.len() / cols;
    let mag = img.magnitude();
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    let maxval: u32 = if sixteen_bit { 65535 } else { 255 };
    let mut out = format!("P5\n{cols} {rows}\n{maxval}\n").into_bytes();
    for m in mag {
        let q = if peak > 0.0 { (m / peak * maxval as f64).round() as u32 } else { 0 };
        if sixteen_bit {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn pnm_tokens(bytes: &[u8], count: usize, what: &str) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::parse(what, "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    // exactly one whitespace byte separates the header from binary data
    Ok((tokens, i + 1))
}

/// Reads a P2 or P5 greymap (8 or 16 bit) as a real 2-D image in `[0, 1]`.
pub fn read_pgm(path: &Path) -> Result<ImageVolume> {
    let bytes = fs::read(path)?;
    let what = path.display().to_string();
    let (tok, off) = pnm_tokens(&bytes, 4, &what)?;
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(&what, e.to_string()));
    let (w, h, maxval) = (parse(&tok[1])?, parse(&tok[2])?, parse(&tok[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(&what, "maxval out of range"));
    }
    let n = w * h;
    let vals: Vec<f64> = match tok[0].as_str() {
        "P5" => {
            let bpp = if maxval > 255 { 2 } else { 1 };
            let data = bytes.get(off..off + n * bpp).ok_or_else(|| Error::parse(&what, "truncated pixel data"))?;
            if bpp == 1 {
                data.iter().map(|&b| b as f64).collect()
            } else {
                data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64).collect()
            }
        }
        "P2" => {
            let (all, _) = pnm_tokens(&bytes, 4 + n, &what)?;
            all[4..].iter().map(|s| parse(s).map(|v| v as f64)).collect::<Result<_>>()?
        }
        other => return Err(Error::parse(&what, format!("unsupported magic {other}"))),
    };
    let mut img = ImageVolume::from_real(vec![h, w], vals.iter().map(|v| v / maxval as f64).collect())?;
    img.scale = maxval as f64;
    Ok(img)
}

/// Binary PBM (P4); set bits are measured cells. 2-D masks only.
pub fn write_mask_pbm(path: &Path, mask: &SamplingMask) -> Result<()> {
    let dims = mask.dims();
    if dims.len() != 2 {
        return Err(Error::Shape("PBM masks must be 2-D; use the run-length format".into()));
    }
    let (h, w) = (dims[0], dims[1]);
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    for r in 0..h {
        let mut byte = 0u8;
        for c in 0..w {
            if mask.get(r * w + c) {
                byte |= 0x80 >> (c % 8);
            }
            if c % 8 == 7 || c == w - 1 {
                out.push(byte);
                byte = 0;
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads P1 or P4 bitmaps.
pub fn read_mask_pbm(path: &Path) -> Result<SamplingMask> {
    let bytes = fs::read(path)?;
    let what = path.display().to_string();
    let (tok, off) = pnm_tokens(&bytes, 3, &what)?;
    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(&what, e.to_string()));
    let (w, h) = (parse(&tok[1])?, parse(&tok[2])?);
    let mut flags = vec![false; w * h];
    match tok[0].as_str() {
        "P4" => {
            let stride = w.div_ceil(8);
            let data = bytes.get(off..off + stride * h).ok_or_else(|| Error::parse(&what, "truncated bitmap"))?;
            for r in 0..h {
                for c in 0..w {
                    flags[r * w + c] = data[r * stride + c / 8] & (0x80 >> (c % 8)) != 0;
                }
            }
        }
        "P1" => {
            let bits: Vec<u8> = bytes[off.min(bytes.len())..]
                .iter()
                .copied()
                .filter(|b| *b == b'0' || *b == b'1')
                .collect();
            if bits.len() < w * h {
                return Err(Error::parse(&what, "truncated bitmap"));
            }
            for (f, b) in flags.iter_mut().zip(bits) {
                *f = b == b'1';
            }
        }
        other => return Err(Error::parse(&what, format!("unsupported magic {other}"))),
    }
    SamplingMask::new(vec![h, w], flags)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRle {
    pub dims: Vec<usize>,
    /// `[start, length]` runs of measured cells in flat order.
    pub runs: Vec<[usize; 2]>,
}

impl MaskRle {
    pub fn encode(mask: &SamplingMask) -> Self {
        let mut runs = Vec::new();
        let mut i = 0;
        let f = mask.flags();
        while i < f.len() {
            if f[i] {
                let start = i;
                while i < f.len() && f[i] {
                    i += 1;
                }
                runs.push([start, i - start]);
            } else {
                i += 1;
            }
        }
        MaskRle { dims: mask.dims().to_vec(), runs }
    }

    pub fn decode(&self) -> Result<SamplingMask> {
        let n: usize = self.dims.iter().product();
        let mut flags = vec![false; n];
        for &[s, l] in &self.runs {
            let run = flags
                .get_mut(s..s + l)
                .ok_or_else(|| Error::parse("mask runs", format!("run {s}+{l} exceeds {n} cells")))?;
            run.iter_mut().for_each(|f| *f = true);
        }
        SamplingMask::new(self.dims.clone(), flags)
    }
}

pub fn write_mask_rle(path: &Path, mask: &SamplingMask) -> Result<()> {
    write_json(path, &MaskRle::encode(mask))
}

pub fn read_mask_rle(path: &Path) -> Result<SamplingMask> {
    read_json::<MaskRle>(path)?.decode()
}
