//! C ABI for kspace-forge.
//!
//! Objects cross the boundary as opaque handles created by `kf_*_new` and
//! released by the matching `kf_*_free`. Every fallible call returns a
//! [`KfStatus`]; on failure the message is available from
//! [`kf_last_error_message`] on the same thread until the next failing call.
//! Buffers are caller-owned and passed as pointer plus capacity.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kspace_forge::cs_sim::{psnr, rasterize_mask, ImageVolume};
use kspace_forge::density::PointCloud;
use kspace_forge::kinematics::{check_admissible, derive_limits};
use kspace_forge::projection::{project_curve, ProjectionOptions};
use kspace_forge::reparam::{segment_time, time_optimal_polyline};
use kspace_forge::tour::{solve_tsp, Polyline, TspOptions};
use kspace_forge::{Curve, Error, Grid, HardwareLimits, KinematicLimits, NormMode};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidLimits = 3,
    Shape = 4,
    Infeasible = 5,
    NonConvergence = 6,
    TooCoarse = 7,
    DuplicatePoints = 8,
    BufferTooSmall = 9,
    Panic = 10,
    Other = 11,
}

/// Norm applied to speed and acceleration vectors.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KfNormMode {
    /// Euclidean norm of the vector.
    RotationInvariant = 0,
    /// Largest component: each gradient axis is limited on its own.
    RotationVariant = 1,
}

fn norm_mode(raw: u32) -> Result<NormMode, Fail> {
    match raw {
        x if x == KfNormMode::RotationInvariant as u32 => Ok(NormMode::RotationInvariant),
        x if x == KfNormMode::RotationVariant as u32 => Ok(NormMode::RotationVariant),
        _ => Err(Fail::Status(KfStatus::InvalidArgument, format!("unknown norm mode {raw}"))),
    }
}

/// Speed bound `alpha` and acceleration bound `beta` in k-space units.
///
/// Constructors take the norm mode as a `KfNormMode` value passed as `uint32_t`.
pub struct KfLimits {
    inner: KinematicLimits,
}

/// Sampled curve: `len` points of dimension `dim`, `dt` seconds apart.
pub struct KfCurve {
    inner: Curve,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KfAdmissibility {
    pub max_speed_ratio: f64,
    pub max_accel_ratio: f64,
    pub admissible: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KfProjectionOptions {
    /// 0 selects the default cap.
    pub max_iter: usize,
    pub tol_rel: f64,
    pub pin_endpoints: bool,
    pub check_every: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KfProjectionDiagnostics {
    pub iterations: usize,
    pub final_gap: f64,
    pub objective: f64,
    pub max_speed_ratio: f64,
    pub max_accel_ratio: f64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KfStatus {
    match e {
        Error::InvalidLimits(_) => KfStatus::InvalidLimits,
        Error::Shape(_) => KfStatus::Shape,
        Error::InvalidArgument(_) | Error::DegenerateDensity(_) | Error::EmptyMask | Error::Config { .. } => {
            KfStatus::InvalidArgument
        }
        Error::Infeasible(_) => KfStatus::Infeasible,
        Error::NonConvergence(_) => KfStatus::NonConvergence,
        Error::TooCoarse { .. } => KfStatus::TooCoarse,
        Error::DuplicatePoints { .. } => KfStatus::DuplicatePoints,
        _ => KfStatus::Other,
    }
}

enum Fail {
    Status(KfStatus, String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(KfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KfStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            KfStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for reads of `len` elements.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for writes of `len` elements.
unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn check_capacity(need: usize, cap: usize, what: &str) -> Result<(), Fail> {
    if cap < need {
        return Err(Fail::Status(
            KfStatus::BufferTooSmall,
            format!("{what} needs {need} elements, capacity is {cap}"),
        ));
    }
    Ok(())
}

/// Message of the last failing call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn kf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Limits from `alpha` (m⁻¹·s⁻¹) and `beta` (m⁻¹·s⁻²).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn kf_limits_new(alpha: f64, beta: f64, mode: u32, out: *mut *mut KfLimits) -> KfStatus {
    guard(|| {
        let inner = KinematicLimits::new(alpha, beta, norm_mode(mode)?)?;
        write_out(out, Box::into_raw(Box::new(KfLimits { inner })), "out")
    })
}

/// Limits from scanner figures: `g_max` in T/m, `s_max` in T/m/ms, `gamma` in Hz/T.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn kf_limits_from_hardware(
    g_max: f64,
    s_max: f64,
    gamma: f64,
    mode: u32,
    out: *mut *mut KfLimits,
) -> KfStatus {
    guard(|| {
        let hw = HardwareLimits { g_max, s_max, gamma, norm_mode: norm_mode(mode)? };
        let inner = derive_limits(&hw)?;
        write_out(out, Box::into_raw(Box::new(KfLimits { inner })), "out")
    })
}

/// # Safety
/// `limits` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_limits_alpha(limits: *const KfLimits) -> f64 {
    limits.as_ref().map_or(f64::NAN, |l| l.inner.alpha)
}

/// # Safety
/// `limits` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_limits_beta(limits: *const KfLimits) -> f64 {
    limits.as_ref().map_or(f64::NAN, |l| l.inner.beta)
}

/// # Safety
/// `limits` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kf_limits_free(limits: *mut KfLimits) {
    if !limits.is_null() {
        drop(Box::from_raw(limits));
    }
}

fn curve_handle(inner: Curve) -> *mut KfCurve {
    Box::into_raw(Box::new(KfCurve { inner }))
}

/// Curve from `n_points · dim` row-major coordinates.
///
/// # Safety
/// `positions` must be valid for `n_points · dim` reads; `out` for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_new(
    dim: usize,
    dt: f64,
    positions: *const f64,
    n_points: usize,
    out: *mut *mut KfCurve,
) -> KfStatus {
    guard(|| {
        let len = n_points.checked_mul(dim).ok_or_else(|| Error::Shape("size overflow".into()))?;
        let pos = slice(positions, len, "positions")?;
        let c = Curve::new(dim, dt, pos.to_vec())?;
        write_out(out, curve_handle(c), "out")
    })
}

/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_len(curve: *const KfCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_dim(curve: *const KfCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.inner.dim())
}

/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_dt(curve: *const KfCurve) -> f64 {
    curve.as_ref().map_or(f64::NAN, |c| c.inner.dt())
}

/// `(len − 1) · dt`, s.
///
/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_duration(curve: *const KfCurve) -> f64 {
    curve.as_ref().map_or(f64::NAN, |c| c.inner.duration())
}

/// Copies the `len · dim` coordinates into `buf`.
///
/// # Safety
/// `curve` must be a live handle and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_positions(curve: *const KfCurve, buf: *mut f64, cap: usize) -> KfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        let src = c.as_flat();
        check_capacity(src.len(), cap, "positions")?;
        slice_mut(buf, src.len(), "buf")?.copy_from_slice(src);
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kf_curve_free(curve: *mut KfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Largest speed and acceleration relative to the limits.
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kf_check_admissible(
    curve: *const KfCurve,
    limits: *const KfLimits,
    tol: f64,
    out: *mut KfAdmissibility,
) -> KfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        let l = &deref(limits, "limits")?.inner;
        let r = check_admissible(c, l, tol);
        write_out(
            out,
            KfAdmissibility {
                max_speed_ratio: r.max_speed_ratio,
                max_accel_ratio: r.max_accel_ratio,
                admissible: r.admissible,
            },
            "out",
        )
    })
}

#[no_mangle]
pub extern "C" fn kf_projection_options_default() -> KfProjectionOptions {
    let d = ProjectionOptions::default();
    KfProjectionOptions {
        max_iter: 0,
        tol_rel: d.tol_rel,
        pin_endpoints: d.pin_endpoints,
        check_every: d.check_every,
    }
}

/// Closest admissible curve with the same sample count and step.
///
/// Returns `KF_STATUS_OK` even when the gap target was not met; check
/// `diagnostics.converged`. `options` and `diagnostics` may be null.
///
/// # Safety
/// Handles must be live; non-null pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kf_project_curve(
    curve: *const KfCurve,
    limits: *const KfLimits,
    options: *const KfProjectionOptions,
    out: *mut *mut KfCurve,
    diagnostics: *mut KfProjectionDiagnostics,
) -> KfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        let l = &deref(limits, "limits")?.inner;
        let o = options.as_ref().copied().unwrap_or_else(|| kf_projection_options_default());
        let opts = ProjectionOptions {
            max_iter: (o.max_iter > 0).then_some(o.max_iter),
            tol_rel: o.tol_rel,
            pin_endpoints: o.pin_endpoints,
            check_every: o.check_every,
            ..Default::default()
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let (p, diag) = project_curve(c, l, &opts)?;
        if let Some(d) = diagnostics.as_mut() {
            *d = KfProjectionDiagnostics {
                iterations: diag.iterations,
                final_gap: diag.final_gap,
                objective: diag.objective,
                max_speed_ratio: diag.max_speed_ratio,
                max_accel_ratio: diag.max_accel_ratio,
                converged: diag.converged,
            };
        }
        write_out(out, curve_handle(p), "out")
    })
}

/// Rest-to-rest minimum time over a straight move of `length`.
///
/// # Safety
/// `limits` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kf_segment_time(length: f64, limits: *const KfLimits, out: *mut f64) -> KfStatus {
    guard(|| {
        let l = &deref(limits, "limits")?.inner;
        write_out(out, segment_time(length, l)?.duration, "out")
    })
}

/// Time-optimal traversal of a polyline stopping at every vertex.
/// `t_oc` (nullable) receives the exact traversal time.
///
/// # Safety
/// `vertices` must be valid for `n_vertices · dim` reads; other pointers as documented.
#[no_mangle]
pub unsafe extern "C" fn kf_time_optimal_polyline(
    vertices: *const f64,
    n_vertices: usize,
    dim: usize,
    limits: *const KfLimits,
    dt: f64,
    out: *mut *mut KfCurve,
    t_oc: *mut f64,
) -> KfStatus {
    guard(|| {
        let len = n_vertices.checked_mul(dim).ok_or_else(|| Error::Shape("size overflow".into()))?;
        let v = slice(vertices, len, "vertices")?;
        let l = &deref(limits, "limits")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let poly = Polyline::new(dim, v.to_vec())?;
        let (c, rep) = time_optimal_polyline(&poly, l, dt)?;
        if let Some(t) = t_oc.as_mut() {
            *t = rep.t_oc_s;
        }
        write_out(out, curve_handle(c), "out")
    })
}

/// Short tour through `n_points` distinct points; writes the visiting order.
/// An open tour is a path; a closed one returns to its start.
///
/// # Safety
/// `points` must be valid for `n_points · dim` reads and `order` for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn kf_solve_tsp(
    points: *const f64,
    n_points: usize,
    dim: usize,
    open: bool,
    seed: u64,
    order: *mut usize,
    cap: usize,
) -> KfStatus {
    guard(|| {
        let len = n_points.checked_mul(dim).ok_or_else(|| Error::Shape("size overflow".into()))?;
        let pts = slice(points, len, "points")?;
        check_capacity(n_points, cap, "order")?;
        let out = slice_mut(order, n_points, "order")?;
        let pc = PointCloud::new(dim, pts.to_vec(), seed)?;
        let tour = solve_tsp(&pc, &TspOptions { open, ..Default::default() }, seed)?;
        out.copy_from_slice(&tour.order);
        Ok(())
    })
}

/// Cells of a `dims` grid (pixel size `resolution_m`) crossed by the curve,
/// as 0/1 flags in row-major order. `count` (nullable) receives the number set.
///
/// # Safety
/// `dims` must be valid for `ndim` reads and `flags` for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn kf_rasterize_mask(
    curve: *const KfCurve,
    dims: *const usize,
    ndim: usize,
    resolution_m: f64,
    flags: *mut u8,
    cap: usize,
    count: *mut usize,
) -> KfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        let dims = slice(dims, ndim, "dims")?;
        let grid = Grid::from_resolution(dims.to_vec(), resolution_m)?;
        let mask = rasterize_mask(c, &grid)?;
        check_capacity(mask.len(), cap, "flags")?;
        let out = slice_mut(flags, mask.len(), "flags")?;
        for (o, &f) in out.iter_mut().zip(mask.flags()) {
            *o = f as u8;
        }
        if let Some(n) = count.as_mut() {
            *n = mask.count();
        }
        Ok(())
    })
}

/// PSNR in dB of real image `test` against `reference`, both `n` values.
/// Identical images give +infinity.
///
/// # Safety
/// Both images must be valid for `n` reads and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn kf_psnr(reference: *const f64, test: *const f64, n: usize, out: *mut f64) -> KfStatus {
    guard(|| {
        let a = ImageVolume::from_real(vec![n], slice(reference, n, "reference")?.to_vec())?;
        let b = ImageVolume::from_real(vec![n], slice(test, n, "test")?.to_vec())?;
        write_out(out, psnr(&a, &b)?, "out")
    })
}
