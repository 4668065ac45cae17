#ifndef KSPACE_FORGE_H
#define KSPACE_FORGE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum KfStatus {
  KF_STATUS_OK = 0,
  KF_STATUS_NULL_POINTER = 1,
  KF_STATUS_INVALID_ARGUMENT = 2,
  KF_STATUS_INVALID_LIMITS = 3,
  KF_STATUS_SHAPE = 4,
  KF_STATUS_INFEASIBLE = 5,
  KF_STATUS_NON_CONVERGENCE = 6,
  KF_STATUS_TOO_COARSE = 7,
  KF_STATUS_DUPLICATE_POINTS = 8,
  KF_STATUS_BUFFER_TOO_SMALL = 9,
  KF_STATUS_PANIC = 10,
  KF_STATUS_OTHER = 11,
} KfStatus;

/**
 * Norm applied to speed and acceleration vectors.
 */
typedef enum KfNormMode {
  /**
   * Euclidean norm of the vector.
   */
  KF_NORM_MODE_ROTATION_INVARIANT = 0,
  /**
   * Largest component: each gradient axis is limited on its own.
   */
  KF_NORM_MODE_ROTATION_VARIANT = 1,
} KfNormMode;

/**
 * Sampled curve: `len` points of dimension `dim`, `dt` seconds apart.
 */
typedef struct KfCurve KfCurve;

/**
 * Speed bound `alpha` and acceleration bound `beta` in k-space units.
 *
 * Constructors take the norm mode as a `KfNormMode` value passed as `uint32_t`.
 */
typedef struct KfLimits KfLimits;

typedef struct KfAdmissibility {
  double max_speed_ratio;
  double max_accel_ratio;
  bool admissible;
} KfAdmissibility;

typedef struct KfProjectionOptions {
  /**
   * 0 selects the default cap.
   */
  size_t max_iter;
  double tol_rel;
  bool pin_endpoints;
  size_t check_every;
} KfProjectionOptions;

typedef struct KfProjectionDiagnostics {
  size_t iterations;
  double final_gap;
  double objective;
  double max_speed_ratio;
  double max_accel_ratio;
  bool converged;
} KfProjectionDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *kf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kf_version(void);

/**
 * Limits from `alpha` (m⁻¹·s⁻¹) and `beta` (m⁻¹·s⁻²).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum KfStatus kf_limits_new(double alpha, double beta, uint32_t mode, struct KfLimits **out);

/**
 * Limits from scanner figures: `g_max` in T/m, `s_max` in T/m/ms, `gamma` in Hz/T.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum KfStatus kf_limits_from_hardware(double g_max,
                                      double s_max,
                                      double gamma,
                                      uint32_t mode,
                                      struct KfLimits **out);

/**
 * # Safety
 * `limits` must be a live handle.
 */
double kf_limits_alpha(const struct KfLimits *limits);

/**
 * # Safety
 * `limits` must be a live handle.
 */
double kf_limits_beta(const struct KfLimits *limits);

/**
 * # Safety
 * `limits` must be null or a handle from this library not yet freed.
 */
void kf_limits_free(struct KfLimits *limits);

/**
 * Curve from `n_points · dim` row-major coordinates.
 *
 * # Safety
 * `positions` must be valid for `n_points · dim` reads; `out` for a pointer write.
 */
enum KfStatus kf_curve_new(size_t dim,
                           double dt,
                           const double *positions,
                           size_t n_points,
                           struct KfCurve **out);

/**
 * # Safety
 * `curve` must be a live handle.
 */
size_t kf_curve_len(const struct KfCurve *curve);

/**
 * # Safety
 * `curve` must be a live handle.
 */
size_t kf_curve_dim(const struct KfCurve *curve);

/**
 * # Safety
 * `curve` must be a live handle.
 */
double kf_curve_dt(const struct KfCurve *curve);

/**
 * `(len − 1) · dt`, s.
 *
 * # Safety
 * `curve` must be a live handle.
 */
double kf_curve_duration(const struct KfCurve *curve);

/**
 * Copies the `len · dim` coordinates into `buf`.
 *
 * # Safety
 * `curve` must be a live handle and `buf` valid for `cap` writes.
 */
enum KfStatus kf_curve_positions(const struct KfCurve *curve, double *buf, size_t cap);

/**
 * # Safety
 * `curve` must be null or a handle from this library not yet freed.
 */
void kf_curve_free(struct KfCurve *curve);

/**
 * Largest speed and acceleration relative to the limits.
 *
 * # Safety
 * Handles must be live and `out` valid for a write.
 */
enum KfStatus kf_check_admissible(const struct KfCurve *curve,
                                  const struct KfLimits *limits,
                                  double tol,
                                  struct KfAdmissibility *out);

struct KfProjectionOptions kf_projection_options_default(void);

/**
 * Closest admissible curve with the same sample count and step.
 *
 * Returns `KF_STATUS_OK` even when the gap target was not met; check
 * `diagnostics.converged`. `options` and `diagnostics` may be null.
 *
 * # Safety
 * Handles must be live; non-null pointers must be valid.
 */
enum KfStatus kf_project_curve(const struct KfCurve *curve,
                               const struct KfLimits *limits,
                               const struct KfProjectionOptions *options,
                               struct KfCurve **out,
                               struct KfProjectionDiagnostics *diagnostics);

/**
 * Rest-to-rest minimum time over a straight move of `length`.
 *
 * # Safety
 * `limits` must be live and `out` valid for a write.
 */
enum KfStatus kf_segment_time(double length, const struct KfLimits *limits, double *out);

/**
 * Time-optimal traversal of a polyline stopping at every vertex.
 * `t_oc` (nullable) receives the exact traversal time.
 *
 * # Safety
 * `vertices` must be valid for `n_vertices · dim` reads; other pointers as documented.
 */
enum KfStatus kf_time_optimal_polyline(const double *vertices,
                                       size_t n_vertices,
                                       size_t dim,
                                       const struct KfLimits *limits,
                                       double dt,
                                       struct KfCurve **out,
                                       double *t_oc);

/**
 * Short tour through `n_points` distinct points; writes the visiting order.
 * An open tour is a path; a closed one returns to its start.
 *
 * # Safety
 * `points` must be valid for `n_points · dim` reads and `order` for `cap` writes.
 */
enum KfStatus kf_solve_tsp(const double *points,
                           size_t n_points,
                           size_t dim,
                           bool open,
                           uint64_t seed,
                           size_t *order,
                           size_t cap);

/**
 * Cells of a `dims` grid (pixel size `resolution_m`) crossed by the curve,
 * as 0/1 flags in row-major order. `count` (nullable) receives the number set.
 *
 * # Safety
 * `dims` must be valid for `ndim` reads and `flags` for `cap` writes.
 */
enum KfStatus kf_rasterize_mask(const struct KfCurve *curve,
                                const size_t *dims,
                                size_t ndim,
                                double resolution_m,
                                uint8_t *flags,
                                size_t cap,
                                size_t *count);

/**
 * PSNR in dB of real image `test` against `reference`, both `n` values.
 * Identical images give +infinity.
 *
 * # Safety
 * Both images must be valid for `n` reads and `out` for a write.
 */
enum KfStatus kf_psnr(const double *reference, const double *test, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSPACE_FORGE_H */
