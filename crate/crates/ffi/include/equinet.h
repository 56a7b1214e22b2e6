#ifndef EQUINET_H
#define EQUINET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum {
  EQ_STATUS_OK = 0,
  EQ_STATUS_NULL_POINTER = 1,
  EQ_STATUS_INVALID_ARGUMENT = 2,
  EQ_STATUS_GRID_MISMATCH = 3,
  EQ_STATUS_SHAPE_MISMATCH = 4,
  EQ_STATUS_CHARGE_VIOLATION = 5,
  EQ_STATUS_PARSE = 6,
  EQ_STATUS_NUMERICAL = 7,
  EQ_STATUS_PANIC = 8,
} EqStatus;

typedef enum {
  EQ_STENCIL_DZ = 0,
  EQ_STENCIL_DZBAR = 1,
  EQ_STENCIL_LAPLACE = 2,
  EQ_STENCIL_SMOOTH = 3,
} EqStencil;

/**
 * A charge-labeled convnet.
 */
typedef struct EqChargeNet EqChargeNet;

/**
 * A sampled signal on a centred square grid.
 */
typedef struct EqSignal EqSignal;

/**
 * A permutation-invariant net over `n` points.
 */
typedef struct EqSymNet EqSymNet;

/**
 * One row of the kernel-gap sweep.
 */
typedef struct {
  double gap;
  double kernel_l2;
  double mass_error;
  size_t grid_half_width;
} EqKernelGap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *eq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eq_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void eq_string_free(char *s);

/**
 * Builds a signal from `len = (2·half_width+1)²·channels` values in
 * row-major `(kx, ky, channel)` order. `im` may be null for a real signal.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `len` readable doubles.
 */
EqStatus eq_signal_new(double spacing,
                       size_t half_width,
                       size_t channels,
                       const double *re,
                       const double *im,
                       size_t len,
                       EqSignal **out);

/**
 * # Safety
 * `s` must be null or a live handle from this library.
 */
void eq_signal_free(EqSignal *s);

/**
 * Writes spacing, half-width, channel count and value count.
 *
 * # Safety
 * All pointers must be valid; `s` must be a live handle.
 */
EqStatus eq_signal_shape(const EqSignal *s,
                         double *spacing,
                         size_t *half_width,
                         size_t *channels,
                         size_t *len);

/**
 * Copies the values out in the layout of [`eq_signal_new`]. `im` may be null.
 *
 * # Safety
 * `re` (and `im` when non-null) must have room for `len` doubles, and `len`
 * must equal the signal's value count.
 */
EqStatus eq_signal_values(const EqSignal *s, double *re, double *im, size_t len);

/**
 * Node `m` of the result holds node `m − (kx, ky)` of `s`, zero-filled.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
EqStatus eq_signal_translate(const EqSignal *s, int64_t kx, int64_t ky, EqSignal **out);

/**
 * Rotates by `q` quarter turns counterclockwise.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
EqStatus eq_signal_rotate_quarter(const EqSignal *s, int64_t q, EqSignal **out);

/**
 * Applies a five-point stencil; the result has half-width one less.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
EqStatus eq_stencil_apply(EqStencil kind, const EqSignal *s, EqSignal **out);

/**
 * L² distance between the discrete and continuum derivative kernels.
 *
 * # Safety
 * `out` must be writable.
 */
EqStatus eq_kernel_gap(uint32_t a, uint32_t b, double lambda, EqKernelGap *out);

/**
 * Random net with dense weights drawn from `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
EqStatus eq_charge_net_random(double lambda,
                              double cutoff,
                              uint32_t t_diff,
                              size_t t_mult,
                              size_t d_mult,
                              size_t d_in,
                              size_t d_out,
                              uint64_t seed,
                              EqChargeNet **out);

/**
 * Parses a net from its JSON form. Charge-rule violations fail with
 * [`EqStatus::ChargeViolation`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
EqStatus eq_charge_net_from_json(const char *json, EqChargeNet **out);

/**
 * Serializes the net; release the string with [`eq_string_free`].
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
EqStatus eq_charge_net_to_json(const EqChargeNet *net, char **out);

/**
 * Half-width the input signal must have.
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
EqStatus eq_charge_net_input_half_width(const EqChargeNet *net, size_t *out);

/**
 * Runs the net on a signal with the net's spacing and input half-width.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
EqStatus eq_charge_net_forward(const EqChargeNet *net, const EqSignal *input, EqSignal **out);

/**
 * # Safety
 * `net` must be null or a live handle from this library.
 */
void eq_charge_net_free(EqChargeNet *net);

/**
 * Random net for `n` points in `ℝ^m` with `t1` outer and `t2` inner units.
 * Outer weights are drawn too, so the net is not identically zero.
 *
 * # Safety
 * `out` must be writable.
 */
EqStatus eq_symnet_random(size_t t1, size_t t2, size_t m, size_t n, uint64_t seed, EqSymNet **out);

/**
 * Parses weights from JSON (fields `t1, t2, m, c, h, w, b, e, a`, optional
 * `activation`) for `n` points.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
EqStatus eq_symnet_from_json(const char *json, size_t n, EqSymNet **out);

/**
 * Evaluates on `x`, row-major `(n, m)` with `len = n·m`.
 *
 * # Safety
 * `x` must hold `len` doubles; `net` must be live and `out` writable.
 */
EqStatus eq_symnet_eval(const EqSymNet *net, const double *x, size_t len, double *out);

/**
 * # Safety
 * `net` must be null or a live handle from this library.
 */
void eq_symnet_free(EqSymNet *net);

/**
 * Power sums `p_k = Σ y_i^k` for `k = 1..n`; `out` holds `n` doubles.
 *
 * # Safety
 * `y` and `out` must each hold `n` doubles.
 */
EqStatus eq_power_sums(const double *y, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EQUINET_H */
