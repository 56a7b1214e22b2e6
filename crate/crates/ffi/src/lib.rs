//! C ABI over `equinet`.
//!
//! Objects cross the boundary as opaque handles (`EqSignal`, `EqChargeNet`,
//! `EqSymNet`) created by `*_new`/`*_random`/`*_from_json` and released with
//! the matching `*_free`. Every fallible call returns an [`EqStatus`]; on
//! failure [`eq_last_error`] describes it. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use equinet::charge::{self, ChargeConvNetSpec};
use equinet::invariant::{power_sums, symmetric_net_eval, Activation, SymNetWeights};
use equinet::local_ops::{kernel_gap, stencil_apply, StencilKind};
use equinet::{Error, FieldType, GridSpec, Signal};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    ShapeMismatch = 4,
    ChargeViolation = 5,
    Parse = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqStencil {
    Dz = 0,
    Dzbar = 1,
    Laplace = 2,
    Smooth = 3,
}

impl From<EqStencil> for StencilKind {
    fn from(s: EqStencil) -> Self {
        match s {
            EqStencil::Dz => StencilKind::Dz,
            EqStencil::Dzbar => StencilKind::Dzbar,
            EqStencil::Laplace => StencilKind::Laplace,
            EqStencil::Smooth => StencilKind::Smooth,
        }
    }
}

/// One row of the kernel-gap sweep.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EqKernelGap {
    pub gap: f64,
    pub kernel_l2: f64,
    pub mass_error: f64,
    pub grid_half_width: usize,
}

/// A sampled signal on a centred square grid.
pub struct EqSignal(Signal);

/// A charge-labeled convnet.
pub struct EqChargeNet(ChargeConvNetSpec);

/// A permutation-invariant net over `n` points.
pub struct EqSymNet {
    weights: SymNetWeights,
    n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EqStatus {
    match e {
        Error::InvalidParameter(_) | Error::DegreeGuard { .. } | Error::UnsupportedField(_) | Error::OutsideFundamentalDomain { .. } => {
            EqStatus::InvalidArgument
        }
        Error::GridMismatch(_) | Error::GridTooSmall { .. } => EqStatus::GridMismatch,
        Error::ShapeMismatch(_) => EqStatus::ShapeMismatch,
        Error::ChargeViolation(_) => EqStatus::ChargeViolation,
        Error::Config(_) | Error::Json(_) | Error::Io(_) => EqStatus::Parse,
        _ => EqStatus::Numerical,
    }
}

struct Fail(EqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(EqStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EqStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            EqStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(EqStatus::InvalidArgument, format!("{what} is not UTF-8: {e}")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).map_err(|e| Fail(EqStatus::Numerical, e.to_string()))?.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn eq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// Signals.

/// Builds a signal from `len = (2·half_width+1)²·channels` values in
/// row-major `(kx, ky, channel)` order. `im` may be null for a real signal.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn eq_signal_new(
    spacing: f64,
    half_width: usize,
    channels: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut EqSignal,
) -> EqStatus {
    guard(|| {
        let grid = GridSpec::new(spacing, half_width)?;
        let re = slice(re, len, "re")?;
        let (field, values) = if im.is_null() {
            (FieldType::Real, re.iter().map(|&r| Complex64::new(r, 0.0)).collect())
        } else {
            let im = slice(im, len, "im")?;
            (FieldType::Complex, re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect())
        };
        put(out, EqSignal(Signal::new(grid, channels, field, values)?))
    })
}

/// # Safety
/// `s` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eq_signal_free(s: *mut EqSignal) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes spacing, half-width, channel count and value count.
///
/// # Safety
/// All pointers must be valid; `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn eq_signal_shape(
    s: *const EqSignal,
    spacing: *mut f64,
    half_width: *mut usize,
    channels: *mut usize,
    len: *mut usize,
) -> EqStatus {
    guard(|| {
        let s = &deref(s, "signal")?.0;
        if spacing.is_null() || half_width.is_null() || channels.is_null() || len.is_null() {
            return Err(null("shape output"));
        }
        *spacing = s.grid().spacing();
        *half_width = s.grid().half_width();
        *channels = s.channels();
        *len = s.values().len();
        Ok(())
    })
}

/// Copies the values out in the layout of [`eq_signal_new`]. `im` may be null.
///
/// # Safety
/// `re` (and `im` when non-null) must have room for `len` doubles, and `len`
/// must equal the signal's value count.
#[no_mangle]
pub unsafe extern "C" fn eq_signal_values(s: *const EqSignal, re: *mut f64, im: *mut f64, len: usize) -> EqStatus {
    guard(|| {
        let s = &deref(s, "signal")?.0;
        if len != s.values().len() {
            return Err(Fail(EqStatus::ShapeMismatch, format!("buffer holds {len} values, signal has {}", s.values().len())));
        }
        if re.is_null() {
            return Err(null("re"));
        }
        for (k, v) in s.values().iter().enumerate() {
            *re.add(k) = v.re;
            if !im.is_null() {
                *im.add(k) = v.im;
            }
        }
        Ok(())
    })
}

/// Node `m` of the result holds node `m − (kx, ky)` of `s`, zero-filled.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_signal_translate(s: *const EqSignal, kx: i64, ky: i64, out: *mut *mut EqSignal) -> EqStatus {
    guard(|| put(out, EqSignal(deref(s, "signal")?.0.translate([kx, ky]))))
}

/// Rotates by `q` quarter turns counterclockwise.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_signal_rotate_quarter(s: *const EqSignal, q: i64, out: *mut *mut EqSignal) -> EqStatus {
    guard(|| put(out, EqSignal(deref(s, "signal")?.0.rotate_quarter(q))))
}

/// Applies a five-point stencil; the result has half-width one less.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_stencil_apply(kind: EqStencil, s: *const EqSignal, out: *mut *mut EqSignal) -> EqStatus {
    guard(|| put(out, EqSignal(stencil_apply(kind.into(), &deref(s, "signal")?.0)?)))
}

/// L² distance between the discrete and continuum derivative kernels.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_kernel_gap(a: u32, b: u32, lambda: f64, out: *mut EqKernelGap) -> EqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = kernel_gap(a, b, lambda)?;
        *out = EqKernelGap { gap: g.gap, kernel_l2: g.kernel_l2, mass_error: g.mass_error, grid_half_width: g.grid_half_width };
        Ok(())
    })
}

// Charge-labeled convnet.

/// Random net with dense weights drawn from `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn eq_charge_net_random(
    lambda: f64,
    cutoff: f64,
    t_diff: u32,
    t_mult: usize,
    d_mult: usize,
    d_in: usize,
    d_out: usize,
    seed: u64,
    out: *mut *mut EqChargeNet,
) -> EqStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        put(out, EqChargeNet(ChargeConvNetSpec::random(lambda, cutoff, t_diff, t_mult, d_mult, d_in, d_out, &mut rng)?))
    })
}

/// Parses a net from its JSON form. Charge-rule violations fail with
/// [`EqStatus::ChargeViolation`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_charge_net_from_json(json: *const c_char, out: *mut *mut EqChargeNet) -> EqStatus {
    guard(|| put(out, EqChargeNet(ChargeConvNetSpec::from_json(c_str(json, "json")?)?)))
}

/// Serializes the net; release the string with [`eq_string_free`].
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_charge_net_to_json(net: *const EqChargeNet, out: *mut *mut c_char) -> EqStatus {
    guard(|| put_string(out, deref(net, "net")?.0.to_json()))
}

/// Half-width the input signal must have.
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_charge_net_input_half_width(net: *const EqChargeNet, out: *mut usize) -> EqStatus {
    guard(|| {
        let n = deref(net, "net")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = n.0.input_half_width();
        Ok(())
    })
}

/// Runs the net on a signal with the net's spacing and input half-width.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_charge_net_forward(net: *const EqChargeNet, input: *const EqSignal, out: *mut *mut EqSignal) -> EqStatus {
    guard(|| put(out, EqSignal(charge::forward_signal(&deref(net, "net")?.0, &deref(input, "input")?.0)?)))
}

/// # Safety
/// `net` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eq_charge_net_free(net: *mut EqChargeNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

// Permutation-invariant net.

/// Random net for `n` points in `ℝ^m` with `t1` outer and `t2` inner units.
/// Outer weights are drawn too, so the net is not identically zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eq_symnet_random(t1: usize, t2: usize, m: usize, n: usize, seed: u64, out: *mut *mut EqSymNet) -> EqStatus {
    guard(|| {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = SymNetWeights::random(t1, t2, m, n, Activation::Tanh, &mut rng);
        weights.c = (0..t1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        weights.validate()?;
        put(out, EqSymNet { weights, n })
    })
}

/// Parses weights from JSON (fields `t1, t2, m, c, h, w, b, e, a`, optional
/// `activation`) for `n` points.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_symnet_from_json(json: *const c_char, n: usize, out: *mut *mut EqSymNet) -> EqStatus {
    guard(|| {
        let weights: SymNetWeights = serde_json::from_str(c_str(json, "json")?).map_err(Error::from)?;
        weights.validate()?;
        put(out, EqSymNet { weights, n })
    })
}

/// Evaluates on `x`, row-major `(n, m)` with `len = n·m`.
///
/// # Safety
/// `x` must hold `len` doubles; `net` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eq_symnet_eval(net: *const EqSymNet, x: *const f64, len: usize, out: *mut f64) -> EqStatus {
    guard(|| {
        let net = deref(net, "net")?;
        let x = slice(x, len, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = symmetric_net_eval(&net.weights, x, net.n)?;
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eq_symnet_free(net: *mut EqSymNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Power sums `p_k = Σ y_i^k` for `k = 1..n`; `out` holds `n` doubles.
///
/// # Safety
/// `y` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn eq_power_sums(y: *const f64, n: usize, out: *mut f64) -> EqStatus {
    guard(|| {
        let y = slice(y, n, "y")?;
        if n > 0 && out.is_null() {
            return Err(null("out"));
        }
        for (k, v) in power_sums(y).into_iter().enumerate() {
            *out.add(k) = v;
        }
        Ok(())
    })
}
