//! C ABI over `chaos_bounds`.
//!
//! Tensors live behind the opaque `CbTensor` handle. Every fallible call
//! returns a `CbStatus`; on failure the message is available from
//! `cb_last_error` until the next failing call on the same thread. Strings
//! returned through out-parameters are owned by the caller and released with
//! `cb_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chaos_bounds::bounds::{lower_sum, tail_exponent_lower, tail_exponent_upper, upper_sum};
use chaos_bounds::monte_carlo::{empirical_moment, Chaos};
use chaos_bounds::norms::mixed_norm;
use chaos_bounds::{CoeffTensor, Error, MCConfig, OptimizerConfig, PartitionPair, ValueSpace};

/// Opaque tensor handle.
pub struct CbTensor(CoeffTensor);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Unsupported = 4,
    Parse = 5,
    Numeric = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbSide {
    Upper = 0,
    Lower = 1,
}

/// Optimizer and sampling settings; pass NULL for the defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CbOptions {
    pub seed: u64,
    pub restarts: usize,
    pub saa_samples: usize,
    pub eval_samples: usize,
    /// Monte-Carlo draws for empirical moments.
    pub samples: usize,
}

impl Default for CbOptions {
    fn default() -> Self {
        let cfg = OptimizerConfig::default();
        CbOptions {
            seed: cfg.seed,
            restarts: cfg.restarts,
            saa_samples: cfg.saa_samples,
            eval_samples: cfg.eval_samples,
            samples: MCConfig::default().samples,
        }
    }
}

impl CbOptions {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            seed: self.seed,
            restarts: self.restarts,
            saa_samples: self.saa_samples,
            eval_samples: self.eval_samples,
            ..OptimizerConfig::default()
        }
    }

    fn mc(&self, p: f64) -> MCConfig {
        MCConfig {
            samples: self.samples,
            p_values: vec![p],
            seed: self.seed,
            ..MCConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
    Utf8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> CbStatus {
    match e {
        Error::Dimension(_) => CbStatus::Dimension,
        Error::InvalidArgument(_) => CbStatus::InvalidArgument,
        Error::Unsupported(_) => CbStatus::Unsupported,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => CbStatus::Parse,
        Error::Numeric(_) => CbStatus::Numeric,
        Error::Io(_) => CbStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CbStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            CbStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string argument is not valid UTF-8");
            CbStatus::Parse
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            CbStatus::Panic
        }
    }
}

unsafe fn tensor<'a>(t: *const CbTensor) -> Result<&'a CoeffTensor, Failure> {
    t.as_ref().map(|t| &t.0).ok_or(Failure::Null("tensor"))
}

unsafe fn string<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn options(o: *const CbOptions) -> CbOptions {
    o.as_ref().copied().unwrap_or_default()
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn cb_default_options() -> CbOptions {
    CbOptions::default()
}

/// Parses a tensor document `{"d","n","m","space","values"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cb_tensor_from_json(json: *const c_char, out: *mut *mut CbTensor) -> CbStatus {
    guard(|| {
        let text = string(json, "json")?;
        let t = chaos_bounds::io::tensor_from_json(text)?;
        put(out, Box::into_raw(Box::new(CbTensor(t))), "out")
    })
}

/// Builds a tensor with values in weighted `L_q` of dimension `m`. `values`
/// holds `n^d * m` entries, row-major with the value axis innermost.
///
/// # Safety
/// `values` must point to `n^d * m` doubles, `weights` to `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn cb_tensor_new_lq(
    d: usize,
    n: usize,
    m: usize,
    values: *const f64,
    q: f64,
    weights: *const f64,
    out: *mut *mut CbTensor,
) -> CbStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        if weights.is_null() {
            return Err(Failure::Null("weights"));
        }
        let len = n
            .checked_pow(d as u32)
            .and_then(|x| x.checked_mul(m))
            .ok_or_else(|| Error::InvalidArgument("tensor too large".into()))?;
        let values = std::slice::from_raw_parts(values, len).to_vec();
        let weights = std::slice::from_raw_parts(weights, m).to_vec();
        let space = ValueSpace::lq(q, weights)?;
        let t = CoeffTensor::new(d, n, m, values, space)?;
        put(out, Box::into_raw(Box::new(CbTensor(t))), "out")
    })
}

/// # Safety
/// `t` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cb_tensor_free(t: *mut CbTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Order `d`, or 0 for NULL.
///
/// # Safety
/// `t` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_tensor_order(t: *const CbTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.order())
}

/// Index range `n`, or 0 for NULL.
///
/// # Safety
/// `t` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_tensor_dim(t: *const CbTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.dim())
}

/// `||A||_{P'|P}` for a pair written `P'|P`, e.g. `{1}|{2,3}`.
///
/// # Safety
/// Pointers must be valid; `opts` may be NULL, `stderr_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_mixed_norm(
    t: *const CbTensor,
    pair: *const c_char,
    opts: *const CbOptions,
    value_out: *mut f64,
    stderr_out: *mut f64,
) -> CbStatus {
    guard(|| {
        let a = tensor(t)?;
        let pair: PartitionPair = string(pair, "pair")?.parse()?;
        pair.validate(a.order())?;
        let est = mixed_norm(a, &pair, &options(opts).optimizer())?;
        if !stderr_out.is_null() {
            stderr_out.write(est.stderr);
        }
        put(value_out, est.value, "value_out")
    })
}

unsafe fn structural(
    t: *const CbTensor,
    p: f64,
    side: CbSide,
    opts: *const CbOptions,
) -> Result<chaos_bounds::BoundReport, Failure> {
    let a = tensor(t)?;
    let cfg = options(opts).optimizer();
    Ok(match side {
        CbSide::Upper => upper_sum(a, p, &cfg)?,
        CbSide::Lower => lower_sum(a, p, &cfg)?,
    })
}

/// Structural sum of the upper or lower moment bound at order `p`.
///
/// # Safety
/// Pointers must be valid; `opts` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_structural_sum(
    t: *const CbTensor,
    p: f64,
    side: CbSide,
    opts: *const CbOptions,
    out: *mut f64,
) -> CbStatus {
    guard(|| {
        let r = structural(t, p, side, opts)?;
        put(out, r.structural_sum, "out")
    })
}

/// The full bound report (terms, sum, constants, optimizer) as JSON. Free
/// the string with `cb_string_free`.
///
/// # Safety
/// Pointers must be valid; `opts` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_report_json(
    t: *const CbTensor,
    p: f64,
    side: CbSide,
    opts: *const CbOptions,
    out: *mut *mut c_char,
) -> CbStatus {
    guard(|| {
        let r = structural(t, p, side, opts)?;
        let text = serde_json::to_string(&r).map_err(Error::from)?;
        let c = CString::new(text).map_err(|_| Error::Numeric("report contains NUL".into()))?;
        put(out, c.into_raw(), "out")
    })
}

/// Upper or lower tail exponent at level `level`.
///
/// # Safety
/// Pointers must be valid; `opts` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_tail_exponent(
    t: *const CbTensor,
    level: f64,
    side: CbSide,
    opts: *const CbOptions,
    out: *mut f64,
) -> CbStatus {
    guard(|| {
        let a = tensor(t)?;
        let cfg = options(opts).optimizer();
        let e = match side {
            CbSide::Upper => tail_exponent_upper(a, level, &cfg)?,
            CbSide::Lower => tail_exponent_lower(a, level, &cfg)?,
        };
        put(out, e.exponent, "out")
    })
}

/// `(E ||S'||^p)^{1/p}` of the decoupled chaos by sampling.
///
/// # Safety
/// Pointers must be valid; `opts` may be NULL, `stderr_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn cb_empirical_moment(
    t: *const CbTensor,
    p: f64,
    opts: *const CbOptions,
    value_out: *mut f64,
    stderr_out: *mut f64,
) -> CbStatus {
    guard(|| {
        let a = tensor(t)?;
        let est = empirical_moment(&Chaos::Decoupled(a), &options(opts).mc(p))?.remove(0);
        if !stderr_out.is_null() {
            stderr_out.write(est.stderr);
        }
        put(value_out, est.value, "value_out")
    })
}

/// # Safety
/// `s` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
