//! C ABI over `aniso-core`.
//!
//! Objects are opaque handles created by `aniso_*_new`/`aniso_*_parse` and
//! released with the matching `aniso_*_free`. Every fallible call returns an
//! [`AnisoStatus`]; the message of the most recent failure on the calling
//! thread is available from [`aniso_last_error`]. Strings returned by the
//! library are owned by the caller and released with [`aniso_string_free`].
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use aniso_core::anisotropic::{check_aniso_convexity, check_aniso_smooth, dual_preconditioned_descent, AnisoCheckSpec, DescentOptions, DescentStatus};
use aniso_core::bregman::{check_b_convexity, check_b_smooth, CheckOptions};
use aniso_core::expr::Expr;
use aniso_core::funcs::{LegendrePair, PairSpec, ScalarFunction};
use aniso_core::report::{CheckReport, Verdict};
use aniso_core::sampling::SamplingPlan;
use aniso_core::{scenarios, Error};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnisoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Dimension = 5,
    InvalidArgument = 6,
    NotFound = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Verdict of a check report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnisoVerdict {
    Holds = 0,
    Violated = 1,
    Inconclusive = 2,
}

/// Class tested by [`aniso_check`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnisoClass {
    BWeak = 0,
    BStrong = 1,
    BSmooth = 2,
    AWeak = 3,
    AStrong = 4,
    ASmooth = 5,
}

/// Termination status of [`aniso_descend`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnisoDescentStatus {
    Converged = 0,
    MaxIter = 1,
    Diverged = 2,
}

/// Extended-real function of `arity` variables.
pub struct AnisoFunction(ScalarFunction);

/// Legendre reference pair.
pub struct AnisoPair(LegendrePair);

/// Finite sampling plan.
pub struct AnisoPlan(SamplingPlan);

/// Result of a sampled check.
pub struct AnisoReport(CheckReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(AnisoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Lex { .. } | Error::Parse { .. } => AnisoStatus::Parse,
            Error::Domain(_) | Error::Kink(_) | Error::Gradient(_) | Error::Improper | Error::NotProxBounded => AnisoStatus::Domain,
            Error::Dimension { .. } => AnisoStatus::Dimension,
            Error::UnknownPair(_) | Error::UnknownScenario(_) => AnisoStatus::NotFound,
            Error::InvalidParameter(_) | Error::EmptyPlan | Error::Config(_) => AnisoStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(AnisoStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, recording failures and containing panics.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> AnisoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            AnisoStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AnisoStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(AnisoStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn reals<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(s).map_err(|_| Fail(AnisoStatus::InvalidArgument, "string contains NUL".into()))?.into_raw();
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aniso_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn aniso_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an expression in `x1..x<arity>`; `arity = 0` infers it from the expression.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_function_parse(source: *const c_char, arity: usize, out: *mut *mut AnisoFunction) -> AnisoStatus {
    guard(|| {
        let e = Expr::parse_str(text(source, "source")?)?;
        let n = if arity == 0 { e.arity().max(1) } else { arity };
        if e.arity() > n {
            return Err(Error::Dimension { expected: n, got: e.arity() }.into());
        }
        put(out, AnisoFunction(ScalarFunction::from_expr_with_arity(n, e)))
    })
}

/// # Safety
/// `f` must be null or a handle from [`aniso_function_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_function_free(f: *mut AnisoFunction) {
    free(f)
}

/// # Safety
/// `f` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn aniso_function_arity(f: *const AnisoFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.arity())
}

/// Value at `x`; `+inf` outside the domain.
///
/// # Safety
/// `x` must point to `n` doubles and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_function_eval(f: *const AnisoFunction, x: *const f64, n: usize, value: *mut f64) -> AnisoStatus {
    guard(|| {
        let f = handle(f, "function")?;
        let x = reals(x, n, "x")?;
        if n != f.0.arity() {
            return Err(Error::Dimension { expected: f.0.arity(), got: n }.into());
        }
        if value.is_null() {
            return Err(null("value"));
        }
        *value = f.0.evaluate(x);
        Ok(())
    })
}

/// Gradient at a smooth point, written to `grad[0..n]`.
///
/// # Safety
/// `x` and `grad` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aniso_function_gradient(f: *const AnisoFunction, x: *const f64, n: usize, grad: *mut f64) -> AnisoStatus {
    guard(|| {
        let f = handle(f, "function")?;
        let x = reals(x, n, "x")?;
        if n != f.0.arity() {
            return Err(Error::Dimension { expected: f.0.arity(), got: n }.into());
        }
        if grad.is_null() {
            return Err(null("grad"));
        }
        let g = f.0.smooth_gradient(x).ok_or_else(|| Fail(AnisoStatus::Domain, "not a smooth point".into()))?;
        slice::from_raw_parts_mut(grad, n).copy_from_slice(&g);
        Ok(())
    })
}

/// Builds a reference pair from `name[:p1,p2,...]`; `dim = 0` uses the entry's default.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_new(spec: *const c_char, dim: usize, out: *mut *mut AnisoPair) -> AnisoStatus {
    guard(|| {
        let spec = PairSpec::parse(text(spec, "spec")?)?;
        let pair = spec.build(if dim == 0 { None } else { Some(dim) })?;
        put(out, AnisoPair(pair))
    })
}

/// # Safety
/// `p` must be null or a handle from [`aniso_pair_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_free(p: *mut AnisoPair) {
    free(p)
}

/// # Safety
/// `p` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_dim(p: *const AnisoPair) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

unsafe fn pair_scalar(p: *const AnisoPair, x: *const f64, n: usize, out: *mut f64, op: impl Fn(&LegendrePair, &[f64]) -> f64) -> AnisoStatus {
    guard(|| {
        let p = handle(p, "pair")?;
        let x = reals(x, n, "x")?;
        if n != p.0.dim() {
            return Err(Error::Dimension { expected: p.0.dim(), got: n }.into());
        }
        if out.is_null() {
            return Err(null("output"));
        }
        *out = op(&p.0, x);
        Ok(())
    })
}

unsafe fn pair_vector(
    p: *const AnisoPair,
    x: *const f64,
    n: usize,
    out: *mut f64,
    op: impl Fn(&LegendrePair, &[f64]) -> Vec<f64>,
) -> AnisoStatus {
    guard(|| {
        let p = handle(p, "pair")?;
        let x = reals(x, n, "x")?;
        if n != p.0.dim() {
            return Err(Error::Dimension { expected: p.0.dim(), got: n }.into());
        }
        if out.is_null() {
            return Err(null("output"));
        }
        slice::from_raw_parts_mut(out, n).copy_from_slice(&op(&p.0, x));
        Ok(())
    })
}

/// `φ(x)`.
///
/// # Safety
/// `x` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_phi(p: *const AnisoPair, x: *const f64, n: usize, out: *mut f64) -> AnisoStatus {
    pair_scalar(p, x, n, out, |p, x| p.phi(x))
}

/// `φ*(v)`.
///
/// # Safety
/// `v` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_phi_star(p: *const AnisoPair, v: *const f64, n: usize, out: *mut f64) -> AnisoStatus {
    pair_scalar(p, v, n, out, |p, v| p.phi_star(v))
}

/// `∇φ(x)` into `out[0..n]`.
///
/// # Safety
/// `x` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_grad_phi(p: *const AnisoPair, x: *const f64, n: usize, out: *mut f64) -> AnisoStatus {
    pair_vector(p, x, n, out, |p, x| p.grad_phi(x))
}

/// `∇φ*(v)` into `out[0..n]`.
///
/// # Safety
/// `v` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_grad_phi_star(p: *const AnisoPair, v: *const f64, n: usize, out: *mut f64) -> AnisoStatus {
    pair_vector(p, v, n, out, |p, v| p.grad_phi_star(v))
}

/// Bregman distance `D(x, y)`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_pair_bregman(p: *const AnisoPair, x: *const f64, y: *const f64, n: usize, out: *mut f64) -> AnisoStatus {
    guard(|| {
        let y = reals(y, n, "y")?.to_vec();
        match pair_scalar(p, x, n, out, |p, x| p.bregman(x, &y)) {
            AnisoStatus::Ok => Ok(()),
            s => Err(Fail(s, last_error_string())),
        }
    })
}

fn last_error_string() -> String {
    LAST_ERROR.with(|e| e.borrow().to_string_lossy().into_owned())
}

/// Tensor grid with `counts[i]` points on `[lower[i], upper[i]]`.
///
/// # Safety
/// `lower`, `upper` and `counts` must point to `dim` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_plan_grid(
    lower: *const f64,
    upper: *const f64,
    counts: *const usize,
    dim: usize,
    out: *mut *mut AnisoPlan,
) -> AnisoStatus {
    guard(|| {
        let lo = reals(lower, dim, "lower")?.to_vec();
        let hi = reals(upper, dim, "upper")?.to_vec();
        if dim > 0 && counts.is_null() {
            return Err(null("counts"));
        }
        let c = if dim == 0 { Vec::new() } else { slice::from_raw_parts(counts, dim).to_vec() };
        put(out, AnisoPlan(SamplingPlan::grid(lo, hi, c)?))
    })
}

/// `count` seeded uniform points in the box.
///
/// # Safety
/// `lower` and `upper` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_plan_random(
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    count: usize,
    seed: u64,
    out: *mut *mut AnisoPlan,
) -> AnisoStatus {
    guard(|| {
        let lo = reals(lower, dim, "lower")?.to_vec();
        let hi = reals(upper, dim, "upper")?.to_vec();
        put(out, AnisoPlan(SamplingPlan::random(lo, hi, count, seed)?))
    })
}

/// Explicit points, row-major `count × dim`.
///
/// # Safety
/// `coords` must point to `count * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_plan_points(coords: *const f64, count: usize, dim: usize, out: *mut *mut AnisoPlan) -> AnisoStatus {
    guard(|| {
        let total = count.checked_mul(dim).ok_or_else(|| Fail(AnisoStatus::InvalidArgument, "size overflow".into()))?;
        let c = reals(coords, total, "coords")?;
        let pts = if dim == 0 { Vec::new() } else { c.chunks(dim).map(<[f64]>::to_vec).collect() };
        put(out, AnisoPlan(SamplingPlan::points(pts)?))
    })
}

/// # Safety
/// `p` must be null or a plan handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_plan_free(p: *mut AnisoPlan) {
    free(p)
}

/// # Safety
/// `p` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn aniso_plan_len(p: *const AnisoPlan) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

impl AnisoClass {
    fn from_raw(v: i32) -> Option<Self> {
        use AnisoClass::*;
        [BWeak, BStrong, BSmooth, AWeak, AStrong, ASmooth].into_iter().find(|c| *c as i32 == v)
    }
}

/// Tests `class` (an [`AnisoClass`] value) on `probes`. Anchors (anisotropic classes only) default to
/// the probes when `anchors` is null; `tolerance < 0` selects the default.
/// A nonzero `far_field` adds a coarse ring of far probes for the
/// anisotropic convexity classes.
///
/// # Safety
/// Handles must be valid (or null where allowed); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_check(
    f: *const AnisoFunction,
    pair: *const AnisoPair,
    class: i32,
    probes: *const AnisoPlan,
    anchors: *const AnisoPlan,
    tolerance: f64,
    far_field: i32,
    out: *mut *mut AnisoReport,
) -> AnisoStatus {
    guard(|| {
        let class = AnisoClass::from_raw(class).ok_or_else(|| Fail(AnisoStatus::InvalidArgument, format!("unknown class {class}")))?;
        let f = &handle(f, "function")?.0;
        let pair = &handle(pair, "pair")?.0;
        let probes = &handle(probes, "probes")?.0;
        let anchors = anchors.as_ref().map_or(probes, |a| &a.0);
        let mut opts = CheckOptions::default();
        if tolerance >= 0.0 {
            opts.tolerance = tolerance;
        }
        let tol = opts.tolerance;
        let r = match class {
            AnisoClass::BStrong | AnisoClass::AStrong => 1.0,
            _ => -1.0,
        };
        let rep = match class {
            AnisoClass::BWeak | AnisoClass::BStrong => check_b_convexity(f, pair, r, probes, &opts)?,
            AnisoClass::BSmooth => check_b_smooth(f, pair, probes, &opts)?,
            AnisoClass::AWeak | AnisoClass::AStrong => {
                check_aniso_convexity(&AnisoCheckSpec::new(f.clone(), pair.clone(), r, anchors.clone(), probes.clone())?.with_tolerance(tol).with_far_field(far_field != 0))?
            }
            AnisoClass::ASmooth => check_aniso_smooth(f, pair, anchors, probes, tol)?,
        };
        put(out, AnisoReport(rep))
    })
}

/// # Safety
/// `r` must be null or a report handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aniso_report_free(r: *mut AnisoReport) {
    free(r)
}

/// # Safety
/// `r` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_report_verdict(r: *const AnisoReport, out: *mut AnisoVerdict) -> AnisoStatus {
    guard(|| {
        let r = handle(r, "report")?;
        if out.is_null() {
            return Err(null("output"));
        }
        *out = match r.0.verdict {
            Verdict::Holds => AnisoVerdict::Holds,
            Verdict::Violated => AnisoVerdict::Violated,
            Verdict::Inconclusive => AnisoVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Worst margin (`+inf` when nothing was tested).
///
/// # Safety
/// `r` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn aniso_report_worst_margin(r: *const AnisoReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.worst_margin)
}

/// Copies the witness point into `point[0..capacity]` and writes its length to `len`.
/// Returns `NotFound` when the report has no witness and `BufferTooSmall` when
/// `capacity` is short (with `len` still set).
///
/// # Safety
/// `point` must point to `capacity` doubles; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_report_witness(r: *const AnisoReport, point: *mut f64, capacity: usize, len: *mut usize) -> AnisoStatus {
    guard(|| {
        let r = handle(r, "report")?;
        if len.is_null() {
            return Err(null("len"));
        }
        let w = r.0.witness.as_ref().ok_or_else(|| Fail(AnisoStatus::NotFound, "report has no witness".into()))?;
        *len = w.point.len();
        if capacity < w.point.len() {
            return Err(Fail(AnisoStatus::BufferTooSmall, format!("witness needs {} doubles", w.point.len())));
        }
        if point.is_null() {
            return Err(null("point"));
        }
        slice::from_raw_parts_mut(point, w.point.len()).copy_from_slice(&w.point);
        Ok(())
    })
}

/// Report as JSON; release with [`aniso_string_free`].
///
/// # Safety
/// `r` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_report_to_json(r: *const AnisoReport, out: *mut *mut c_char) -> AnisoStatus {
    guard(|| {
        let r = handle(r, "report")?;
        let s = serde_json::to_string(&r.0).map_err(|e| Fail(AnisoStatus::InvalidArgument, e.to_string()))?;
        put_string(out, s)
    })
}

/// Runs `x ← x − ∇φ*(∇f(x))` from `x[0..n]`, overwriting `x` with the final iterate.
///
/// # Safety
/// `x` must point to `n` doubles; `iterations` and `status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_descend(
    f: *const AnisoFunction,
    pair: *const AnisoPair,
    x: *mut f64,
    n: usize,
    max_iter: usize,
    stop_tol: f64,
    iterations: *mut usize,
    status: *mut AnisoDescentStatus,
) -> AnisoStatus {
    guard(|| {
        let f = &handle(f, "function")?.0;
        let pair = &handle(pair, "pair")?.0;
        let x0 = reals(x, n, "x")?.to_vec();
        if iterations.is_null() || status.is_null() {
            return Err(null("output"));
        }
        let opts = DescentOptions { max_iter, stop_tol, ..DescentOptions::default() };
        let trace = dual_preconditioned_descent(f, pair, &x0, &opts)?;
        if let Some(last) = trace.iterates.last() {
            slice::from_raw_parts_mut(x, n).copy_from_slice(last);
        }
        *iterations = trace.iterates.len() - 1;
        *status = match trace.status {
            DescentStatus::Converged => AnisoDescentStatus::Converged,
            DescentStatus::MaxIter => AnisoDescentStatus::MaxIter,
            DescentStatus::Diverged => AnisoDescentStatus::Diverged,
        };
        Ok(())
    })
}

/// Runs a registered scenario and returns its JSON result; `passed` receives 1 or 0.
///
/// # Safety
/// `name` must be a NUL-terminated string; `json` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aniso_scenario_run(name: *const c_char, json: *mut *mut c_char, passed: *mut i32) -> AnisoStatus {
    guard(|| {
        let name = text(name, "name")?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let result = scenarios::run(name)?;
        *passed = i32::from(result.passed);
        let s = serde_json::to_string(&result).map_err(|e| Fail(AnisoStatus::InvalidArgument, e.to_string()))?;
        put_string(json, s)
    })
}

/// Number of registered scenarios.
#[no_mangle]
pub extern "C" fn aniso_scenario_count() -> usize {
    scenarios::registry().len()
}

/// Static name of scenario `index`, or null when out of range.
#[no_mangle]
pub extern "C" fn aniso_scenario_name(index: usize) -> *const c_char {
    thread_local! {
        static NAMES: Vec<CString> = scenarios::registry().iter().map(|s| CString::new(s.name).expect("ascii")).collect();
    }
    NAMES.with(|n| n.get(index).map_or(ptr::null(), |c| c.as_ptr()))
}
