//! C interface to `rkhs-core`.
//!
//! Kernels and rules live behind opaque handles created by the
//! `rkhs_*_new`-style constructors and released with the matching `_free`.
//! Every fallible call returns an [`RkhsStatus`]; on failure the message is
//! available from [`rkhs_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rkhs_core::algorithms::gh_rule_on_space;
use rkhs_core::kernels::{initial_error, KernelSpec, Problem, ShapeSeq};
use rkhs_core::transference::{transfer_quadrature_to_gaussian, transfer_quadrature_to_hermite};
use rkhs_core::worst_case::{optimal_rule, wce_integration, Nodes, QuadratureRule};
use rkhs_core::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkhsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    Domain = 4,
    Numerical = 5,
    IllConditioned = 6,
    Budget = 7,
    Evaluation = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Which worst-case problem a call refers to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkhsProblem {
    Integration = 0,
    Approximation = 1,
}

/// Opaque tensor-product kernel.
pub struct RkhsKernel(KernelSpec);

/// Opaque quadrature rule.
pub struct RkhsRule(QuadratureRule);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RkhsStatus {
    match e {
        Error::UnsupportedDegree { .. } | Error::UnsupportedSize { .. } | Error::Parse(_) => RkhsStatus::InvalidArgument,
        Error::Shape(_) => RkhsStatus::Shape,
        Error::Domain(_) | Error::InsufficientData { .. } => RkhsStatus::Domain,
        Error::Numerical(_) | Error::NegativeSquaredError { .. } => RkhsStatus::Numerical,
        Error::Conditioning { .. } => RkhsStatus::IllConditioned,
        Error::Budget(_) => RkhsStatus::Budget,
        Error::Evaluation(_) => RkhsStatus::Evaluation,
    }
}

enum Failure {
    Status(RkhsStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(RkhsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RkhsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RkhsStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RkhsStatus::Panic
        }
    }
}

unsafe fn values<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn write_out(out: *mut f64, v: f64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output value"));
    }
    unsafe { *out = v };
    Ok(())
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rkhs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Gaussian kernel with shape parameters `sigma[0..d]`.
///
/// # Safety
/// `sigma` must point to `d` readable doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn rkhs_kernel_gaussian(sigma: *const f64, d: usize, out: *mut *mut RkhsKernel) -> RkhsStatus {
    guard(|| {
        let s = values(sigma, d, "sigma")?;
        store(out, RkhsKernel(KernelSpec::gaussian(s.to_vec())?))
    })
}

/// Hermite kernel with base parameters `beta[0..d]`.
///
/// # Safety
/// As for [`rkhs_kernel_gaussian`].
#[no_mangle]
pub unsafe extern "C" fn rkhs_kernel_hermite(beta: *const f64, d: usize, out: *mut *mut RkhsKernel) -> RkhsStatus {
    guard(|| {
        let b = values(beta, d, "beta")?;
        store(out, RkhsKernel(KernelSpec::hermite(b.to_vec())?))
    })
}

/// # Safety
/// `kernel` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rkhs_kernel_free(kernel: *mut RkhsKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `kernel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rkhs_kernel_dimension(kernel: *const RkhsKernel) -> usize {
    kernel.as_ref().map_or(0, |k| k.0.dimension())
}

/// Worst-case error of the zero algorithm.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rkhs_initial_error(kernel: *const RkhsKernel, problem: RkhsProblem, out: *mut f64) -> RkhsStatus {
    guard(|| {
        let k = deref(kernel, "kernel")?;
        let problem = match problem {
            RkhsProblem::Integration => Problem::Integration,
            RkhsProblem::Approximation => Problem::Approximation,
        };
        write_out(out, initial_error(&k.0, problem))
    })
}

/// Rule with `n` nodes in `d` dimensions; `nodes` is row-major `n x d`.
///
/// # Safety
/// `nodes` must hold `n * d` doubles, `weights` `n` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_new(nodes: *const f64, weights: *const f64, n: usize, d: usize, out: *mut *mut RkhsRule) -> RkhsStatus {
    guard(|| {
        let len = n.checked_mul(d).ok_or_else(|| Failure::Status(RkhsStatus::InvalidArgument, "n * d overflows".into()))?;
        let x = values(nodes, len, "nodes")?;
        let w = values(weights, n, "weights")?;
        let rule = QuadratureRule::new(Nodes::new(d, x.to_vec())?, w.to_vec())?;
        store(out, RkhsRule(rule))
    })
}

/// The `n`-point Gauss–Hermite rule for the standard normal distribution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_gauss_hermite(n: usize, out: *mut *mut RkhsRule) -> RkhsStatus {
    guard(|| {
        let spec = KernelSpec::hermite(vec![0.5])?;
        store(out, RkhsRule(gh_rule_on_space(n, &spec)?))
    })
}

/// # Safety
/// `rule` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_free(rule: *mut RkhsRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// # Safety
/// `rule` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_len(rule: *const RkhsRule) -> usize {
    rule.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `rule` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_dim(rule: *const RkhsRule) -> usize {
    rule.as_ref().map_or(0, |r| r.0.dim())
}

unsafe fn copy_into(src: &[f64], buf: *mut f64, cap: usize) -> Result<(), Failure> {
    if cap < src.len() {
        return Err(Failure::Status(RkhsStatus::BufferTooSmall, format!("buffer holds {cap} values, {} needed", src.len())));
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Copies the row-major node matrix into `buf` (capacity `cap` doubles).
///
/// # Safety
/// `rule` must be a live handle and `buf` writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_nodes(rule: *const RkhsRule, buf: *mut f64, cap: usize) -> RkhsStatus {
    guard(|| copy_into(deref(rule, "rule")?.0.nodes().as_slice(), buf, cap))
}

/// Copies the weights into `buf` (capacity `cap` doubles).
///
/// # Safety
/// As for [`rkhs_rule_nodes`].
#[no_mangle]
pub unsafe extern "C" fn rkhs_rule_weights(rule: *const RkhsRule, buf: *mut f64, cap: usize) -> RkhsStatus {
    guard(|| copy_into(deref(rule, "rule")?.0.weights(), buf, cap))
}

/// Worst-case integration error of `rule` on the space of `kernel`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rkhs_wce_integration(rule: *const RkhsRule, kernel: *const RkhsKernel, out: *mut f64) -> RkhsStatus {
    guard(|| {
        let (r, k) = (deref(rule, "rule")?, deref(kernel, "kernel")?);
        write_out(out, wce_integration(&r.0, &k.0)?)
    })
}

/// Optimal weights for the nodes of `rule`; the new rule goes to `out` and
/// its squared error to `e2` (may be null).
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rkhs_optimal_weights(rule: *const RkhsRule, kernel: *const RkhsKernel, out: *mut *mut RkhsRule, e2: *mut f64) -> RkhsStatus {
    guard(|| {
        let (r, k) = (deref(rule, "rule")?, deref(kernel, "kernel")?);
        let (best, err) = optimal_rule(r.0.nodes(), &k.0)?;
        if !e2.is_null() {
            *e2 = err;
        }
        store(out, RkhsRule(best))
    })
}

/// Integration twin of a Gaussian-space rule on the Hermite space matched to
/// `sigma[0..d]`.
///
/// # Safety
/// `rule` must be live, `sigma` readable for `d` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rkhs_transfer_to_hermite(rule: *const RkhsRule, sigma: *const f64, d: usize, out: *mut *mut RkhsRule) -> RkhsStatus {
    guard(|| {
        let r = deref(rule, "rule")?;
        let s = ShapeSeq::new(values(sigma, d, "sigma")?.to_vec())?;
        store(out, RkhsRule(transfer_quadrature_to_hermite(&r.0, &s)?))
    })
}

/// Inverse of [`rkhs_transfer_to_hermite`].
///
/// # Safety
/// As for [`rkhs_transfer_to_hermite`].
#[no_mangle]
pub unsafe extern "C" fn rkhs_transfer_to_gaussian(rule: *const RkhsRule, sigma: *const f64, d: usize, out: *mut *mut RkhsRule) -> RkhsStatus {
    guard(|| {
        let r = deref(rule, "rule")?;
        let s = ShapeSeq::new(values(sigma, d, "sigma")?.to_vec())?;
        store(out, RkhsRule(transfer_quadrature_to_gaussian(&r.0, &s)?))
    })
}
