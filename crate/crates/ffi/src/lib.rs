//! C ABI for `conic-approx`.
//!
//! Every fallible call returns a [`CaStatus`]; the message of the last
//! failure on the calling thread is available through
//! [`ca_last_error_message`]. Handles are created by `*_new` functions and
//! released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use conic_approx::cutoff::CutoffSpec;
use conic_approx::harness::{self, Command, ExperimentConfig, Format, Outcome};
use conic_approx::jacobi::{gauss_jacobi_rule, jacobi_eval, JacobiParams};
use conic_approx::surface::{
    KernelBackend, SurfaceExpansion, SurfaceKernelEvaluator, SurfaceOperator, SurfacePoint, SurfaceWeight,
};
use conic_approx::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaStatus {
    Ok = 0,
    NullPointer = 1,
    ParameterDomain = 2,
    Domain = 3,
    Index = 4,
    Dimension = 5,
    Configuration = 6,
    DegenerateInput = 7,
    Capability = 8,
    NumericalFailure = 9,
    Usage = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

impl From<&Error> for CaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ParameterDomain(_) => CaStatus::ParameterDomain,
            Error::Domain(_) => CaStatus::Domain,
            Error::Index(_) => CaStatus::Index,
            Error::Dimension(_) => CaStatus::Dimension,
            Error::Configuration(_) => CaStatus::Configuration,
            Error::DegenerateInput(_) => CaStatus::DegenerateInput,
            Error::Capability(_) => CaStatus::Capability,
            Error::NumericalFailure(_) => CaStatus::NumericalFailure,
            Error::Usage(_) => CaStatus::Usage,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaCutoff {
    ExponentialBump = 0,
    RaisedCosine = 1,
}

impl From<CaCutoff> for CutoffSpec {
    fn from(c: CaCutoff) -> Self {
        match c {
            CaCutoff::ExponentialBump => CutoffSpec::ExponentialBump,
            CaCutoff::RaisedCosine => CutoffSpec::RaisedCosine,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaKernelBackend {
    BasisSum = 0,
    AdditionFormula = 1,
}

/// Outcome of [`ca_run`], matching the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaOutcome {
    Pass = 0,
    CheckFailure = 1,
    NumericalFailure = 3,
}

/// Reproducing kernel of `V_n` on the conic surface.
pub struct CaSurfaceKernel(SurfaceKernelEvaluator);

/// Near-best operator `L_n` on a fixed sampling grid.
pub struct CaSurfaceOperator(SurfaceOperator);

/// A polynomial on the conic surface.
pub struct CaSurfaceExpansion(SurfaceExpansion);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: CaStatus, message: String) -> CaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
    status
}

struct Failure(CaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(CaStatus::from(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(CaStatus::NullPointer, format!("{name} is null"))
}

/// Runs `body`, recording failures and panics in the thread-local message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CaStatus::Ok,
        Ok(Err(Failure(status, message))) => fail(status, message),
        Err(_) => fail(CaStatus::Panic, "internal panic".into()),
    }
}

unsafe fn out<T>(ptr: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    ptr.write(value);
    Ok(())
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| Failure(CaStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn point(xi: *const f64, d: usize, t: f64, name: &str) -> Result<SurfacePoint, Failure> {
    Ok(SurfacePoint::from_coords(slice(xi, d, name)?.to_vec(), t)?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ca_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            buf.add(n).write(0);
        }
        msg.len()
    })
}

/// `P_n^{(α,β)}(x)`.
///
/// # Safety
/// `result` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_jacobi_eval(alpha: f64, beta: f64, n: usize, x: f64, result: *mut f64) -> CaStatus {
    guard(|| {
        let q = JacobiParams::new(alpha, beta)?;
        out(result, "result", jacobi_eval(&q, n, x))
    })
}

/// Gauss-Jacobi nodes and weights on `[-1,1]`.
///
/// # Safety
/// `nodes` and `weights` must be valid for `num_nodes` writes each.
#[no_mangle]
pub unsafe extern "C" fn ca_gauss_jacobi(
    alpha: f64,
    beta: f64,
    num_nodes: usize,
    nodes: *mut f64,
    weights: *mut f64,
) -> CaStatus {
    guard(|| {
        if nodes.is_null() || weights.is_null() {
            return Err(null("nodes or weights"));
        }
        let rule = gauss_jacobi_rule(&JacobiParams::new(alpha, beta)?, num_nodes)?;
        std::ptr::copy_nonoverlapping(rule.nodes.as_ptr(), nodes, num_nodes);
        std::ptr::copy_nonoverlapping(rule.weights.as_ptr(), weights, num_nodes);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ca_cutoff_eval(cutoff: CaCutoff, t: f64) -> f64 {
    CutoffSpec::from(cutoff).eval(t)
}

/// # Safety
/// `kernel` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_kernel_new(
    d: usize,
    gamma: f64,
    n: usize,
    cutoff: CaCutoff,
    backend: CaKernelBackend,
    kernel: *mut *mut CaSurfaceKernel,
) -> CaStatus {
    guard(|| {
        let backend = match backend {
            CaKernelBackend::BasisSum => KernelBackend::BasisSum,
            CaKernelBackend::AdditionFormula => KernelBackend::AdditionFormula,
        };
        let ev = SurfaceKernelEvaluator::new(SurfaceWeight::new(d, gamma)?, n, cutoff.into(), backend)?;
        out(kernel, "kernel", Box::into_raw(Box::new(CaSurfaceKernel(ev))))
    })
}

/// `L_n((t_a ξ_a, t_a), (t_b ξ_b, t_b))`; `xi_a` and `xi_b` hold `d` coordinates.
///
/// # Safety
/// `kernel` must come from [`ca_surface_kernel_new`]; `xi_a`, `xi_b` must
/// be valid for `d` reads and `result` for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_kernel_eval(
    kernel: *const CaSurfaceKernel,
    xi_a: *const f64,
    t_a: f64,
    xi_b: *const f64,
    t_b: f64,
    result: *mut f64,
) -> CaStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let d = k.0.weight().d();
        let v = k.0.eval(&point(xi_a, d, t_a, "xi_a")?, &point(xi_b, d, t_b, "xi_b")?)?;
        out(result, "result", v)
    })
}

/// # Safety
/// `kernel` must be null or come from [`ca_surface_kernel_new`], and is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_kernel_free(kernel: *mut CaSurfaceKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `op` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_operator_new(
    d: usize,
    gamma: f64,
    n: usize,
    cutoff: CaCutoff,
    op: *mut *mut CaSurfaceOperator,
) -> CaStatus {
    guard(|| {
        let o = SurfaceOperator::with_default_rules(SurfaceWeight::new(d, gamma)?, n, cutoff.into())?;
        out(op, "op", Box::into_raw(Box::new(CaSurfaceOperator(o))))
    })
}

/// Number of sampling points of the operator grid, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or come from [`ca_surface_operator_new`].
#[no_mangle]
pub unsafe extern "C" fn ca_surface_operator_grid_len(op: *const CaSurfaceOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.rules().len())
}

/// The grid in sampling order: `t[k]` and `xi[k*d .. (k+1)*d]`.
///
/// # Safety
/// `op` must come from [`ca_surface_operator_new`]; `t` must be valid for
/// `grid_len` writes and `xi` for `grid_len * d` writes.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_operator_grid(op: *const CaSurfaceOperator, t: *mut f64, xi: *mut f64) -> CaStatus {
    guard(|| {
        let o = op.as_ref().ok_or_else(|| null("op"))?;
        if t.is_null() || xi.is_null() {
            return Err(null("t or xi"));
        }
        let rules = o.0.rules();
        let d = rules.weight().d();
        let mut k = 0;
        for &s in &rules.t_rule.nodes {
            for p in &rules.sphere.points {
                t.add(k).write(s);
                std::ptr::copy_nonoverlapping(p.coords().as_ptr(), xi.add(k * d), d);
                k += 1;
            }
        }
        Ok(())
    })
}

/// `L_n f` from `f` sampled on the operator grid.
///
/// # Safety
/// `op` must come from [`ca_surface_operator_new`]; `values` must be valid
/// for `len` reads and `expansion` for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_operator_apply(
    op: *const CaSurfaceOperator,
    values: *const f64,
    len: usize,
    expansion: *mut *mut CaSurfaceExpansion,
) -> CaStatus {
    guard(|| {
        let o = op.as_ref().ok_or_else(|| null("op"))?;
        if len != o.0.rules().len() {
            return Err(Failure(
                CaStatus::Configuration,
                format!("expected {} grid values, got {len}", o.0.rules().len()),
            ));
        }
        let e = o.0.apply_values(slice(values, len, "values")?)?;
        out(expansion, "expansion", Box::into_raw(Box::new(CaSurfaceExpansion(e))))
    })
}

/// # Safety
/// `op` must be null or come from [`ca_surface_operator_new`], and is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_operator_free(op: *mut CaSurfaceOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Value at `(tξ, t)`; `xi` holds `d` coordinates.
///
/// # Safety
/// `expansion` must come from [`ca_surface_operator_apply`]; `xi` must be
/// valid for `d` reads and `result` for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_expansion_eval(
    expansion: *const CaSurfaceExpansion,
    xi: *const f64,
    t: f64,
    result: *mut f64,
) -> CaStatus {
    guard(|| {
        let e = expansion.as_ref().ok_or_else(|| null("expansion"))?;
        let d = e.0.basis().weight().d();
        out(result, "result", e.0.eval_point(&point(xi, d, t, "xi")?))
    })
}

/// # Safety
/// `expansion` must be null or come from [`ca_surface_operator_apply`],
/// and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ca_surface_expansion_free(expansion: *mut CaSurfaceExpansion) {
    if !expansion.is_null() {
        drop(Box::from_raw(expansion));
    }
}

/// Runs a harness command (`"verify"`, `"convergence"`, ...) and writes its
/// report and CSV tables into `out_dir`. A null `config_json` selects the
/// default configuration.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `outcome` must be valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn ca_run(
    command: *const c_char,
    config_json: *const c_char,
    out_dir: *const c_char,
    outcome: *mut CaOutcome,
) -> CaStatus {
    guard(|| {
        let command: Command = text(command, "command")?.parse()?;
        let config = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::from_json(text(config_json, "config_json")?)?
        };
        let output = harness::run(command, &config)?;
        harness::write_outputs(Path::new(text(out_dir, "out_dir")?), &output, Format::Csv)?;
        let o = match output.report.outcome() {
            Outcome::Pass => CaOutcome::Pass,
            Outcome::CheckFailure => CaOutcome::CheckFailure,
            Outcome::NumericalFailure => CaOutcome::NumericalFailure,
        };
        out(outcome, "outcome", o)
    })
}
