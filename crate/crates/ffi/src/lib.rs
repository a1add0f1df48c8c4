//! C interface. Objects are opaque handles created by `*_parse` or
//! `ql_compile` and released with the matching `*_free`. Every fallible call
//! returns a `QlStatus`; on failure `ql_last_error` describes the error on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qaoa_lab::compiler::{self, Circuit, CompiledQaoa};
use qaoa_lab::postsel::{self, MarkedOracle};
use qaoa_lab::qaoa::{self, Angles};
use qaoa_lab::{adiabatic, supremacy, CspInstance, Error};

/// Result of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    LimitExceeded = 4,
    NumericalFailure = 5,
    Io = 6,
    Panic = 7,
}

/// A constraint satisfaction instance.
pub struct QlCsp(CspInstance);

/// A circuit over `{H, PhaseT, CPhase}`.
pub struct QlCircuit(Circuit);

/// A compiled post-selected QAOA circuit.
pub struct QlCompiled(CompiledQaoa);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> QlStatus {
    match err {
        Error::Parse { .. } => QlStatus::Parse,
        Error::Io(_) => QlStatus::Io,
        Error::ExhaustiveLimit { .. } | Error::QubitCeiling { .. } => QlStatus::LimitExceeded,
        Error::NonUnitary(_)
        | Error::NonRealRecovery { .. }
        | Error::RoundingFailure { .. }
        | Error::StepInstability { .. }
        | Error::PostSelectionImpossible(_)
        | Error::AttemptsExhausted(_) => QlStatus::NumericalFailure,
        _ => QlStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), QlStatus>>(f: F) -> QlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QlStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            QlStatus::Panic
        }
    }
}

fn fail(err: Error) -> QlStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> QlStatus {
    set_error(format!("null pointer: {what}"));
    QlStatus::NullPointer
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, QlStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        QlStatus::InvalidArgument
    })
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, QlStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, QlStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ql_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ql_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses an instance in the `csp n m` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out_csp` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ql_csp_parse(text: *const c_char, out_csp: *mut *mut QlCsp) -> QlStatus {
    guard(|| {
        let t = as_str(text, "text")?;
        let slot = out(out_csp, "out_csp")?;
        let inst = CspInstance::parse(t).map_err(fail)?;
        *slot = Box::into_raw(Box::new(QlCsp(inst)));
        Ok(())
    })
}

/// Parses a DIMACS CNF formula.
///
/// # Safety
/// As for `ql_csp_parse`.
#[no_mangle]
pub unsafe extern "C" fn ql_csp_parse_dimacs(text: *const c_char, out_csp: *mut *mut QlCsp) -> QlStatus {
    guard(|| {
        let t = as_str(text, "text")?;
        let slot = out(out_csp, "out_csp")?;
        let inst = CspInstance::parse_dimacs(t).map_err(fail)?;
        *slot = Box::into_raw(Box::new(QlCsp(inst)));
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `csp` must come from `ql_csp_parse*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ql_csp_free(csp: *mut QlCsp) {
    if !csp.is_null() {
        drop(Box::from_raw(csp));
    }
}

/// Number of variables and clauses.
///
/// # Safety
/// `csp` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ql_csp_shape(csp: *const QlCsp, out_n: *mut usize, out_m: *mut usize) -> QlStatus {
    guard(|| {
        let c = handle(csp, "csp")?;
        *out(out_n, "out_n")? = c.0.n();
        *out(out_m, "out_m")? = c.0.m();
        Ok(())
    })
}

/// `C(z)` with variable 0 in the least significant bit of `z`.
///
/// # Safety
/// `csp` must be a live handle and `out_cost` valid.
#[no_mangle]
pub unsafe extern "C" fn ql_csp_cost(csp: *const QlCsp, z: u64, out_cost: *mut usize) -> QlStatus {
    guard(|| {
        let c = handle(csp, "csp")?;
        *out(out_cost, "out_cost")? = c.0.cost(z).map_err(fail)?;
        Ok(())
    })
}

/// Number of assignments satisfying every clause, computed from QAOA
/// matrix elements.
///
/// # Safety
/// `csp` must be a live handle and `out_count` valid.
#[no_mangle]
pub unsafe extern "C" fn ql_fourier_count(csp: *const QlCsp, out_count: *mut u64) -> QlStatus {
    guard(|| {
        let c = handle(csp, "csp")?;
        *out(out_count, "out_count")? = supremacy::fourier_count(&c.0).map_err(fail)?;
        Ok(())
    })
}

/// `<gamma, beta| C |gamma, beta>` at depth `p`.
///
/// # Safety
/// `gammas` and `betas` must each point to `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn ql_qaoa_objective(
    csp: *const QlCsp,
    p: usize,
    gammas: *const f64,
    betas: *const f64,
    out_value: *mut f64,
) -> QlStatus {
    guard(|| {
        let c = handle(csp, "csp")?;
        if p > 0 && (gammas.is_null() || betas.is_null()) {
            return Err(null("angles"));
        }
        let (g, b) = if p == 0 {
            (Vec::new(), Vec::new())
        } else {
            (std::slice::from_raw_parts(gammas, p).to_vec(), std::slice::from_raw_parts(betas, p).to_vec())
        };
        let angles = Angles::new(g, b).map_err(fail)?;
        *out(out_value, "out_value")? = qaoa::objective(&c.0, &angles).map_err(fail)?;
        Ok(())
    })
}

/// Exhaustive p = 1 grid search with `resolution` points per angle.
///
/// # Safety
/// `csp` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ql_qaoa_grid_search(
    csp: *const QlCsp,
    resolution: usize,
    out_gamma: *mut f64,
    out_beta: *mut f64,
    out_value: *mut f64,
) -> QlStatus {
    guard(|| {
        let c = handle(csp, "csp")?;
        let (g, b, v) = (out(out_gamma, "out_gamma")?, out(out_beta, "out_beta")?, out(out_value, "out_value")?);
        let (angles, value) = qaoa::grid_search(&c.0, resolution).map_err(fail)?;
        *g = angles.gammas()[0];
        *b = angles.betas()[0];
        *v = value;
        Ok(())
    })
}

/// Spectral gap of `H(s) = (1 - s)(-B) + s(-C)`.
///
/// # Safety
/// `csp` must be a live handle and `out_gap` valid.
#[no_mangle]
pub unsafe extern "C" fn ql_spectral_gap(csp: *const QlCsp, s: f64, out_gap: *mut f64) -> QlStatus {
    guard(|| {
        let c = handle(csp, "csp")?;
        *out(out_gap, "out_gap")? = adiabatic::spectral_gap(&c.0, s).map_err(fail)?;
        Ok(())
    })
}

/// Counts the marked strings among `2^k` by post-selected amplification.
///
/// # Safety
/// `marked` must point to `len` values (it may be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn ql_count_marked(k: usize, marked: *const u64, len: usize, out_count: *mut u64) -> QlStatus {
    guard(|| {
        if len > 0 && marked.is_null() {
            return Err(null("marked"));
        }
        let list = if len == 0 { &[][..] } else { std::slice::from_raw_parts(marked, len) };
        let oracle = MarkedOracle::new(k, list.iter().copied()).map_err(fail)?;
        *out(out_count, "out_count")? = postsel::count_marked(&oracle).map_err(fail)?;
        Ok(())
    })
}

/// Parses a circuit in the `circuit n` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out_circuit` valid.
#[no_mangle]
pub unsafe extern "C" fn ql_circuit_parse(text: *const c_char, out_circuit: *mut *mut QlCircuit) -> QlStatus {
    guard(|| {
        let t = as_str(text, "text")?;
        let slot = out(out_circuit, "out_circuit")?;
        let c = Circuit::parse(t).map_err(fail)?;
        *slot = Box::into_raw(Box::new(QlCircuit(c)));
        Ok(())
    })
}

/// Releases a circuit. Null is ignored.
///
/// # Safety
/// `circuit` must come from `ql_circuit_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ql_circuit_free(circuit: *mut QlCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Compiles a circuit into the post-selected p = 1 form.
///
/// # Safety
/// `circuit` must be a live handle and `out_compiled` valid.
#[no_mangle]
pub unsafe extern "C" fn ql_compile(circuit: *const QlCircuit, out_compiled: *mut *mut QlCompiled) -> QlStatus {
    guard(|| {
        let c = handle(circuit, "circuit")?;
        let slot = out(out_compiled, "out_compiled")?;
        let compiled = compiler::compile(&c.0).map_err(fail)?;
        *slot = Box::into_raw(Box::new(QlCompiled(compiled)));
        Ok(())
    })
}

/// Releases a compiled circuit. Null is ignored.
///
/// # Safety
/// `compiled` must come from `ql_compile` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ql_compiled_free(compiled: *mut QlCompiled) {
    if !compiled.is_null() {
        drop(Box::from_raw(compiled));
    }
}

/// Total and auxiliary qubit counts of a compiled circuit.
///
/// # Safety
/// `compiled` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ql_compiled_shape(
    compiled: *const QlCompiled,
    out_total: *mut usize,
    out_auxiliary: *mut usize,
) -> QlStatus {
    guard(|| {
        let c = handle(compiled, "compiled")?;
        *out(out_total, "out_total")? = c.0.n_total();
        *out(out_auxiliary, "out_auxiliary")? = c.0.gadgets();
        Ok(())
    })
}

/// Compares a circuit with a compiled circuit. `out_passed` is 1 when the
/// distributions and phase-aligned amplitudes agree within `tolerance`.
///
/// # Safety
/// Both handles must be live; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ql_verify(
    circuit: *const QlCircuit,
    compiled: *const QlCompiled,
    tolerance: f64,
    out_tv: *mut f64,
    out_amplitude: *mut f64,
    out_passed: *mut i32,
) -> QlStatus {
    guard(|| {
        let c = handle(circuit, "circuit")?;
        let k = handle(compiled, "compiled")?;
        let (tv, amp, passed) =
            (out(out_tv, "out_tv")?, out(out_amplitude, "out_amplitude")?, out(out_passed, "out_passed")?);
        let report = compiler::verify_equivalence(&c.0, &k.0, tolerance).map_err(fail)?;
        *tv = report.tv_distance;
        *amp = report.amplitude_deviation;
        *passed = report.passed as i32;
        Ok(())
    })
}
