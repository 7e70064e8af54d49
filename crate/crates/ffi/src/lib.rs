//! C ABI for `coherence-ledger`.
//!
//! Systems and states are opaque heap handles created by `cl_*_new`/`cl_*_from_*`
//! and released with the matching `cl_*_free`. Every fallible call returns a
//! [`ClStatus`]; on failure [`cl_last_error_message`] describes the cause for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use coherence_ledger::clock::{qfi, skew_information};
use coherence_ledger::divergence::{w_coh, w_incoh};
use coherence_ledger::io::{JobDocument, LoadError};
use coherence_ledger::ising::{full_spectrum, IsingChain};
use coherence_ledger::linalg::{c64, ComplexMatrix};
use coherence_ledger::model::{gibbs, CompositeSystem};
use coherence_ledger::states::QuantumState;
use coherence_ledger::tradeoff::tradeoff_report;
use coherence_ledger::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    /// Malformed arguments or documents.
    InvalidInput = 1,
    /// The computation itself failed (non-Hermitian input, ambiguous blocking, ...).
    Numerical = 2,
    NullPointer = 3,
    /// The output buffer is too small; the required length has been written.
    BufferTooSmall = 4,
    /// A bound asked for by name does not apply to the state.
    NotFound = 5,
    Panic = 6,
}

/// Opaque composite system.
pub struct ClSystem(Arc<CompositeSystem>);

/// Opaque density matrix on a [`ClSystem`].
pub struct ClState(QuantumState);

/// One inequality `lhs <= rhs`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClBound {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub saturated: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: ClStatus, msg: impl Into<String>) -> ClStatus {
    set_error(msg.into());
    status
}

fn core_error(e: Error) -> ClStatus {
    let status = match e {
        Error::BadParams(_) | Error::BadAlpha(_) | Error::DimensionMismatch { .. } | Error::WrongSystemShape(_) => {
            ClStatus::InvalidInput
        }
        _ => ClStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> ClStatus) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ClStatus::Panic, "internal panic"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(ClStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

macro_rules! try_core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return core_error(err),
        }
    };
}

/// Message of the last failure on this thread, or null. Valid until the next call that fails.
#[no_mangle]
pub extern "C" fn cl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a system from `num_subsystems` local spectra stored back to back in
/// `levels`, subsystem `i` holding `dims[i]` levels.
///
/// # Safety
/// `dims` must point to `num_subsystems` values and `levels` to their sum; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_system_new(
    levels: *const f64,
    dims: *const usize,
    num_subsystems: usize,
    out: *mut *mut ClSystem,
) -> ClStatus {
    guard(|| {
        non_null!(levels, dims, out);
        let dims = std::slice::from_raw_parts(dims, num_subsystems);
        let total: usize = dims.iter().sum();
        let flat = std::slice::from_raw_parts(levels, total);
        let mut spectra = Vec::with_capacity(num_subsystems);
        let mut at = 0;
        for &d in dims {
            spectra.push(flat[at..at + d].to_vec());
            at += d;
        }
        let sys = try_core!(CompositeSystem::new(spectra));
        *out = Box::into_raw(Box::new(ClSystem(Arc::new(sys))));
        ClStatus::Ok
    })
}

/// `n` qubits with levels `{0, omega0}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_system_qubits(n: usize, omega0: f64, out: *mut *mut ClSystem) -> ClStatus {
    guard(|| {
        non_null!(out);
        let sys = try_core!(CompositeSystem::qubits(n, omega0));
        *out = Box::into_raw(Box::new(ClSystem(Arc::new(sys))));
        ClStatus::Ok
    })
}

/// # Safety
/// `sys` must come from a `cl_system_*` constructor and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cl_system_free(sys: *mut ClSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Total Hilbert-space dimension.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_system_dimension(sys: *const ClSystem, out: *mut usize) -> ClStatus {
    guard(|| {
        non_null!(sys, out);
        *out = (*sys).0.dimension();
        ClStatus::Ok
    })
}

/// Dense state from row-major real and imaginary parts of a `dim x dim` matrix.
///
/// # Safety
/// `re` and `im` must each point to `dim * dim` values; `sys` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_state_dense(
    sys: *const ClSystem,
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut ClState,
) -> ClStatus {
    guard(|| {
        non_null!(sys, re, im, out);
        let re = std::slice::from_raw_parts(re, dim * dim);
        let im = std::slice::from_raw_parts(im, dim * dim);
        let rows: Vec<Vec<_>> = (0..dim)
            .map(|i| (0..dim).map(|j| c64(re[i * dim + j], im[i * dim + j])).collect())
            .collect();
        let m = try_core!(ComplexMatrix::from_rows(&rows));
        let state = try_core!(QuantumState::new((*sys).0.clone(), m));
        *out = Box::into_raw(Box::new(ClState(state)));
        ClStatus::Ok
    })
}

/// State from a job document (the same JSON the command-line tool reads).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_state_from_json(json: *const c_char, out: *mut *mut ClState) -> ClStatus {
    guard(|| {
        non_null!(json, out);
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(e) => return fail(ClStatus::InvalidInput, format!("document is not UTF-8: {e}")),
        };
        let doc = match JobDocument::from_str(text) {
            Ok(d) => d,
            Err(e) => return fail(ClStatus::InvalidInput, e.to_string()),
        };
        match doc.build_state() {
            Ok(s) => {
                *out = Box::into_raw(Box::new(ClState(s)));
                ClStatus::Ok
            }
            Err(LoadError::Input(e)) => fail(ClStatus::InvalidInput, e.to_string()),
            Err(LoadError::Numerical(e)) => core_error(e),
        }
    })
}

/// # Safety
/// `state` must come from a `cl_state_*` constructor and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cl_state_free(state: *mut ClState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_state_dimension(state: *const ClState, out: *mut usize) -> ClStatus {
    guard(|| {
        non_null!(state, out);
        *out = (*state).0.dim();
        ClStatus::Ok
    })
}

/// Work extractable from internal coherence at inverse temperature `beta`, in units of `k_B T`.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_w_coh(state: *const ClState, beta: f64, out: *mut f64) -> ClStatus {
    guard(|| {
        non_null!(state, out);
        let rho = &(*state).0;
        let g = try_core!(gibbs(rho.system(), beta));
        *out = try_core!(w_coh(rho, &g)).value;
        ClStatus::Ok
    })
}

/// Work extractable from the energy populations alone.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_w_incoh(state: *const ClState, beta: f64, out: *mut f64) -> ClStatus {
    guard(|| {
        non_null!(state, out);
        let rho = &(*state).0;
        let g = try_core!(gibbs(rho.system(), beta));
        *out = try_core!(w_incoh(rho, &g)).value;
        ClStatus::Ok
    })
}

/// Quantum Fisher information with respect to the system Hamiltonian.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_qfi(state: *const ClState, out: *mut f64) -> ClStatus {
    guard(|| {
        non_null!(state, out);
        let rho = &(*state).0;
        *out = try_core!(qfi(rho.matrix(), &rho.hamiltonian()));
        ClStatus::Ok
    })
}

/// Wigner-Yanase-Dyson skew information of order `alpha ∈ (0, 1)`.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_skew_information(state: *const ClState, alpha: f64, out: *mut f64) -> ClStatus {
    guard(|| {
        non_null!(state, out);
        let rho = &(*state).0;
        *out = try_core!(skew_information(rho.matrix(), &rho.hamiltonian(), alpha));
        ClStatus::Ok
    })
}

/// Looks up a trade-off bound by name (`prop1`, `theorem1`, `theorem2`, `eq4`, `eq6`, `tight_binomial`, ...).
///
/// # Safety
/// `state` must be live, `name` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_tradeoff_bound(
    state: *const ClState,
    beta: f64,
    name: *const c_char,
    out: *mut ClBound,
) -> ClStatus {
    guard(|| {
        non_null!(state, name, out);
        let name = CStr::from_ptr(name).to_string_lossy();
        let rho = &(*state).0;
        let g = try_core!(gibbs(rho.system(), beta));
        let report = try_core!(tradeoff_report(rho, &g));
        match report.bound(&name) {
            Some(b) => {
                *out = ClBound {
                    lhs: b.lhs,
                    rhs: b.rhs,
                    slack: b.slack,
                    holds: b.holds,
                    saturated: b.saturated,
                };
                ClStatus::Ok
            }
            None => fail(ClStatus::NotFound, format!("bound `{name}` does not apply to this state")),
        }
    })
}

/// All `2^n` levels of the periodic transverse-field Ising chain, ascending.
///
/// Writes at most `capacity` values to `levels` and the full count to `len`;
/// returns [`ClStatus::BufferTooSmall`] when `capacity < 2^n`.
///
/// # Safety
/// `levels` must hold `capacity` values (may be null when `capacity == 0`); `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_ising_spectrum(
    n: usize,
    h: f64,
    j: f64,
    levels: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> ClStatus {
    guard(|| {
        non_null!(len);
        let chain = try_core!(IsingChain::new(n, h, j));
        let spec = try_core!(full_spectrum(&chain));
        *len = spec.len();
        if capacity < spec.len() {
            return fail(ClStatus::BufferTooSmall, format!("need room for {} levels", spec.len()));
        }
        non_null!(levels);
        ptr::copy_nonoverlapping(spec.as_ptr(), levels, spec.len());
        ClStatus::Ok
    })
}
