use std::ffi::{CStr, CString};
use std::ptr;

use coherence_ledger_ffi::*;

fn last_error() -> String {
    let p = cl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn state_from_json(text: &str) -> (ClStatus, *mut ClState) {
    let doc = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { cl_state_from_json(doc.as_ptr(), &mut out) };
    (status, out)
}

#[test]
fn dicke_state_from_json() {
    let (status, state) = state_from_json(r#"{"beta": 1, "state": {"kind": "dicke", "params": {"n": 4, "k": 2}}}"#);
    assert_eq!(status, ClStatus::Ok);
    let mut w = 0.0;
    let mut dim = 0;
    unsafe {
        assert_eq!(cl_state_dimension(state, &mut dim), ClStatus::Ok);
        assert_eq!(cl_w_coh(state, 1.0, &mut w), ClStatus::Ok);
    }
    assert_eq!(dim, 16);
    assert!((w - 6f64.ln()).abs() < 1e-6);

    let name = CString::new("prop1").unwrap();
    let mut b = ClBound::default();
    assert_eq!(unsafe { cl_tradeoff_bound(state, 1.0, name.as_ptr(), &mut b) }, ClStatus::Ok);
    assert!(b.holds && b.saturated);
    let missing = CString::new("eq4").unwrap();
    assert_eq!(unsafe { cl_tradeoff_bound(state, 1.0, missing.as_ptr(), &mut b) }, ClStatus::NotFound);
    unsafe { cl_state_free(state) };
}

#[test]
fn dense_state_and_clock_resources() {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { cl_system_qubits(1, 1.0, &mut sys) }, ClStatus::Ok);
    let re = [0.5, 0.5, 0.5, 0.5];
    let im = [0.0; 4];
    let mut state = ptr::null_mut();
    assert_eq!(unsafe { cl_state_dense(sys, re.as_ptr(), im.as_ptr(), 2, &mut state) }, ClStatus::Ok);
    let (mut f, mut s) = (0.0, 0.0);
    unsafe {
        assert_eq!(cl_qfi(state, &mut f), ClStatus::Ok);
        assert_eq!(cl_skew_information(state, 0.5, &mut s), ClStatus::Ok);
    }
    assert!((f - 1.0).abs() < 1e-12 && (s - 0.25).abs() < 1e-12);
    assert_eq!(unsafe { cl_skew_information(state, 1.5, &mut s) }, ClStatus::InvalidInput);
    unsafe {
        cl_state_free(state);
        cl_system_free(sys);
    }
}

#[test]
fn general_system_constructor() {
    let levels = [0.0, 1.0, 0.0, 1.0, 2.0];
    let dims = [2usize, 3];
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { cl_system_new(levels.as_ptr(), dims.as_ptr(), 2, &mut sys) }, ClStatus::Ok);
    let mut d = 0;
    assert_eq!(unsafe { cl_system_dimension(sys, &mut d) }, ClStatus::Ok);
    assert_eq!(d, 6);
    unsafe { cl_system_free(sys) };
}

#[test]
fn errors_are_reported() {
    let (status, _) = state_from_json("{");
    assert_eq!(status, ClStatus::InvalidInput);
    assert!(last_error().contains("JSON"));

    let (status, _) = state_from_json(
        r#"{"system": {"local_spectra": [[0, 1]]}, "beta": 1,
            "state": {"kind": "dense", "matrix": [[[0.5, 0], [1, 0]], [[0, 0], [0.5, 0]]]}}"#,
    );
    assert_eq!(status, ClStatus::Numerical);
    assert!(last_error().contains("Hermitian"));

    let mut out = 0.0;
    assert_eq!(unsafe { cl_qfi(ptr::null(), &mut out) }, ClStatus::NullPointer);
    unsafe {
        cl_state_free(ptr::null_mut());
        cl_system_free(ptr::null_mut());
    }
}

#[test]
fn ising_spectrum_buffer_protocol() {
    let mut len = 0;
    assert_eq!(
        unsafe { cl_ising_spectrum(2, 1.0, 0.0, ptr::null_mut(), 0, &mut len) },
        ClStatus::BufferTooSmall
    );
    assert_eq!(len, 4);
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { cl_ising_spectrum(2, 1.0, 0.0, buf.as_mut_ptr(), buf.len(), &mut len) }, ClStatus::Ok);
    assert_eq!(buf, vec![-2.0, 0.0, 0.0, 2.0]);
    assert_eq!(unsafe { cl_ising_spectrum(3, 1.0, 0.0, buf.as_mut_ptr(), 4, &mut len) }, ClStatus::InvalidInput);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
