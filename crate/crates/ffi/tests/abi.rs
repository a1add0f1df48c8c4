use std::ffi::{CStr, CString};
use std::ptr;

use qaoa_lab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ql_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn csp_round_trip() {
    let mut csp = ptr::null_mut();
    let text = c("csp 3 3\n2 0 1 01,10\n2 1 2 01,10\n2 0 2 01,10\n");
    unsafe {
        assert_eq!(ql_csp_parse(text.as_ptr(), &mut csp), QlStatus::Ok);
        let (mut n, mut m) = (0, 0);
        assert_eq!(ql_csp_shape(csp, &mut n, &mut m), QlStatus::Ok);
        assert_eq!((n, m), (3, 3));
        let mut cost = 0;
        assert_eq!(ql_csp_cost(csp, 0b001, &mut cost), QlStatus::Ok);
        assert_eq!(cost, 2);
        let mut count = 99;
        assert_eq!(ql_fourier_count(csp, &mut count), QlStatus::Ok);
        assert_eq!(count, 0);
        let mut gap = 0.0;
        assert_eq!(ql_spectral_gap(csp, 0.5, &mut gap), QlStatus::Ok);
        assert!(gap > 0.0);
        let (g, b) = ([0.0f64], [0.0f64]);
        let mut v = 0.0;
        assert_eq!(ql_qaoa_objective(csp, 1, g.as_ptr(), b.as_ptr(), &mut v), QlStatus::Ok);
        assert!((v - 1.5).abs() < 1e-12);
        let (mut gg, mut bb, mut vv) = (0.0, 0.0, 0.0);
        assert_eq!(ql_qaoa_grid_search(csp, 20, &mut gg, &mut bb, &mut vv), QlStatus::Ok);
        assert!(vv >= v);
        ql_csp_free(csp);
    }
}

#[test]
fn errors_are_reported() {
    let mut csp = ptr::null_mut();
    let bad = c("csp 2 1\n2 0 5 11\n");
    unsafe {
        assert_ne!(ql_csp_parse(bad.as_ptr(), &mut csp), QlStatus::Ok);
        assert!(csp.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(ql_csp_parse(ptr::null(), &mut csp), QlStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut count = 0;
        assert_eq!(ql_fourier_count(ptr::null(), &mut count), QlStatus::NullPointer);
        assert_eq!(ql_count_marked(0, ptr::null(), 0, &mut count), QlStatus::InvalidArgument);
        ql_csp_free(ptr::null_mut());
    }
}

#[test]
fn compile_and_verify() {
    let mut circ = ptr::null_mut();
    let mut comp = ptr::null_mut();
    let text = c("circuit 2\nh 0\nt 0\ncp 0 1\nh 0\nh 1\n");
    unsafe {
        assert_eq!(ql_circuit_parse(text.as_ptr(), &mut circ), QlStatus::Ok);
        assert_eq!(ql_compile(circ, &mut comp), QlStatus::Ok);
        let (mut total, mut aux) = (0, 0);
        assert_eq!(ql_compiled_shape(comp, &mut total, &mut aux), QlStatus::Ok);
        assert_eq!(total, 2 + aux);
        let (mut tv, mut amp, mut passed) = (1.0, 1.0, 0);
        assert_eq!(ql_verify(circ, comp, 1e-9, &mut tv, &mut amp, &mut passed), QlStatus::Ok);
        assert_eq!(passed, 1);
        assert!(tv < 1e-9 && amp < 1e-9);
        ql_compiled_free(comp);
        ql_circuit_free(circ);
    }
}

#[test]
fn counting_and_version() {
    let marked = [1u64, 4, 9, 12, 13];
    let mut count = 0;
    unsafe {
        assert_eq!(ql_count_marked(4, marked.as_ptr(), marked.len(), &mut count), QlStatus::Ok);
        assert_eq!(count, 5);
        assert_eq!(CStr::from_ptr(ql_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
