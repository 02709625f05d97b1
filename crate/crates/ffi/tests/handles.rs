use std::ffi::{CStr, CString};
use std::ptr;

use degenwave_ffi::*;

const WD: &str = "[coefficients]\nkind = \"power\"\nK_exp = 0.5\n";

fn small_report() -> String {
    format!("{WD}[mesh]\nN = 32\n[time]\nT = 2.0\ndt = 0.005\nstride = 4\n[analysis]\nwindow = [0.2, 1.0]\n")
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    dw_string_free(s);
    out
}

#[test]
fn classify_through_handle() {
    let text = CString::new(WD).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(dw_scenario_new(text.as_ptr(), ptr::null(), &mut h), DwStatus::Ok);
        let (mut k, mut eps0) = (0.0, 0.0);
        assert_eq!(dw_scenario_degeneracy(h, &mut k, &mut eps0), DwStatus::Ok);
        assert_eq!((k, eps0), (0.5, 1.5));
        let mut s = ptr::null_mut();
        assert_eq!(dw_scenario_classify_json(h, &mut s), DwStatus::Ok);
        assert!(take(s).contains("\"classification\": \"WD\""));
        assert!(dw_last_error().is_null());
        dw_scenario_free(h);
    }
}

#[test]
fn report_through_handle_is_deterministic() {
    let text = CString::new(small_report()).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(dw_scenario_new(text.as_ptr(), ptr::null(), &mut h), DwStatus::Ok);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(dw_scenario_report_json(h, &mut a), DwStatus::Ok);
        assert_eq!(dw_scenario_report_json(h, &mut b), DwStatus::Ok);
        let (a, b) = (take(a), take(b));
        assert_eq!(a, b);
        assert!(a.contains("\"bound_ok\": true"));
        dw_scenario_free(h);
    }
}

#[test]
fn hypothesis_violation_status() {
    let text = CString::new("[coefficients]\nkind = \"power\"\nK_exp = 1.5\nh_exp = 0.5\nb_scale = 1.0\n").unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(dw_scenario_new(text.as_ptr(), ptr::null(), &mut h), DwStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(dw_scenario_report_json(h, &mut s), DwStatus::HypothesisViolation);
        assert!(s.is_null());
        let msg = CStr::from_ptr(dw_last_error()).to_str().unwrap();
        assert!(msg.contains("Ass2"), "{msg}");
        dw_scenario_free(h);
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/degenwave.h")).unwrap();
    for name in ["dw_scenario_new", "dw_scenario_free", "dw_scenario_report_json", "dw_last_error", "DW_STATUS_HYPOTHESIS_VIOLATION", "typedef struct DwScenario DwScenario"] {
        assert!(header.contains(name), "missing {name}");
    }
}
