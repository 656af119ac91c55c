use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ralmc_ffi::*;

const DEPT: &str = include_str!("../../core/models/dept.rbm");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = ralmc_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn parse(src: &str) -> (RalmcStatus, *mut RalmcModel) {
    let mut m = ptr::null_mut();
    let s = unsafe { ralmc_model_parse(c(src).as_ptr(), &mut m) };
    (s, m)
}

fn check(m: *const RalmcModel, state: Option<&str>, eta: u64, f: &str) -> (RalmcStatus, bool) {
    let state = state.map(c);
    let mut v = false;
    let s = unsafe {
        ralmc_check(
            m,
            state.as_ref().map_or(ptr::null(), |s| s.as_ptr()),
            eta,
            c(f).as_ptr(),
            &mut v,
        )
    };
    (s, v)
}

#[test]
fn department_through_the_c_abi() {
    let (s, m) = parse(DEPT);
    assert_eq!(s, RalmcStatus::Ok);
    assert!(unsafe { ralmc_model_is_irbm(m) });
    assert_eq!(check(m, Some("q0"), 8, "<<p1,p2,l1,l2,l3>>F(al1 & al2 & al3)"), (RalmcStatus::Ok, true));
    assert_eq!(check(m, None, 8, "<<l1,l2,l3>>F(al1 & al2 & al3)"), (RalmcStatus::Ok, false));
    assert!(last_error().is_none());
    unsafe { ralmc_model_free(m) };
}

#[test]
fn failures_set_codes_and_messages() {
    let (s, m) = parse("model broken\nagents");
    assert_eq!(s, RalmcStatus::Syntax);
    assert!(m.is_null());
    assert!(last_error().is_some());

    let (s, m) = parse(DEPT);
    assert_eq!(s, RalmcStatus::Ok);
    assert_eq!(check(m, Some("nowhere"), 1, "ad").0, RalmcStatus::UnknownName);
    assert!(last_error().unwrap().contains("nowhere"));
    assert_eq!(check(m, None, 1, "<<ghost>>X ad").0, RalmcStatus::UnknownName);
    assert_eq!(check(m, None, 1, "<<l1>>X (").0, RalmcStatus::Syntax);
    assert_eq!(check(ptr::null(), None, 1, "ad").0, RalmcStatus::NullArgument);
    assert_eq!(check(m, None, 1, "ad").0, RalmcStatus::Ok);
    assert!(last_error().is_none());
    unsafe { ralmc_model_free(m) };

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ralmc_model_parse(ptr::null(), &mut out) }, RalmcStatus::NullArgument);
    unsafe { ralmc_model_free(ptr::null_mut()) };
}

#[test]
fn two_resource_models_are_unsupported() {
    let src = include_str!("../../core/models/two_resource.rbm");
    assert_eq!(parse(src).0, RalmcStatus::Unsupported);
}

#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/ralmc.h");
    assert!(header.exists());
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        return;
    };
    assert!(status.success());
}
