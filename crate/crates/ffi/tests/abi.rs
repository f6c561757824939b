use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use intval_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ivp_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn fixed_divisor_and_membership() {
    let mut out = ptr::null_mut();
    let st = unsafe { ivp_fixed_divisor(cstr("[0,-1,1]").as_ptr(), &mut out) };
    assert_eq!(st, IvpStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(out) }.to_str().unwrap(), "2");
    unsafe { ivp_string_free(out) };

    let mut member = false;
    let st = unsafe { ivp_is_member(cstr("[0,-1,1]/2").as_ptr(), &mut member) };
    assert_eq!(st, IvpStatus::Ok);
    assert!(member);

    let st = unsafe { ivp_fixed_divisor(cstr("[0,1").as_ptr(), &mut out) };
    assert_eq!(st, IvpStatus::Parse);
    assert!(!last_error().contains('\n'));
}

#[test]
fn null_arguments() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ivp_fixed_divisor(ptr::null(), &mut out) }, IvpStatus::NullPointer);
    assert_eq!(
        unsafe { ivp_fixed_divisor(cstr("[1]").as_ptr(), ptr::null_mut()) },
        IvpStatus::NullPointer
    );
    assert_eq!(unsafe { ivp_artifact_verify(ptr::null(), ptr::null_mut()) }, IvpStatus::NullPointer);
    unsafe { ivp_artifact_free(ptr::null_mut()) };
    unsafe { ivp_string_free(ptr::null_mut()) };
}

#[test]
fn construct_round_trip_verify() {
    let lengths = [2u32, 2];
    let mut a = ptr::null_mut();
    assert_eq!(
        unsafe { ivp_construct_lengths(lengths.as_ptr(), 2, 0, &mut a) },
        IvpStatus::Ok
    );
    let mut degree = 0;
    unsafe { ivp_artifact_degree(a, &mut degree) };
    assert_eq!(degree, 7);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ivp_artifact_to_json(a, &mut json) }, IvpStatus::Ok);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { ivp_artifact_from_json(json, &mut b) }, IvpStatus::Ok);
    let mut failed = 1;
    assert_eq!(unsafe { ivp_artifact_verify(b, &mut failed) }, IvpStatus::Ok);
    assert_eq!(failed, 0);

    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap();
    let tampered = text.replacen("\"c\": \"5\"", "\"c\": \"25\"", 1);
    assert_ne!(tampered, text);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ivp_artifact_from_json(cstr(&tampered).as_ptr(), &mut t) }, IvpStatus::Ok);
    assert_eq!(unsafe { ivp_artifact_verify(t, &mut failed) }, IvpStatus::VerificationFailed);
    assert!(failed > 0);
    assert!(last_error().starts_with("failed checks"));

    unsafe {
        ivp_string_free(json);
        ivp_artifact_free(a);
        ivp_artifact_free(b);
        ivp_artifact_free(t);
    }
}

#[test]
fn transfer_lengths() {
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { ivp_construct_transfer(3, ptr::null(), &mut a) }, IvpStatus::Ok);
    let mut buf = [0usize; 4];
    let mut count = 0;
    unsafe { ivp_artifact_lengths(a, buf.as_mut_ptr(), buf.len(), &mut count) };
    assert_eq!(&buf[..count], &[2, 4]);
    unsafe { ivp_artifact_free(a) };

    let primes = [2u64];
    assert_eq!(
        unsafe { ivp_construct_transfer(1, primes.as_ptr(), &mut a) },
        IvpStatus::InvalidArgument
    );
}

#[test]
fn bad_json_is_reported() {
    let mut a = ptr::null_mut();
    let st = unsafe { ivp_artifact_from_json(cstr("{\"kind\":\"nope\"}").as_ptr(), &mut a) };
    assert_eq!(st, IvpStatus::Json);
    assert!(a.is_null());
}

/// The directory cargo built this test into, which also holds the
/// staticlib compiled from the same sources.
fn deps_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_staticlib() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = deps_dir();
    if !lib_dir.join("libintval_ffi.a").exists() {
        panic!("static library not found in {}", lib_dir.display());
    }
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(lib_dir.join("libintval_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success(), "C smoke program failed to compile");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke program failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
