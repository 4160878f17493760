use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use floiation_ffi::*;
use serde_json::Value;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> Value {
    let v = serde_json::from_str(CStr::from_ptr(p).to_str().unwrap()).unwrap();
    fl_string_free(p);
    v
}

unsafe fn last_error() -> String {
    CStr::from_ptr(fl_last_error()).to_string_lossy().into_owned()
}

#[test]
fn bundled_report_and_audit() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(fl_complex_bundled(cs("T3CUBE").as_ptr(), &mut c), FlStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(fl_complex_report(c, &mut s), FlStatus::Ok);
        assert_eq!(take(s)["E"], 7);

        let mut o = ptr::null_mut();
        let spec = cs(r#"{"backend":"zn","generators":["x","y","z"],"field":"Q","functionals":[[0,0,1],[0,1,0],[1,0,0]]}"#);
        assert_eq!(fl_order_from_json(spec.as_ptr(), 128, &mut o), FlStatus::Ok);
        assert_eq!(fl_audit3_order(c, o, &mut s), FlStatus::Ok);
        let r = take(s);
        assert_eq!(r["red_components"], 1);
        assert_eq!(r["is_local_orientation"], true);

        let dir = [1i8; 7];
        assert_eq!(fl_audit3_direction(c, dir.as_ptr(), 7, &mut s), FlStatus::Ok);
        assert_eq!(take(s)["is_regular"], true);
        assert_eq!(fl_audit3_direction(c, dir.as_ptr(), 3, &mut s), FlStatus::Floation3);
        assert!(last_error().contains("3 entries"));

        assert_eq!(fl_audit3_enumerate(c, true, &mut s), FlStatus::Ok);
        let e = take(s);
        assert_eq!(e["candidates"], 128);
        assert_eq!(e["regularity_mismatches"], 0);

        let mut cmp = 9;
        assert_eq!(fl_order_compare(o, cs("z").as_ptr(), cs("x y").as_ptr(), &mut cmp), FlStatus::Ok);
        assert_eq!(cmp, 1);
        assert_eq!(fl_order_compare(o, cs("w").as_ptr(), cs("x").as_ptr(), &mut cmp), FlStatus::Input);

        fl_order_free(o);
        fl_complex_free(c);
    }
}

#[test]
fn torus_and_straighten() {
    unsafe {
        let (mut tor, mut oct, mut lex, mut slex) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(fl_complex_bundled(cs("TOR2").as_ptr(), &mut tor), FlStatus::Ok);
        assert_eq!(fl_complex_bundled(cs("OCT8").as_ptr(), &mut oct), FlStatus::Ok);
        let spec = cs(r#"{"backend":"zn","generators":["a","b"],"field":"Q","functionals":[[0,1],[1,0]]}"#);
        assert_eq!(fl_order_from_json(spec.as_ptr(), 128, &mut lex), FlStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(fl_torus_classify(tor, lex, 12, 2000, &mut s), FlStatus::Ok);
        let v = take(s);
        assert_eq!(v["archimedean"], false);
        assert_eq!(v["closed_leaf_class"], serde_json::json!([1, 0]));
        assert_eq!(fl_torus_classify(oct, lex, 12, 2000, &mut s), FlStatus::Floation2);

        let spec = cs(r#"{"backend":"surface_lex","generators":["a","b","c","d"],"field":"lambda6",
            "h1":[1,[0,1],[0,0,1],[0,0,0,1]],"depth2":[1,[0,1],[0,0,1],[0,0,0,1],[0,0,0,0,1],-1],
            "relator":[1,0,0,0,0,1]}"#);
        assert_eq!(fl_order_from_json(spec.as_ptr(), 128, &mut slex), FlStatus::Ok);
        assert_eq!(fl_straighten(oct, slex, 8, 7, 1e-3, 200, &mut s), FlStatus::Ok);
        assert_eq!(take(s)["is_lamination"], true);
        assert_eq!(fl_straighten(tor, lex, 8, 7, 1e-3, 200, &mut s), FlStatus::Model);
        for o in [lex, slex] {
            fl_order_free(o);
        }
        fl_complex_free(tor);
        fl_complex_free(oct);
    }
}

#[test]
fn bad_arguments() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(fl_complex_bundled(ptr::null(), &mut c), FlStatus::NullArgument);
        assert_eq!(fl_complex_bundled(cs("NOPE").as_ptr(), &mut c), FlStatus::Complex);
        assert!(!fl_last_error().is_null());
        assert_eq!(fl_complex_from_json(cs("{").as_ptr(), &mut c), FlStatus::Complex);
        let mut o = ptr::null_mut();
        assert_eq!(fl_order_from_json(cs(r#"{"backend":"nope"}"#).as_ptr(), 128, &mut o), FlStatus::Order);
        let bad = [0xffu8, 0];
        assert_eq!(fl_complex_bundled(bad.as_ptr().cast(), &mut c), FlStatus::InvalidUtf8);
        let mut s = ptr::null_mut();
        assert_eq!(fl_complex_report(ptr::null(), &mut s), FlStatus::NullArgument);
        assert_eq!(fl_complex_bundled(cs("TOR2").as_ptr(), ptr::null_mut()), FlStatus::NullArgument);
        assert_eq!(fl_complex_bundled(cs("TOR2").as_ptr(), &mut c), FlStatus::Ok);
        assert!(fl_last_error().is_null());
        assert_eq!(fl_audit3_enumerate(c, false, &mut s), FlStatus::Input);
        fl_complex_free(c);
        fl_complex_free(ptr::null_mut());
        fl_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(fl_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

/// Compiles a small C program against the generated header and the static
/// library.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib_dir = deps.parent().unwrap().to_path_buf();
    let lib = lib_dir.join("libfloiation_ffi.a");
    if !lib.exists() {
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "floiation-ffi", "--lib"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "floiation.h"
int main(void) {
    FlComplex *c = NULL;
    if (fl_complex_bundled("T3CUBE", &c) != FL_STATUS_OK) return 1;
    char *out = NULL;
    if (fl_complex_report(c, &out) != FL_STATUS_OK) return 2;
    if (strstr(out, "\"E\":7") == NULL) return 3;
    fl_string_free(out);
    if (fl_complex_bundled("NOPE", &c) != FL_STATUS_COMPLEX) return 4;
    if (fl_last_error() == NULL) return 5;
    fl_complex_free(c);
    puts("ok");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
