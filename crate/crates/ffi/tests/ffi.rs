use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use trigdisc_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        td_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn korobov_round_trip() {
    unsafe {
        let mut q = ptr::null_mut();
        assert_eq!(td_indexset_hyperbolic(1, 2, &mut q), TdStatus::Ok);
        assert_eq!(td_indexset_len(q), 5);
        assert_eq!(td_indexset_dim(q), 2);
        let mut k = [0i64; 2];
        assert_eq!(td_indexset_get(q, 0, k.as_mut_ptr()), TdStatus::Ok);
        assert_eq!(k, [-1, 0]);

        let (mut p, mut a) = (0u64, 0u64);
        let mut z = ptr::null_mut();
        assert_eq!(td_pointset_korobov(q, &mut z, &mut p, &mut a), TdStatus::Ok);
        assert_eq!(p, 29);
        assert_eq!(td_pointset_len(z), 29);

        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(td_certify_l2(q, z, &mut lo, &mut hi), TdStatus::Ok);
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);

        let mut lambda = ptr::null_mut();
        assert_eq!(td_indexset_difference(q, &mut lambda), TdStatus::Ok);
        assert_eq!(td_indexset_len(lambda), 13);
        let mut defect = 1.0;
        assert_eq!(td_cubature_defect(lambda, z, &mut defect), TdStatus::Ok);
        assert!(defect < 1e-10);

        let mut x = [0.0; 2];
        let mut w = 0.0;
        assert_eq!(
            td_pointset_node(z, 28, x.as_mut_ptr(), &mut w),
            TdStatus::Ok
        );
        assert_eq!(x[0], 0.0);
        assert!((w - 1.0 / 29.0).abs() < 1e-15);

        td_indexset_free(lambda);
        td_pointset_free(z);
        td_indexset_free(q);
    }
}

#[test]
fn polynomial_calls() {
    unsafe {
        let data = [0i64, 0, 1, 2];
        let mut q = ptr::null_mut();
        assert_eq!(
            td_indexset_from_vectors(2, data.as_ptr(), 2, &mut q),
            TdStatus::Ok
        );
        let re = [3.0, 0.0];
        let im = [0.0, 4.0];
        let mut t = ptr::null_mut();
        assert_eq!(
            td_polynomial_from_coeffs(q, re.as_ptr(), im.as_ptr(), &mut t),
            TdStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(td_polynomial_lq_norm(t, 2.0, &mut v), TdStatus::Ok);
        assert!((v - 5.0).abs() < 1e-12);
        assert_eq!(
            td_polynomial_lq_norm(t, f64::INFINITY, &mut v),
            TdStatus::Ok
        );
        assert!(v >= 7.0 - 1e-9);
        let (mut r, mut i) = (0.0, 0.0);
        let x = [0.0, 0.0];
        assert_eq!(
            td_polynomial_evaluate(t, x.as_ptr(), &mut r, &mut i),
            TdStatus::Ok
        );
        assert!((r - 3.0).abs() < 1e-14 && (i - 4.0).abs() < 1e-14);

        let mut g = ptr::null_mut();
        assert_eq!(td_polynomial_random(q, 5, &mut g), TdStatus::Ok);
        td_polynomial_free(g);
        td_polynomial_free(t);
        td_indexset_free(q);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut q = ptr::null_mut();
        assert_eq!(
            td_indexset_hyperbolic(1, 0, &mut q),
            TdStatus::InvalidArgument
        );
        assert!(q.is_null());
        assert!(last_error().contains("dimension"));
        assert_eq!(
            td_indexset_hyperbolic(1, 2, ptr::null_mut()),
            TdStatus::NullPointer
        );
        let mut v = 0.0;
        assert_eq!(
            td_polynomial_lq_norm(ptr::null(), 2.0, &mut v),
            TdStatus::NullPointer
        );

        assert_eq!(td_indexset_hyperbolic(1, 2, &mut q), TdStatus::Ok);
        assert_eq!(last_error(), "");
        let mut k = [0i64; 2];
        assert_eq!(
            td_indexset_get(q, 99, k.as_mut_ptr()),
            TdStatus::InvalidArgument
        );
        let mut z = ptr::null_mut();
        assert_eq!(td_pointset_random(3, 2, 1, &mut z), TdStatus::Ok);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(td_certify_l2(q, z, &mut lo, &mut hi), TdStatus::Ok);
        assert!(lo < 1e-10);
        let mut y = ptr::null_mut();
        assert_eq!(td_pointset_random(3, 3, 1, &mut y), TdStatus::Ok);
        assert_eq!(
            td_certify_l2(q, y, &mut lo, &mut hi),
            TdStatus::DimensionMismatch
        );
        td_pointset_free(y);
        td_pointset_free(z);
        td_indexset_free(q);
        td_indexset_free(ptr::null_mut());
    }
    assert_eq!(td_bss_ratio_bound(4.0), 9.0);
    let v = unsafe { CStr::from_ptr(td_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_interface() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/trigdisc.h")).unwrap();
    for name in [
        "td_indexset_hyperbolic",
        "td_pointset_korobov",
        "td_certify_l2",
        "td_last_error_message",
    ] {
        assert!(header.contains(name), "{name}");
    }
    assert!(header.contains("typedef struct TdIndexSet TdIndexSet;"));
    assert!(header.contains("TD_STATUS_OK = 0"));
}

/// Compiles and runs a C client against the static library when a C
/// compiler is present.
#[test]
fn c_client_links() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libtrigdisc_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipped", lib.display());
        return;
    }
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("client.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "trigdisc.h"
int main(void) {
    TdIndexSet *q = NULL;
    TdPointSet *z = NULL;
    uint64_t p = 0, a = 0;
    double lo = 0, hi = 0;
    if (td_indexset_hyperbolic(2, 2, &q) != TD_STATUS_OK) return 1;
    if (td_pointset_korobov(q, &z, &p, &a) != TD_STATUS_OK) return 2;
    if (td_certify_l2(q, z, &lo, &hi) != TD_STATUS_OK) return 3;
    printf("%zu %llu %.12f %.12f\n", td_indexset_len(q), (unsigned long long)p, lo, hi);
    td_pointset_free(z);
    td_indexset_free(q);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.join("client");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], "17");
    let lo: f64 = fields[2].parse().unwrap();
    let hi: f64 = fields[3].parse().unwrap();
    assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
}
