use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cyclealg::derivations::{DerivativeAt, GenDerivation, InnerDerivation};
use cyclealg::reconstruction::GlobalDerivation;
use cyclealg::{sample, CycleElement, MatC, RepPoint};
use cyclealg_ffi::*;
use num_complex::Complex64;
use serde_json::Value;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a returned string.
unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    cyc_string_free(s);
    out
}

fn last_error() -> String {
    let p = cyc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

unsafe fn element(a: &CycleElement) -> *mut CycElement {
    let json = cstr(&serde_json::to_string(a).unwrap());
    let mut h = ptr::null_mut();
    assert_eq!(cyc_element_from_json(json.as_ptr(), &mut h), CycStatus::Ok);
    h
}

#[test]
fn element_round_trip_and_product() {
    unsafe {
        let mut rng = sample::rng(1);
        let a = sample::element(&mut rng, 3, 4);
        let b = sample::element(&mut rng, 3, 4);
        let (ha, hb) = (element(&a), element(&b));
        assert_eq!(cyc_element_dim(ha), 3);
        assert_eq!(cyc_element_dim(ptr::null()), 0);

        let mut hab = ptr::null_mut();
        assert_eq!(cyc_element_mul(ha, hb, &mut hab), CycStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(cyc_element_to_json(hab, &mut s), CycStatus::Ok);
        let back: CycleElement = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(back, a.mul_elem(&b).unwrap());

        let mut hsum = ptr::null_mut();
        assert_eq!(cyc_element_add(ha, hb, &mut hsum), CycStatus::Ok);
        let mut s = ptr::null_mut();
        cyc_element_to_json(hsum, &mut s);
        let back: CycleElement = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(back, a.add_elem(&b).unwrap());

        for h in [ha, hb, hab, hsum] {
            cyc_element_free(h);
        }
        cyc_element_free(ptr::null_mut());
    }
}

#[test]
fn evaluation_writes_interleaved_matrix() {
    unsafe {
        let mut z = ptr::null_mut();
        assert_eq!(cyc_element_generator(2, 1, true, &mut z), CycStatus::Ok);
        let point = cstr(r#"{"kind":"lambda","re":0.5,"im":0.25}"#);
        let mut buf = [0.0f64; 8];
        let mut dim = 0usize;
        assert_eq!(cyc_element_eval(z, point.as_ptr(), buf.as_mut_ptr(), buf.len(), &mut dim), CycStatus::Ok);
        assert_eq!(dim, 2);
        assert_eq!(buf, [0.0, 0.0, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0]);

        let mut small = [0.0f64; 4];
        let status = cyc_element_eval(z, point.as_ptr(), small.as_mut_ptr(), small.len(), &mut dim);
        assert_eq!(status, CycStatus::BufferTooSmall);
        assert!(last_error().contains("need 8"));

        let diag = cstr(r#"{"kind":"diag0","i":1}"#);
        let mut e = ptr::null_mut();
        assert_eq!(cyc_element_generator(2, 1, false, &mut e), CycStatus::Ok);
        assert_eq!(cyc_element_eval(e, diag.as_ptr(), small.as_mut_ptr(), 2, &mut dim), CycStatus::Ok);
        assert_eq!((dim, small[0], small[1]), (1, 1.0, 0.0));

        cyc_element_free(z);
        cyc_element_free(e);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut h = ptr::null_mut();
        let bad = cstr("{\"n\": 2,");
        assert_eq!(cyc_element_from_json(bad.as_ptr(), &mut h), CycStatus::Parse);
        assert!(last_error().contains("line 1"));

        let outside = cstr(r#"{"n":2,"realized":[[[],[[1,0]]],[[],[]]]}"#);
        assert_eq!(cyc_element_from_json(outside.as_ptr(), &mut h), CycStatus::NotInAlgebra);
        assert!(h.is_null());

        assert_eq!(cyc_element_from_json(ptr::null(), &mut h), CycStatus::NullPointer);
        assert_eq!(cyc_element_generator(2, 3, true, &mut h), CycStatus::IndexOutOfRange);

        let (a, b) = (element(&CycleElement::identity(2)), element(&CycleElement::identity(3)));
        assert_eq!(cyc_element_mul(a, b, &mut h), CycStatus::DimensionMismatch);
        cyc_element_free(a);
        cyc_element_free(b);

        // A successful call clears the error.
        assert_eq!(cyc_element_generator(2, 1, true, &mut h), CycStatus::Ok);
        assert!(cyc_last_error().is_null());
        cyc_element_free(h);
    }
}

unsafe fn verdict(d: &GenDerivation, tol: f64) -> (CycStatus, bool, Value) {
    let json = cstr(&serde_json::to_string(d).unwrap());
    let mut h = ptr::null_mut();
    assert_eq!(cyc_derivation_from_json(json.as_ptr(), &mut h), CycStatus::Ok);
    let mut out = ptr::null_mut();
    let mut inner = false;
    let status = cyc_inner_check(h, tol, 0, &mut out, &mut inner);
    cyc_derivation_free(h);
    let report = if out.is_null() { Value::Null } else { serde_json::from_str(&take(out)).unwrap() };
    (status, inner, report)
}

#[test]
fn inner_check_verdicts() {
    unsafe {
        let point = RepPoint::Lambda(Complex64::new(0.2, -0.6));
        let x = sample::matc(&mut sample::rng(2), 3);
        let d = GenDerivation::from_derivation(&InnerDerivation::new(point, x), 3).unwrap();
        let (status, inner, report) = verdict(&d, 1e-8);
        assert_eq!((status, inner), (CycStatus::Ok, true));
        assert_eq!(report["verdict"], "inner");
        let _: MatC = serde_json::from_value(report["X"].clone()).unwrap();

        let f = GenDerivation::from_derivation(&DerivativeAt { lambda: Complex64::new(0.5, 0.0) }, 2).unwrap();
        let (status, inner, report) = verdict(&f, 1e-8);
        assert_eq!((status, inner), (CycStatus::Ok, false));
        assert_eq!(report["verdict"], "not_inner");

        let (status, _, _) = verdict(&f, -1.0);
        assert_eq!(status, CycStatus::Precondition);

        let json = cstr(&serde_json::to_string(&f).unwrap());
        let mut h = ptr::null_mut();
        cyc_derivation_from_json(json.as_ptr(), &mut h);
        let mut s = ptr::null_mut();
        assert_eq!(cyc_derivation_to_json(h, &mut s), CycStatus::Ok);
        let back: GenDerivation = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(back.values_z, f.values_z);
        cyc_derivation_free(h);
    }
}

#[test]
fn reconstruct_round_trip_and_failure() {
    unsafe {
        let x0 = sample::element(&mut sample::rng(3), 2, 3);
        let json = cstr(&serde_json::to_string(&GlobalDerivation::commutator(&x0)).unwrap());
        let mut out = ptr::null_mut();
        assert_eq!(cyc_reconstruct(json.as_ptr(), 0, 8, 1e-8, 0, &mut out), CycStatus::Ok);
        let report: Value = serde_json::from_str(&take(out)).unwrap();
        assert!(report["max_residual"].as_f64().unwrap() <= 1e-8);
        assert_eq!(report["grid"], 4 * 2 * 10);

        let json = cstr(&serde_json::to_string(&GlobalDerivation::euler(2)).unwrap());
        let mut out = ptr::null_mut();
        assert_eq!(cyc_reconstruct(json.as_ptr(), 0, 8, 1e-8, 0, &mut out), CycStatus::NotLocallyInner);
        assert!(out.is_null());
        assert!(last_error().contains("not locally inner"));
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cyc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cyclealg.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for name in ["cyc_element_from_json", "cyc_inner_check", "cyc_reconstruct", "CYC_STATUS_NOT_IN_ALGEBRA"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        "#include \"cyclealg.h\"\nint main(void) { CycElement *a = 0; return (int)cyc_element_dim(a); }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .expect("a C compiler is on PATH");
    assert!(status.success());
}
