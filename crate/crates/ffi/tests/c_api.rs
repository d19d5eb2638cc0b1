use std::ffi::{CStr, CString};
use std::ptr;

use zigzag_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { zz_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn potential(json: &str) -> *mut ZzPotential {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { zz_potential_from_json(text.as_ptr(), &mut p) }, ZzStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn free_delta0_matches_closed_form() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { zz_potential_constant(0.0, &mut p) }, ZzStatus::Ok);
    for &lambda in &[-3.0, 0.5, 10.0, 250.0] {
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(unsafe { zz_delta0(p, lambda, 0.0, &mut re, &mut im) }, ZzStatus::Ok);
        let s = cos_two_sqrt(lambda);
        let expected = (9.0 * s - 1.0) / 8.0;
        assert!((re - expected).abs() < 1e-10, "λ = {lambda}: {re} vs {expected}");
        assert!(im.abs() < 1e-12);
    }
    unsafe { zz_potential_free(p) };
}

/// `cos 2√λ`, continued to `λ < 0` as `cosh 2√−λ`.
fn cos_two_sqrt(lambda: f64) -> f64 {
    if lambda >= 0.0 {
        (2.0 * lambda.sqrt()).cos()
    } else {
        (2.0 * (-lambda).sqrt()).cosh()
    }
}

#[test]
fn monodromy_determinant() {
    let p = potential(r#"{"type": "fourier", "a0": 0.0, "a": [1.0]}"#);
    let mut m = [0.0f64; 8];
    assert_eq!(unsafe { zz_monodromy_k(p, 7.3, 0.0, 2, 5, m.as_mut_ptr()) }, ZzStatus::Ok);
    let e = |i: usize| zigzag::Complex64::new(m[2 * i], m[2 * i + 1]);
    let det = e(0) * e(3) - e(1) * e(2);
    let expected = zigzag::Complex64::from_polar(1.0, -4.0 * std::f64::consts::PI / 5.0);
    assert!((det - expected).norm() < 1e-10);
    assert_eq!(unsafe { zz_monodromy_k(p, 7.3, 0.0, 3, 5, m.as_mut_ptr()) }, ZzStatus::InvalidArgument);
    unsafe { zz_potential_free(p) };
}

#[test]
fn free_n3_has_no_gaps() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { zz_potential_constant(0.0, &mut p) }, ZzStatus::Ok);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { zz_bands_assemble(p, 3, 200.0, &mut b) }, ZzStatus::Ok);
    let (mut bands, mut gaps, mut flats) = (0usize, 0usize, 0usize);
    unsafe {
        assert_eq!(zz_bands_count(b, &mut bands), ZzStatus::Ok);
        assert_eq!(zz_bands_gap_count(b, &mut gaps), ZzStatus::Ok);
        assert_eq!(zz_bands_flat_count(b, &mut flats), ZzStatus::Ok);
    }
    assert_eq!(gaps, 0);
    assert!(bands >= 1);
    // flat bands at π²n² below 200
    assert_eq!(flats, 4);
    let mut mu = 0.0;
    assert_eq!(unsafe { zz_bands_flat_get(b, 1, &mut mu) }, ZzStatus::Ok);
    assert!((mu - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
    // consecutive bands touch, so together they cover [0, 200]
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { zz_bands_get(b, 0, &mut lo, &mut hi) }, ZzStatus::Ok);
    assert!(lo.abs() < 1e-9);
    for i in 1..bands {
        let (mut next_lo, mut next_hi) = (0.0, 0.0);
        assert_eq!(unsafe { zz_bands_get(b, i, &mut next_lo, &mut next_hi) }, ZzStatus::Ok);
        assert!((next_lo - hi).abs() < 1e-9 * (1.0 + hi));
        hi = next_hi;
    }
    assert!((hi - 200.0).abs() < 1e-9);
    assert_eq!(unsafe { zz_bands_get(b, bands, &mut lo, &mut hi) }, ZzStatus::OutOfRange);
    assert!(last_error().contains("out of range"));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { zz_bands_to_json(b, &mut json) }, ZzStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["N"], 3);
    assert_eq!(value["gaps"].as_array().unwrap().len(), 0);
    unsafe {
        zz_string_free(json);
        zz_bands_free(b);
        zz_potential_free(p);
    }
}

#[test]
fn odd_gaps_of_five_chains() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { zz_potential_constant(0.0, &mut p) }, ZzStatus::Ok);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { zz_bands_assemble(p, 5, 120.0, &mut b) }, ZzStatus::Ok);
    let mut gaps = 0usize;
    assert_eq!(unsafe { zz_bands_gap_count(b, &mut gaps) }, ZzStatus::Ok);
    assert!(gaps >= 2);
    for i in 0..gaps {
        let (mut n, mut lo, mut hi) = (0usize, 0.0, 0.0);
        assert_eq!(unsafe { zz_bands_gap_get(b, i, &mut n, &mut lo, &mut hi) }, ZzStatus::Ok);
        assert_eq!(n % 2, 1);
        assert!(hi > lo);
    }
    unsafe {
        zz_bands_free(b);
        zz_potential_free(p);
    }
}

#[test]
fn flatband_residual() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { zz_potential_constant(0.0, &mut p) }, ZzStatus::Ok);
    let mut r = 1.0;
    let mu = std::f64::consts::PI.powi(2);
    assert_eq!(unsafe { zz_flatband_residual(p, mu, 1, 3, &mut r) }, ZzStatus::Ok);
    assert!(r < 1e-9);
    assert_eq!(unsafe { zz_flatband_residual(p, 5.0, 1, 3, &mut r) }, ZzStatus::InvalidArgument);
    unsafe { zz_potential_free(p) };
}

#[test]
fn error_paths() {
    let bad = CString::new(r#"{"type": "piecewise", "values": [1.0]}"#).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { zz_potential_from_json(bad.as_ptr(), &mut p) }, ZzStatus::InvalidPotential);
    assert!(p.is_null());
    assert!(last_error().contains("breakpoints"));

    assert_eq!(unsafe { zz_potential_from_json(ptr::null(), &mut p) }, ZzStatus::NullPointer);
    let mut re = 0.0;
    assert_eq!(unsafe { zz_delta0(ptr::null(), 1.0, 0.0, &mut re, ptr::null_mut()) }, ZzStatus::NullPointer);

    assert_eq!(unsafe { zz_potential_constant(0.0, &mut p) }, ZzStatus::Ok);
    let mut m = [0.0f64; 8];
    let pole = std::f64::consts::PI.powi(2);
    assert_eq!(unsafe { zz_monodromy_k(p, pole, 0.0, 1, 3, m.as_mut_ptr()) }, ZzStatus::DirichletPole);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { zz_bands_assemble(p, 4, 100.0, &mut b) }, ZzStatus::InvalidArgument);
    assert!(last_error().contains("odd"));
    assert_eq!(unsafe { zz_bands_assemble(p, 3, -1.0, &mut b) }, ZzStatus::InvalidArgument);
    unsafe {
        zz_potential_free(p);
        zz_potential_free(ptr::null_mut());
        zz_bands_free(ptr::null_mut());
        zz_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(zz_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/zigzag.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct ZzPotential ZzPotential;"));
    assert!(header.contains("ZZ_STATUS_DIRICHLET_POLE = 4"));
}
