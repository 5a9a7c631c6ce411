use std::ffi::{CStr, CString};
use std::ptr;

use dyadic_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dy_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn step(m: u32, level: u32, values: &[f64]) -> *mut DyStepFunction {
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { dy_step_new(m, level, values.as_ptr(), values.len(), &mut f) },
        DyStatus::Ok
    );
    f
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { dy_string_free(s) };
    out
}

#[test]
fn norms_and_distribution() {
    let f = step(0, 2, &[4.0, 0.0, 0.0, 0.0]);
    let mut x = 0.0;
    unsafe {
        assert_eq!(dy_lp_norm(f, 1.0, &mut x), DyStatus::Ok);
        assert_eq!(x, 1.0);
        assert_eq!(dy_lp_norm(f, f64::INFINITY, &mut x), DyStatus::Ok);
        assert_eq!(x, 4.0);
        assert_eq!(dy_lorentz_norm(f, 2.0, 1.0, &mut x), DyStatus::Ok);
        assert!((x - 2.0 * 4.0 * 0.5).abs() < 1e-15);
        assert_eq!(dy_distribution(f, 1.0, &mut x), DyStatus::Ok);
        assert_eq!(x, 0.25);
        assert_eq!(dy_distribution(f, -1.0, &mut x), DyStatus::InvalidInput);
        assert_eq!(
            dy_lorentz_norm(f, f64::INFINITY, 2.0, &mut x),
            DyStatus::UnsupportedIndex
        );
        dy_step_free(f);
    }
}

#[test]
fn construction_errors_set_last_error() {
    let mut f = ptr::null_mut();
    let values = [1.0, 2.0, 3.0];
    let status = unsafe { dy_step_new(0, 2, values.as_ptr(), values.len(), &mut f) };
    assert_eq!(status, DyStatus::InvalidInput);
    assert!(f.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { dy_step_new(0, 0, ptr::null(), 1, &mut f) },
        DyStatus::NullPointer
    );
    assert_eq!(
        unsafe { dy_lp_norm(ptr::null(), 1.0, &mut 0.0) },
        DyStatus::NullPointer
    );
    let g = step(0, 1, &[1.0, 1.0]);
    assert_eq!(
        unsafe { dy_lp_norm(g, 1.0, ptr::null_mut()) },
        DyStatus::NullPointer
    );
    unsafe { dy_step_free(g) };
}

#[test]
fn json_round_trip() {
    let json = CString::new(r#"{"m":1,"level":1,"values":[1.0,-2.0,0.5,0.0]}"#).unwrap();
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(dy_step_from_json(json.as_ptr(), &mut f), DyStatus::Ok);
        let mut len = 0;
        assert_eq!(dy_step_len(f, &mut len), DyStatus::Ok);
        assert_eq!(len, 4);
        let mut buf = [0.0; 4];
        assert_eq!(dy_step_values(f, buf.as_mut_ptr(), buf.len()), DyStatus::Ok);
        assert_eq!(buf, [1.0, -2.0, 0.5, 0.0]);
        let mut s = ptr::null_mut();
        assert_eq!(dy_step_to_json(f, &mut s), DyStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
        assert_eq!(v["values"][1], -2.0);
        dy_step_free(f);

        let bad = CString::new("{not json").unwrap();
        assert_eq!(dy_step_from_json(bad.as_ptr(), &mut f), DyStatus::Json);
    }
}

#[test]
fn rearrangement_profile() {
    let f = step(0, 2, &[1.0, -3.0, 1.0, 0.0]);
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(dy_rearrange(f, &mut p), DyStatus::Ok);
        let mut n = 0;
        assert_eq!(dy_profile_steps(p, &mut n), DyStatus::Ok);
        assert_eq!(n, 2);
        let (mut a, mut b, mut v) = (0.0, 0.0, 0.0);
        assert_eq!(dy_profile_step(p, 1, &mut a, &mut b, &mut v), DyStatus::Ok);
        assert_eq!((a, b, v), (0.25, 0.75, 1.0));
        assert_eq!(
            dy_profile_step(p, 2, &mut a, &mut b, &mut v),
            DyStatus::InvalidInput
        );
        let mut x = 0.0;
        assert_eq!(dy_profile_eval(p, 0.0, &mut x), DyStatus::Ok);
        assert_eq!(x, 3.0);
        assert_eq!(dy_profile_eval(p, 0.75, &mut x), DyStatus::Ok);
        assert_eq!(x, 0.0);
        dy_profile_free(p);
        dy_step_free(f);
    }
}

#[test]
fn haar_and_martingale_operators() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(dy_haar(1, 1, 0, 2, &mut h), DyStatus::Ok);
        let mut buf = [0.0; 4];
        dy_step_values(h, buf.as_mut_ptr(), 4);
        let s = 2f64.sqrt();
        assert_eq!(buf, [0.0, 0.0, s, -s]);

        let mut d = ptr::null_mut();
        assert_eq!(dy_martingale_diff(h, 1, &mut d), DyStatus::Ok);
        dy_step_values(d, buf.as_mut_ptr(), 4);
        assert!(buf
            .iter()
            .zip([0.0, 0.0, s, -s])
            .all(|(a, b)| (a - b).abs() < 1e-15));
        dy_step_free(d);
        assert_eq!(dy_martingale_diff(h, 5, &mut d), DyStatus::InvalidInput);

        let coeffs = CString::new(r#"{"entries":[{"k":1,"j":0,"a":1.0}]}"#).unwrap();
        let mut sf = ptr::null_mut();
        assert_eq!(dy_maximal_s(h, coeffs.as_ptr(), &mut sf), DyStatus::Ok);
        dy_step_values(sf, buf.as_mut_ptr(), 4);
        assert!(buf
            .iter()
            .zip([0.0, 0.0, s, s])
            .all(|(a, b)| (a - b).abs() < 1e-15));
        dy_step_free(sf);
        dy_step_free(h);
    }
}

#[test]
fn cz_handles() {
    let f = step(0, 2, &[4.0, 0.0, 0.0, 0.0]);
    let mut dec = ptr::null_mut();
    unsafe {
        assert_eq!(dy_cz_decompose(f, 0.5, &mut dec), DyStatus::InvalidInput);
        assert!(last_error().contains("increase the domain exponent m"));
        assert_eq!(dy_cz_decompose(f, 1.0, &mut dec), DyStatus::Ok);
        let mut n = 0;
        assert_eq!(dy_cz_cube_count(dec, &mut n), DyStatus::Ok);
        assert_eq!(n, 1);
        let (mut k, mut j) = (0, 0);
        assert_eq!(dy_cz_cube(dec, 0, &mut k, &mut j), DyStatus::Ok);
        assert_eq!((k, j), (1, 0));
        let mut g = ptr::null_mut();
        assert_eq!(dy_cz_good(dec, &mut g), DyStatus::Ok);
        let mut buf = [0.0; 4];
        dy_step_values(g, buf.as_mut_ptr(), 4);
        assert_eq!(buf, [2.0, 2.0, 0.0, 0.0]);
        let mut passed = 0;
        let mut json = ptr::null_mut();
        assert_eq!(dy_cz_verify(f, dec, &mut passed, &mut json), DyStatus::Ok);
        assert_eq!(passed, 1);
        let reports: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(reports[0]["check"], "cz_decomposition");
        dy_step_free(g);
        dy_cz_free(dec);
        dy_step_free(f);
    }
}

#[test]
fn suites_through_the_abi() {
    let mut passed = 0;
    let mut json = ptr::null_mut();
    let name = CString::new("zerolocal").unwrap();
    unsafe {
        assert_eq!(
            dy_run_suite(name.as_ptr(), 3, 10, 5, 1, -1, &mut passed, &mut json),
            DyStatus::Ok
        );
    }
    assert_eq!(passed, 1);
    let first = take_string(json);

    let mut again = ptr::null_mut();
    unsafe {
        assert_eq!(
            dy_run_suite(name.as_ptr(), 3, 10, 5, 1, -1, &mut passed, &mut again),
            DyStatus::Ok
        );
    }
    assert_eq!(first, take_string(again));

    let bogus = CString::new("bogus").unwrap();
    let status = unsafe { dy_run_suite(bogus.as_ptr(), 0, 1, 4, 0, -1, &mut passed, &mut json) };
    assert_eq!(status, DyStatus::InvalidInput);
    assert!(last_error().contains("weak11"));
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        dy_step_free(ptr::null_mut());
        dy_profile_free(ptr::null_mut());
        dy_cz_free(ptr::null_mut());
        dy_string_free(ptr::null_mut());
    }
}
