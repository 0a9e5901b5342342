use std::ffi::CStr;
use std::ptr;

use zetalab_ffi::*;

fn c(re: f64, im: f64) -> ZlComplex {
    ZlComplex { re, im }
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        zl_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

/// sin((θ + σz)/2)/sin(θ/2) with q = cot(θ/2), written out from the sine closed form.
fn sine_closed_form(sigma: f64, q: f64, z: ZlComplex) -> (f64, f64) {
    let theta = 2.0 * (1.0 / q).atan();
    let (a, b) = (0.5 * (theta + sigma * z.re), 0.5 * sigma * z.im);
    let s = (0.5 * theta).sin();
    (a.sin() * b.cosh() / s, a.cos() * b.sinh() / s)
}

#[test]
fn sine_operator_matches_closed_form() {
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(zl_operator_new_sine(1.5, 0.7, &mut op), ZL_OK);
        for z in [c(0.0, 0.0), c(2.0, 0.0), c(-1.0, 0.5), c(3.0, -1.0)] {
            let want = sine_closed_form(1.5, 0.7, z);
            let (mut v, mut err) = (c(0.0, 0.0), 0.0);
            assert_eq!(zl_zeta_ode(op, z, &mut v, &mut err), ZL_OK);
            assert!((v.re - want.0).abs() < 1e-8 && (v.im - want.1).abs() < 1e-8, "{v:?} vs {want:?}");
            assert_eq!(zl_zeta_taylor(op, 60, 1e-14, z, &mut v, ptr::null_mut()), ZL_OK);
            assert!((v.re - want.0).abs() < 1e-10 && (v.im - want.1).abs() < 1e-10);
        }
        zl_operator_free(op);
    }
}

#[test]
fn bessel_index_one_is_j0() {
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(zl_operator_new_bessel(1.0, 1.0, &mut op), ZL_OK);
        let mut v = c(0.0, 0.0);
        assert_eq!(zl_zeta_taylor(op, 60, 1e-15, c(2.0, 0.0), &mut v, ptr::null_mut()), ZL_OK);
        // J0(1) from its power series.
        let j0: f64 = (0..30)
            .map(|k| (-0.25f64).powi(k) / (1..=k).map(f64::from).product::<f64>().powi(2))
            .sum();
        assert!((v.re - j0).abs() < 1e-12 && v.im.abs() < 1e-12);
        zl_operator_free(op);
    }
}

#[test]
fn invalid_arguments_report_codes_and_messages() {
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(zl_operator_new_bessel(1.0, -1.0, &mut op), ZL_ERR_DOMAIN);
        assert!(op.is_null());
        assert!(last_error().contains('α'));
        assert_eq!(zl_operator_new_sine(-1.0, 0.0, &mut op), ZL_ERR_DOMAIN);
        assert_eq!(zl_operator_new_sine(1.0, 0.0, ptr::null_mut()), ZL_ERR_NULL);
        assert_eq!(last_error(), "out is null");
        let mut v = c(0.0, 0.0);
        assert_eq!(zl_zeta_ode(ptr::null(), c(0.0, 0.0), &mut v, ptr::null_mut()), ZL_ERR_NULL);
        let mut d = ptr::null_mut();
        assert_eq!(zl_driver_new(1, 0, 2.0, 1.5, 1e-3, &mut d), ZL_ERR_DOMAIN);
        zl_operator_free(ptr::null_mut());
        zl_driver_free(ptr::null_mut());
        zl_circular_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates_and_reports_length() {
    unsafe {
        zl_operator_new_sine(1.0, 0.0, ptr::null_mut());
        let full = zl_last_error(ptr::null_mut(), 0);
        let mut buf = [1 as std::ffi::c_char; 4];
        assert_eq!(zl_last_error(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes(), b"out");
    }
}

#[test]
fn driver_samples_are_reproducible() {
    let zs = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
    let sample = || unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(zl_driver_new(5, 3, 2.0, 0.1, 1e-3, &mut d), ZL_OK);
        let mut zeta = [c(0.0, 0.0); 3];
        let mut e = [c(0.0, 0.0); 3];
        let mut q = 0.0;
        assert_eq!(zl_sample_zeta(d, zs.as_ptr(), 3, zeta.as_mut_ptr(), e.as_mut_ptr(), &mut q), ZL_OK);
        zl_driver_free(d);
        (zeta, e, q)
    };
    let (zeta, e, q) = sample();
    assert_eq!(sample(), (zeta, e, q));
    // ζ = 𝒜 − qℬ with ℰ = 𝒜 − iℬ; on the real axis 𝒜 and ℬ are real.
    let want = e[1].re - q * (-e[1].im);
    assert!((zeta[1].re - want).abs() < 1e-12 * (1.0 + want.abs()));
    assert!(zeta[1].im.abs() < 1e-12);
    // ℰ(0) = 1 at the origin.
    assert!((e[0].re - 1.0).abs() < 1e-12 && e[0].im.abs() < 1e-12);
}

#[test]
fn eigenvalue_buffer_protocol() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(zl_driver_new(1, 0, 4.0, 1e-3, 1e-3, &mut d), ZL_OK);
        let mut len = 0usize;
        assert_eq!(zl_sample_eigenvalues(d, 30.0, ptr::null_mut(), 0, &mut len), ZL_ERR_BUFFER);
        assert!(len > 0);
        let mut buf = vec![0.0; len];
        let mut len2 = 0usize;
        assert_eq!(zl_sample_eigenvalues(d, 30.0, buf.as_mut_ptr(), buf.len(), &mut len2), ZL_OK);
        assert_eq!(len, len2);
        assert!(buf.windows(2).all(|w| w[0] < w[1]));
        assert!(buf.iter().all(|x| x.abs() <= 30.0));
        zl_driver_free(d);
    }
}

#[test]
fn circular_polynomial_vanishes_at_eigenangles() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(zl_circular_new(8, 2.0, 11, &mut s), ZL_OK);
        let mut len = 0usize;
        let mut angles = [0.0; 8];
        assert_eq!(zl_circular_eigenangles(s, angles.as_mut_ptr(), 8, &mut len), ZL_OK);
        assert_eq!(len, 8);
        for a in angles {
            assert!(a > 0.0 && a < 2.0 * std::f64::consts::PI);
            // ℰ_n(z) vanishes where e^{iz/n} = e^{ia}, i.e. z = n a.
            let mut v = c(0.0, 0.0);
            assert_eq!(zl_circular_char_poly(s, c(8.0 * a, 0.0), &mut v), ZL_OK);
            assert!(v.re.hypot(v.im) < 1e-9, "ℰ at angle {a}: {v:?}");
        }
        let mut small = [0.0; 3];
        assert_eq!(zl_circular_eigenangles(s, small.as_mut_ptr(), 3, &mut len), ZL_ERR_BUFFER);
        assert_eq!(len, 8);
        zl_circular_free(s);
    }
}

#[test]
fn version_and_header_are_in_sync() {
    let v = unsafe { CStr::from_ptr(zl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/zetalab.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("#define ZL_ERR_BUFFER -4"));
}
