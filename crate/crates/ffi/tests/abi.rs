use std::ffi::{c_char, CStr};
use std::ptr;

use gamow_ffi::*;
use num_complex::Complex64;

fn ok(status: GamowStatus) {
    assert_eq!(status, GamowStatus::Ok, "{}", last_error());
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { gamow_last_error_message(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn z(c: GamowComplex) -> Complex64 {
    c.into()
}

struct Space(*mut GamowSubspace);

impl Space {
    fn new(order: usize, normalization: u32) -> Self {
        let mut p = ptr::null_mut();
        ok(unsafe { gamow_subspace_new(5.0, 0.5, order, normalization, &mut p) });
        Space(p)
    }
}

impl Drop for Space {
    fn drop(&mut self) {
        unsafe { gamow_subspace_free(self.0) }
    }
}

fn matrix(f: impl FnOnce(*mut GamowComplex, usize) -> GamowStatus, dim: usize) -> Vec<Complex64> {
    let mut out = vec![GamowComplex::default(); dim * dim];
    ok(f(out.as_mut_ptr(), out.len()));
    out.into_iter().map(z).collect()
}

#[test]
fn s_matrix_matches_closed_form_and_is_unitary() {
    let gamma = [0.3, 0.01];
    let mut model = ptr::null_mut();
    ok(unsafe { gamow_model_new(5.0, 0.5, 3, gamma.as_ptr(), gamma.len(), true, &mut model) });

    let zr = Complex64::new(5.0, -0.25);
    for omega in [Complex64::new(4.2, 0.0), Complex64::new(5.0, -1.0), Complex64::new(7.0, 0.4)] {
        let mut s = GamowComplex::default();
        ok(unsafe { gamow_s_matrix_eval(model, omega.into(), &mut s) });
        let phase = (Complex64::i() * 2.0 * (gamma[0] + gamma[1] * omega)).exp();
        let expected = ((omega - zr.conj()) / (omega - zr)).powu(3) * phase;
        assert!((z(s) - expected).norm() <= 1e-12 * expected.norm(), "{omega}");
        if omega.im == 0.0 {
            assert!((z(s).norm() - 1.0).abs() < 1e-12);
        }
    }

    let mut s = GamowComplex::default();
    assert_eq!(unsafe { gamow_s_matrix_eval(model, zr.into(), &mut s) }, GamowStatus::PoleEvaluation);
    assert!(last_error().contains("pole"));

    let mut coeffs = [GamowComplex::default(); 2];
    assert_eq!(
        unsafe { gamow_pole_expansion_coeffs(model, coeffs.as_mut_ptr(), coeffs.len()) },
        GamowStatus::BufferTooSmall
    );
    let mut coeffs = [GamowComplex::default(); 3];
    ok(unsafe { gamow_pole_expansion_coeffs(model, coeffs.as_mut_ptr(), coeffs.len()) });
    // C(3,l) (−iΓ)^l
    let ig = Complex64::new(0.0, -0.5);
    for (l, want) in [(1, 3.0 * ig), (2, 3.0 * ig * ig), (3, ig * ig * ig)] {
        assert!((z(coeffs[l - 1]) - want).norm() < 1e-15);
    }
    unsafe { gamow_model_free(model) };
}

#[test]
fn lineshape_peaks_at_resonance() {
    let mut model = ptr::null_mut();
    ok(unsafe { gamow_model_new(5.0, 0.5, 2, ptr::null(), 0, true, &mut model) });
    let grid = [4.5, 4.75, 5.0, 5.25, 5.5];
    let mut out = [0.0; 5];
    ok(unsafe { gamow_lineshape(model, 0, grid.as_ptr(), out.as_mut_ptr(), grid.len()) });
    assert_eq!(out[2], 1.0);
    // |E − z_R|² = (ΔE)² + Γ²/4
    assert!((out[1] - 0.0625 / (0.0625 + 0.0625)).abs() < 1e-15);
    assert!((out[0] - out[4]).abs() < 1e-15);
    unsafe { gamow_model_free(model) };
}

#[test]
fn pole_term_of_first_order_decays_exponentially() {
    let mut model = ptr::null_mut();
    ok(unsafe { gamow_model_new(5.0, 0.5, 1, ptr::null(), 0, true, &mut model) });
    let (a, m, c) = ([1.0], [1u32], [GamowComplex { re: 1.0, im: 0.3 }]);
    let mut psi = ptr::null_mut();
    let mut phi = ptr::null_mut();
    ok(unsafe { gamow_test_function_new(a.as_ptr(), m.as_ptr(), c.as_ptr(), 1, &mut psi) });
    ok(unsafe { gamow_test_function_new([2.0].as_ptr(), [2u32].as_ptr(), c.as_ptr(), 1, &mut phi) });

    let at = |t: f64| {
        let mut v = GamowComplex::default();
        ok(unsafe { gamow_pole_term(model, psi, phi, t, &mut v) });
        z(v)
    };
    let p0 = at(0.0).norm_sqr();
    for t in [0.5, 3.0, 10.0] {
        assert!((at(t).norm_sqr() / p0 - (-0.5 * t).exp()).abs() < 1e-12);
    }

    let mut b = [GamowComplex::default(); 1];
    ok(unsafe { gamow_expansion_coeffs(model, phi, b.as_mut_ptr(), 1) });
    // −2πΓ φ(z_R) with φ(w) = c/(w − 2i)²
    let zr = Complex64::new(5.0, -0.25);
    let phi_zr = Complex64::new(1.0, 0.3) / (zr - Complex64::new(0.0, 2.0)).powu(2);
    let want = -2.0 * std::f64::consts::PI * 0.5 * phi_zr;
    assert!((z(b[0]) - want).norm() < 1e-12 * want.norm());

    let bad = [-1.0];
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { gamow_test_function_new(bad.as_ptr(), m.as_ptr(), c.as_ptr(), 1, &mut f) },
        GamowStatus::InvalidParameter
    );
    assert!(f.is_null());
    unsafe {
        gamow_test_function_free(psi);
        gamow_test_function_free(phi);
        gamow_model_free(model);
    }
}

#[test]
fn evolution_is_the_exponential_of_the_hamiltonian() {
    for normalization in [GAMOW_NORMALIZATION_DERIVATIVE, GAMOW_NORMALIZATION_FACTORIAL] {
        let space = Space::new(4, normalization);
        let r = unsafe { gamow_subspace_dim(space.0) };
        assert_eq!(r, 4);
        let h = matrix(|o, n| unsafe { gamow_hamiltonian(space.0, o, n) }, r);
        let zr = Complex64::new(5.0, -0.25);
        for k in 0..r {
            assert_eq!(h[k * r + k], zr);
        }

        // exp(−iHt) = e^{−iz t} Σ_p (−itN)^p / p!, N = H − z nilpotent.
        let t = 1.7;
        let mut nil = h.clone();
        for k in 0..r {
            nil[k * r + k] -= zr;
        }
        let mul = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
            (0..r * r)
                .map(|idx| (0..r).map(|m| a[idx / r * r + m] * b[m * r + idx % r]).sum())
                .collect()
        };
        let mut term: Vec<Complex64> = (0..r * r).map(|i| if i % (r + 1) == 0 { 1.0.into() } else { 0.0.into() }).collect();
        let mut sum = term.clone();
        let step: Vec<Complex64> = nil.iter().map(|v| v * Complex64::new(0.0, -t)).collect();
        for p in 1..r {
            term = mul(&term, &step).into_iter().map(|v| v / p as f64).collect();
            sum.iter_mut().zip(&term).for_each(|(s, v)| *s += v);
        }
        let phase = (Complex64::new(0.0, -1.0) * zr * t).exp();

        let got = matrix(|o, n| unsafe { gamow_evolution(space.0, t, o, n) }, r);
        for (g, s) in got.iter().zip(&sum) {
            assert!((g - s * phase).norm() < 1e-12, "{g} vs {}", s * phase);
        }

        let mut out = vec![GamowComplex::default(); r * r];
        assert_eq!(unsafe { gamow_evolution(space.0, -1.0, out.as_mut_ptr(), out.len()) }, GamowStatus::NegativeTime);
    }
}

#[test]
fn binomial_operators_decay_and_dyads_do_not() {
    let space = Space::new(3, GAMOW_NORMALIZATION_DERIVATIVE);
    let times: Vec<f64> = (0..20).map(|i| i as f64).collect();

    let deviation = |state: *mut GamowState| {
        let mut d = f64::NAN;
        ok(unsafe { gamow_decay_deviation(state, times.as_ptr(), times.len(), &mut d) });
        unsafe { gamow_state_free(state) };
        d
    };
    for n in 0..3 {
        let mut w = ptr::null_mut();
        ok(unsafe { gamow_state_w_n(space.0, n, &mut w) });
        assert!(deviation(w) <= 1e-12);
    }
    let mut w = ptr::null_mut();
    ok(unsafe { gamow_state_w_total(space.0, &mut w) });
    let before = matrix(|o, n| unsafe { gamow_state_matrix(w, o, n) }, 3);
    let after = matrix(|o, n| unsafe { gamow_state_evolve(w, 2.0, o, n) }, 3);
    for (a, b) in after.iter().zip(&before) {
        assert!((a - b * (-1.0f64).exp()).norm() <= 1e-12 * b.norm().max(1.0));
    }
    assert!(deviation(w) <= 1e-12);

    let mut d = ptr::null_mut();
    ok(unsafe { gamow_state_dyad(space.0, 1, 1, &mut d) });
    assert!(deviation(d) > 1e-3);

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { gamow_state_w_n(space.0, 3, &mut bad) }, GamowStatus::IndexOutOfRange);
    assert!(bad.is_null());
}

#[test]
fn uniqueness_certificates() {
    let (mut passed, mut dim) = (false, 0usize);
    ok(unsafe { gamow_uniqueness_certify(3, &mut passed, &mut dim) });
    assert!(passed);
    assert_eq!(dim, 4);

    assert_eq!(unsafe { gamow_uniqueness_certify(13, &mut passed, &mut dim) }, GamowStatus::JTooLarge);
    assert!(last_error().contains("13"));

    let mut s: *mut c_char = ptr::null_mut();
    ok(unsafe { gamow_uniqueness_report_json(2, &mut s) });
    let json = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { gamow_string_free(s) };
    assert!(json.starts_with('{'));
    assert!(json.contains("\"nullspace_dimension\": 3"));
}

#[test]
fn null_pointers_and_error_state() {
    let mut s = GamowComplex::default();
    assert_eq!(
        unsafe { gamow_s_matrix_eval(ptr::null(), GamowComplex::default(), &mut s) },
        GamowStatus::NullPointer
    );
    let needed = unsafe { gamow_last_error_message(ptr::null_mut(), 0) };
    assert_eq!(needed, "model is null".len() + 1);

    // Truncation keeps the terminator.
    let mut small = [1 as c_char; 4];
    unsafe { gamow_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_str().unwrap(), "mod");

    assert_eq!(unsafe { gamow_subspace_new(5.0, 0.5, 2, 7, ptr::null_mut()) }, GamowStatus::InvalidParameter);
    assert_eq!(unsafe { gamow_subspace_new(5.0, 0.5, 2, 0, ptr::null_mut()) }, GamowStatus::NullPointer);
    assert_eq!(unsafe { gamow_subspace_dim(ptr::null()) }, 0);

    let space = Space::new(2, GAMOW_NORMALIZATION_DERIVATIVE);
    assert_eq!(unsafe { gamow_last_error_message(ptr::null_mut(), 0) }, 0);
    drop(space);

    unsafe {
        gamow_model_free(ptr::null_mut());
        gamow_state_free(ptr::null_mut());
        gamow_string_free(ptr::null_mut());
    }
}
