use std::f64::consts::PI;

use coneres::statphase::{
    expansion_terms, odd_family, order_check, quadratic_expansion, quadrature_oracle, BumpCutoff, Polynomial, QuadraticPhase,
    StatPhaseProblem,
};
use coneres::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn problem(coeffs: &[f64], q: f64, w: Complex64, h: f64) -> StatPhaseProblem {
    StatPhaseProblem::new(
        Polynomial::univariate(coeffs),
        BumpCutoff::centered(1, 4.0),
        QuadraticPhase::scalar(q).unwrap(),
        w,
        h,
    )
    .unwrap()
}

#[test]
fn constant_amplitude_matches_oracle() {
    let p = problem(&[1.0], 1.0, c(1.0, 0.0), 0.05);
    let d = (quadrature_oracle(&p).unwrap() - quadratic_expansion(&p, 3).unwrap()).norm();
    assert!(d < 1e-4, "{d}");
}

#[test]
fn complex_parameter_matches_oracle() {
    let h: f64 = 0.05;
    let w = c(1.0, -0.1 * h * (1.0 / h).ln());
    let p = problem(&[1.0], 1.0, w, h);
    let expected = (2.0 * PI * h / w).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
    assert!((quadratic_expansion(&p, 3).unwrap() - expected).norm() < 1e-15);
    let d = (quadrature_oracle(&p).unwrap() - expected).norm();
    assert!(d < 1e-4, "{d}");
}

#[test]
fn second_moment_correction_sign() {
    // ∫ e^{ix²/2h} x² χ dx against the leading prefactor times ih
    let h = 0.02;
    let p = problem(&[0.0, 0.0, 1.0], 1.0, c(1.0, 0.0), h);
    let pref = (2.0 * PI * h).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
    let ratio = quadrature_oracle(&p).unwrap() / pref;
    assert!((ratio - c(0.0, h)).norm() < 1e-6, "{ratio}");
}

#[test]
fn odd_amplitude_is_below_floor() {
    let hs: Vec<f64> = (0..5).map(|j| 0.05 * 0.5f64.powf(j as f64 / 2.0)).collect();
    let chk = order_check(odd_family, &hs, 2).unwrap();
    assert!(chk.below_floor(), "{:?}", chk.errors);
}

#[test]
fn random_problems_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let mag: f64 = rng.random_range(0.5..2.0);
        let q = if rng.random_bool(0.5) { mag } else { -mag };
        let degree = rng.random_range(0..=4usize);
        let mut coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        coeffs[0] = rng.random_range(0.5..1.5);
        let p = problem(&coeffs, q, c(1.0, 0.0), 0.02);
        let oracle = quadrature_oracle(&p).unwrap();
        let expansion = quadratic_expansion(&p, 4).unwrap();
        assert!((oracle - expansion).norm() < 1e-3 * oracle.norm(), "Q = {q}, a = {coeffs:?}");
    }
}

#[test]
fn planar_mixed_form_matches_oracle() {
    let p = StatPhaseProblem::new(
        Polynomial::from_terms(2, [(vec![0, 0], c(1.0, 0.0)), (vec![1, 1], c(0.5, 0.0))]).unwrap(),
        BumpCutoff::centered(2, 4.0),
        QuadraticPhase::new(vec![vec![2.0, 0.5], vec![0.5, -1.0]]).unwrap(),
        c(1.0, 0.0),
        0.1,
    )
    .unwrap();
    let d = (quadrature_oracle(&p).unwrap() - quadratic_expansion(&p, 3).unwrap()).norm();
    assert!(d < 1e-4, "{d}");
}

proptest! {
    #[test]
    fn terms_scale_homogeneously(a0 in -1.0f64..1.0, a2 in -1.0f64..1.0, a4 in -1.0f64..1.0,
                                 q in 0.5f64..2.0, wr in 0.8f64..1.2, wi in -0.1f64..0.0) {
        let w = c(wr, wi);
        let p = problem(&[a0, 0.0, a2, 0.0, a4], q, w, 0.05);
        let p2 = p.with_w(w * 2.0).unwrap();
        let t1 = expansion_terms(&p, 3).unwrap();
        let t2 = expansion_terms(&p2, 3).unwrap();
        for k in 0..3 {
            let factor = 2f64.powf(-0.5 - k as f64);
            prop_assert!((t2[k] - t1[k] * factor).norm() <= 1e-13 * t1[k].norm().max(1e-300));
        }
    }

    #[test]
    fn negated_form_conjugates(a0 in -1.0f64..1.0, a2 in -1.0f64..1.0, a4 in -1.0f64..1.0,
                               q00 in 0.5f64..2.0, q01 in -0.3f64..0.3, q11 in -2.0f64..-0.5, w in 0.5f64..2.0) {
        let amp = Polynomial::from_terms(2, [
            (vec![0, 0], c(a0, 0.0)), (vec![2, 0], c(a2, 0.0)), (vec![1, 1], c(a4, 0.0)), (vec![0, 4], c(a2 * a4, 0.0)),
        ]).unwrap();
        let q = QuadraticPhase::new(vec![vec![q00, q01], vec![q01, q11]]).unwrap();
        let p = StatPhaseProblem::new(amp.clone(), BumpCutoff::centered(2, 4.0), q.clone(), c(w, 0.0), 0.05).unwrap();
        let m = StatPhaseProblem::new(amp.conj(), BumpCutoff::centered(2, 4.0), q.negated(), c(w, 0.0), 0.05).unwrap();
        let a = quadratic_expansion(&p, 4).unwrap();
        let b = quadratic_expansion(&m, 4).unwrap();
        prop_assert!((b - a.conj()).norm() <= 1e-13 * a.norm().max(1e-300));
    }
}
