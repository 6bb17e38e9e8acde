use mimo_capacity::special::integrals::{closed_form, g_finite_sum, j_n1_at_xi_one, quadrature};
use mimo_capacity::special::{
    exp_integral_e1, integral_g, integral_j, polygamma, upper_incomplete_gamma, IntegralParams,
    Method, EULER_GAMMA,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Reference values below were produced with 40-digit arbitrary-precision
// quadrature / incomplete-gamma routines and frozen here.

#[test]
fn polygamma_finite_sums() {
    assert!((polygamma(0, 1).unwrap() + 0.577_215_664_9).abs() < 1e-10);
    assert!((polygamma(1, 1).unwrap() - 1.644_934).abs() < 1e-6);
    assert!((polygamma(2, 3).unwrap() + 0.154_113_806_319_188_57).abs() < 1e-14);
    assert!((polygamma(3, 1).unwrap() - core::f64::consts::PI.powi(4) / 15.0).abs() < 1e-13);
}

#[test]
fn exponential_integral() {
    assert!(rel(exp_integral_e1(1.0).unwrap(), 0.219_383_934_395_520_27) < 1e-14);
    let small = exp_integral_e1(1e-8).unwrap();
    assert!((small - (-EULER_GAMMA + 8.0 * 10f64.ln())).abs() < 1e-7);
    assert!(rel(small, 17.843_465_089_050_833) < 1e-14);
    let asym = 100.0 * 100f64.exp() * exp_integral_e1(100.0).unwrap();
    assert!((asym - 1.0).abs() < 1e-2);
    assert!(rel(asym, 0.990_194_228_673_301_8) < 1e-13);
    assert!(exp_integral_e1(0.0).is_err());
}

#[test]
fn incomplete_gamma_values() {
    assert!(rel(upper_incomplete_gamma(1.0, 2.0).unwrap(), (-2.0f64).exp()) < 1e-15);
    assert!(rel(upper_incomplete_gamma(0.0, 1.0).unwrap(), 0.219_383_934_395_520_27) < 1e-14);
    assert!(rel(upper_incomplete_gamma(-1.0, 1.0).unwrap(), 0.148_495_506_775_922_05) < 1e-14);
    assert!(rel(upper_incomplete_gamma(-3.0, 0.2).unwrap(), 31.180_903_777_291_99) < 1e-13);
    assert!(rel(upper_incomplete_gamma(-4.0, 7.5).unwrap(), 1.440_432_673_236_393_2e-8) < 1e-13);
    assert!(rel(upper_incomplete_gamma(2.5, 0.7).unwrap(), 1.228_726_964_865_296_5) < 1e-14);
    assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
}

#[test]
fn g_and_j_reference_values() {
    let j111 = integral_j(IntegralParams::j(1.0, 1.0, 1, c(1.0), 1)).unwrap();
    assert!(rel(j111.value.re, 0.596_347_362_323_194_07) < 1e-14);
    assert!(rel(j_n1_at_xi_one(1.0, 1.0, 1).unwrap(), 0.596_347_362_323_194_07) < 1e-14);

    let gz = integral_g(IntegralParams::g(0.7, 1.3, 2, Complex64::new(2.5, 1.0))).unwrap();
    assert_eq!(gz.method, Method::Quadrature);
    let want = Complex64::new(2.633_548_722_523_364_8, 7.347_723_643_857_145);
    assert!((gz.value - want).norm() < 1e-12 * want.norm());

    let g25 = integral_g(IntegralParams::g(0.7, 1.3, 2, c(2.5))).unwrap();
    assert_eq!(g25.method, Method::ClosedForm);
    assert!(rel(g25.value.re, 8.590_392_944_632_670) < 1e-13);
    let q25 = quadrature(IntegralParams::g(0.7, 1.3, 2, c(2.5))).unwrap();
    assert!(rel(q25.value.re, g25.value.re) < 1e-9);

    let cases = [
        (0.25, 4.0, 3, 1.5, 2, 525.470_091_102_933_4),
        (9.0, 8.0, 2, 0.5, 4, 2954.890_594_461_629),
        (0.1, 0.1, 6, 5.5, 3, 5.227_912_286_579_336e-8),
    ];
    for (a, b, n, xi, l, want) in cases {
        let cf = closed_form(IntegralParams::j(a, b, n, c(xi), l)).unwrap();
        let q = quadrature(IntegralParams::j(a, b, n, c(xi), l)).unwrap();
        assert!(rel(cf.value.re, want) < 1e-12, "closed form a={a} b={b} n={n}");
        assert!(rel(q.value.re, want) < 1e-11, "quadrature a={a} b={b} n={n}");
    }

    let g1 = integral_g(IntegralParams::g(3.0, 2.0, 1, Complex64::new(1.0, -2.0))).unwrap();
    let want = Complex64::new(-0.367_966_795_300_097_26, 0.053_876_878_167_429_47);
    assert!((g1.value - want).norm() < 1e-13);
}

#[test]
fn j_is_xi_derivative_of_g() {
    let (a, b, n, xi) = (0.5, 2.0, 2, 3.0);
    let h = 1e-5;
    let gp = integral_g(IntegralParams::g(a, b, n, c(xi + h))).unwrap().value.re;
    let gm = integral_g(IntegralParams::g(a, b, n, c(xi - h))).unwrap().value.re;
    let j = integral_j(IntegralParams::j(a, b, n, c(xi), 1)).unwrap().value.re;
    assert!(rel((gp - gm) / (2.0 * h), j) < 1e-6);

    // second derivative from a central second difference, h = 1e-4
    let h = 1e-4;
    let xi = 2.3;
    let g0 = integral_g(IntegralParams::g(a, b, n, c(xi))).unwrap().value.re;
    let gp = integral_g(IntegralParams::g(a, b, n, c(xi + h))).unwrap().value.re;
    let gm = integral_g(IntegralParams::g(a, b, n, c(xi - h))).unwrap().value.re;
    let j2 = integral_j(IntegralParams::j(a, b, n, c(xi), 2)).unwrap().value.re;
    assert!(rel((gp - 2.0 * g0 + gm) / (h * h), j2) < 1e-5);
}

#[test]
fn validation_errors() {
    assert!(integral_g(IntegralParams::g(0.0, 1.0, 1, c(1.0))).is_err());
    assert!(integral_g(IntegralParams::g(1.0, -1.0, 1, c(1.0))).is_err());
    assert!(integral_g(IntegralParams::g(1.0, 1.0, 0, c(1.0))).is_err());
    assert!(integral_j(IntegralParams::j(1.0, 1.0, 1, c(1.0), 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_and_quadrature_agree(
        a in 0.1f64..10.0, b in 0.1f64..10.0, xi in 0.5f64..6.0, n in 1u32..=6, ell in 0u32..=4,
    ) {
        let p = IntegralParams::j(a, b, n, c(xi), ell);
        let r = closed_form(p).unwrap();
        prop_assert_eq!(r.method, Method::ClosedForm);
        let cf = r.value.re;
        let q = quadrature(p).unwrap().value.re;
        prop_assert!((cf - q).abs() <= (1e-9 * q.abs()).max(1e-12), "cf={cf} q={q}");
    }

    #[test]
    fn j_nonnegative_for_real_xi(
        a in 0.1f64..10.0, b in 0.1f64..10.0, xi in 0.1f64..6.0, n in 1u32..=6, ell in 1u32..=4,
    ) {
        let v = integral_j(IntegralParams::j(a, b, n, c(xi), ell)).unwrap().value.re;
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn finite_sum_positive_integer_dispatch(a in 0.1f64..10.0, b in 0.1f64..10.0, n in 1u32..=6, m in 1u32..=6) {
        let r = integral_g(IntegralParams::g(a, b, n, c(m as f64))).unwrap();
        prop_assert_eq!(r.method, Method::ClosedForm);
        prop_assert_eq!(r.value.re, g_finite_sum(a, b, n, m));
    }
}
