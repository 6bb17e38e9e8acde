use mimo_capacity::cauchy_binet::{CauchyBinetInstance, Poly};
use proptest::prelude::*;

fn polys(count: usize, coeffs: &[f64]) -> Vec<Poly> {
    (0..count).map(|i| coeffs[4 * i..4 * i + 4].to_vec()).collect()
}

#[test]
fn square_case_with_vandermonde_functions() {
    // f_j = g_j = x^{j-1}, h = 1 on [0, 1]: det of the Hilbert matrix
    let mono = |k: usize| -> Poly {
        let mut p = vec![0.0; k + 1];
        p[k] = 1.0;
        p
    };
    let inst = CauchyBinetInstance { f: (0..3).map(mono).collect(), g: (0..3).map(mono).collect(), c: vec![], h: vec![1.0], domain: (0.0, 1.0) };
    let r = inst.check(6).unwrap();
    let hilbert3 = 1.0 / 2160.0;
    assert!((r.rhs - 6.0 * hilbert3).abs() < 1e-15);
    assert!(r.rel_error < 1e-12);
}

#[test]
fn malformed_instances_are_rejected() {
    let p = vec![1.0, 2.0];
    let base = CauchyBinetInstance { f: vec![p.clone(); 2], g: vec![p.clone(); 3], c: vec![vec![1.0, 0.0, 0.0]], h: vec![1.0], domain: (0.0, 1.0) };
    assert!(base.check(4).is_ok());
    assert!(CauchyBinetInstance { c: vec![], ..base.clone() }.check(4).is_err());
    assert!(CauchyBinetInstance { f: vec![p.clone(); 4], ..base.clone() }.check(4).is_err());
    assert!(CauchyBinetInstance { domain: (1.0, 1.0), ..base }.check(4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_holds_for_random_polynomials(
        m in 1usize..4, extra in 0usize..2,
        fc in prop::collection::vec(-1.0f64..1.0, 16),
        gc in prop::collection::vec(-1.0f64..1.0, 16),
        cc in prop::collection::vec(-1.0f64..1.0, 4),
        hc in prop::collection::vec(0.1f64..1.0, 3),
        lo in -1.0f64..0.5, width in 0.5f64..2.0,
    ) {
        let n = (m + extra).min(4);
        let inst = CauchyBinetInstance {
            f: polys(m, &fc),
            g: polys(n, &gc),
            c: (0..n - m).map(|i| (0..n).map(|j| cc[(i + j) % 4]).collect()).collect(),
            h: hc,
            domain: (lo, lo + width),
        };
        // integrand degree per axis is at most 3 + 3 + 2, so 6 nodes are exact
        let r = inst.check(6).unwrap();
        prop_assume!(r.rhs.abs() > 1e-8);
        prop_assert!(r.rel_error < 1e-6, "{:?}", r);
    }
}
