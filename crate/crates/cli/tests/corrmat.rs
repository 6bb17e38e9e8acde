use mimo_capacity::linalg::CMat;
use mimo_capacity::model::make_exponential_correlation;
use mimocap::corrmat::*;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn complex_literals() {
    let c = |re, im| Some(Complex64::new(re, im));
    assert_eq!(parse_complex("0.5"), c(0.5, 0.0));
    assert_eq!(parse_complex("-2i"), c(0.0, -2.0));
    assert_eq!(parse_complex("i"), c(0.0, 1.0));
    assert_eq!(parse_complex("1-0.25i"), c(1.0, -0.25));
    assert_eq!(parse_complex("1e-3+2E+1j"), c(1e-3, 20.0));
    assert_eq!(parse_complex("-1.5e2-i"), c(-150.0, -1.0));
    assert_eq!(parse_complex("abc"), None);
    assert_eq!(parse_complex("1+2"), None);
}

#[test]
fn reads_comments_and_blank_lines() {
    let text = "# header comment\nCORRMAT v1 2 1\n1 0.5-0.1i\n0.5+0.1i 1   # row two\n\n1\n";
    let (t, r) = parse_corrmat(text).unwrap();
    assert_eq!(t[(0, 1)], Complex64::new(0.5, -0.1));
    assert_eq!(r[(0, 0)], Complex64::new(1.0, 0.0));
}

#[test]
fn errors_carry_line_numbers() {
    let line = |text: &str| parse_corrmat(text).unwrap_err().line;
    assert_eq!(line("CORRMAT v2 1 1\n1\n1\n"), 1);
    assert_eq!(line("\nCORRMAT v1 0 1\n1\n1\n"), 2);
    assert_eq!(line("CORRMAT v1 2 1\n1 0\n0\n1\n"), 3);
    assert_eq!(line("CORRMAT v1 1 1\n1\nfoo\n"), 3);
    assert_eq!(line("CORRMAT v1 1 1\n1\n1\n1\n"), 4);
    assert_eq!(line("CORRMAT v1 2 2\n1 0\n0 1\n1 0\n"), 0);
    assert_eq!(line(""), 0);
    let e = parse_corrmat("CORRMAT v1 1 1\n1\nfoo\n").unwrap_err();
    assert!(e.to_string().starts_with("line 3:"));
}

fn hermitian(n: usize, v: &[f64]) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        let z = Complex64::new(v[2 * (a * n + b)], if a == b { 0.0 } else { v[2 * (a * n + b) + 1] });
        if i <= j { z } else { z.conj() }
    })
}

proptest! {
    #[test]
    fn round_trip_is_exact(nt in 1usize..6, nr in 1usize..6, v in prop::collection::vec(-1e3f64..1e3, 72), w in prop::collection::vec(-1.0f64..1.0, 72)) {
        let (t, r) = (hermitian(nt, &v), hermitian(nr, &w));
        let (t2, r2) = parse_corrmat(&write_corrmat(&t, &r)).unwrap();
        prop_assert_eq!(t.max_abs_diff(&t2), 0.0);
        prop_assert_eq!(r.max_abs_diff(&r2), 0.0);
    }

    #[test]
    fn exponential_matrices_round_trip(n in 1usize..8, rho in 0.0f64..0.99) {
        let m = make_exponential_correlation(n, rho).unwrap();
        let (a, b) = parse_corrmat(&write_corrmat(&m, &m)).unwrap();
        prop_assert_eq!(a.max_abs_diff(&m), 0.0);
        prop_assert_eq!(b.max_abs_diff(&m), 0.0);
    }
}
