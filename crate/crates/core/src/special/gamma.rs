//! Gamma-family functions: factorials, zeta values, polygamma at integers,
//! complex log-gamma, exponential integral and the upper incomplete gamma.

use num_complex::Complex64;

use super::quad;
use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const ZETA3: f64 = 1.202_056_903_159_594_3;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// B_2, B_4, ..., B_20.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// n! (exact table up to 20, log-gamma above).
pub fn factorial(n: u32) -> f64 {
    if (n as usize) < FACTORIALS.len() {
        FACTORIALS[n as usize]
    } else {
        libm::exp(ln_gamma(n as f64 + 1.0))
    }
}

pub fn ln_factorial(n: u32) -> f64 {
    if (n as usize) < FACTORIALS.len() {
        libm::log(FACTORIALS[n as usize])
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Binomial coefficient C(n, k) for integers.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        libm::round(c)
    } else {
        libm::exp(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
    }
}

/// Hurwitz zeta ζ(s, q) for integer s ≥ 2 and q > 0 (Euler-Maclaurin).
pub fn hurwitz_zeta(s: u32, q: f64) -> f64 {
    debug_assert!(s >= 2 && q > 0.0);
    let sf = s as f64;
    let n = 12usize.max(s as usize);
    let mut sum = 0.0;
    for k in 0..n {
        sum += libm::pow(q + k as f64, -sf);
    }
    let a = q + n as f64;
    let mut tail = libm::pow(a, 1.0 - sf) / (sf - 1.0) + 0.5 * libm::pow(a, -sf);
    // rising factorial s (s+1) ... (s + 2j - 2) and (2j)!
    let mut rising = sf;
    let mut fact2j = 2.0;
    let mut apow = libm::pow(a, -sf - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b / fact2j * rising * apow;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (sf + j2 - 1.0) * (sf + j2);
        fact2j *= (j2 + 1.0) * (j2 + 2.0);
        apow /= a * a;
    }
    sum + tail
}

/// Riemann zeta at integer s ≥ 2.
pub fn zeta(s: u32) -> f64 {
    match s {
        2 => core::f64::consts::PI * core::f64::consts::PI / 6.0,
        3 => ZETA3,
        4 => libm::pow(core::f64::consts::PI, 4.0) / 90.0,
        _ => hurwitz_zeta(s, 1.0),
    }
}

/// Polygamma ψ^(order)(z) at a positive integer z.
///
/// Orders 0 to 3 use the finite-sum forms built on γ, π²/6, ζ(3) and π⁴/15;
/// higher orders and large z use ψ^(m)(z) = (-1)^(m+1) m! ζ(m+1, z).
pub fn polygamma(order: u32, z: u32) -> Result<f64> {
    if z == 0 {
        return Err(Error::Domain("polygamma argument must be a positive integer"));
    }
    let pi = core::f64::consts::PI;
    if z <= 64 && order <= 3 {
        let mut s = 0.0;
        for n in 1..z {
            s += libm::pow(n as f64, -(order as f64 + 1.0));
        }
        return Ok(match order {
            0 => -EULER_GAMMA + s,
            1 => pi * pi / 6.0 - s,
            2 => -2.0 * ZETA3 + 2.0 * s,
            _ => libm::pow(pi, 4.0) / 15.0 - 6.0 * s,
        });
    }
    if order == 0 {
        // ψ(z) = ln z - 1/(2z) - Σ B_2k / (2k z^2k)
        let x = z as f64;
        let mut s = libm::log(x) - 0.5 / x;
        let mut zp = x * x;
        for (k, b) in BERNOULLI.iter().enumerate().take(6) {
            s -= b / (2.0 * (k as f64 + 1.0) * zp);
            zp *= x * x;
        }
        return Ok(s);
    }
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * factorial(order) * hurwitz_zeta(order + 1, z as f64))
}

/// A branch of ln Γ(z) for Re z > 0 (shift then Stirling series).
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for (k, b) in BERNOULLI.iter().enumerate().take(8) {
        let k2 = 2.0 * (k as f64 + 1.0);
        series += p * (b / (k2 * (k2 - 1.0)));
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series - shift
}

/// e^x E₁(x) for x > 0.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain("E1 requires x > 0"));
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let t = term / k as f64;
            sum += t;
            if t.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        let e1 = -EULER_GAMMA - libm::log(x) - sum;
        return Ok(e1 * libm::exp(x));
    }
    // Lentz continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("E1 continued fraction"))
}

/// Exponential integral E₁(x) = ∫ₓ^∞ e^{-t}/t dt.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    Ok(exp_integral_e1_scaled(x)? * libm::exp(-x))
}

/// Legendre continued fraction for e^x x^{-α} Γ(α, x).
fn upper_gamma_cf_scaled(alpha: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - alpha;
    let mut c = 1.0 / tiny;
    let mut d = if b.abs() < tiny { 1.0 / tiny } else { 1.0 / b };
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - alpha);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence("incomplete gamma continued fraction"))
}

/// e^x Γ(α, x) for real α and x > 0.
pub fn upper_incomplete_gamma_scaled(alpha: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain("incomplete gamma requires x > 0"));
    }
    let k = libm::round(alpha);
    let is_nonpositive_int = (alpha - k).abs() < 1e-12 && k <= 0.0;
    if is_nonpositive_int {
        let k = (-k) as u32;
        if k == 0 {
            return exp_integral_e1_scaled(x);
        }
        if x >= 1.0 {
            return Ok(upper_gamma_cf_scaled(-(k as f64), x)? * libm::pow(x, -(k as f64)));
        }
        if k <= 30 {
            // Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a, downward from a = 0; scaled by e^x.
            let mut g = exp_integral_e1_scaled(x)?;
            for j in 1..=k {
                let a = -(j as f64);
                g = (g - libm::pow(x, a)) / a;
            }
            return Ok(g);
        }
        return upper_gamma_quadrature_scaled(alpha, x);
    }
    if x >= alpha + 1.0 {
        return Ok(upper_gamma_cf_scaled(alpha, x)? * libm::pow(x, alpha));
    }
    if alpha > 0.0 {
        // Γ(α) - γ(α, x) with the lower series, x < α + 1.
        let mut ap = alpha;
        let mut del = 1.0 / alpha;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let lower_scaled = sum * libm::pow(x, alpha); // e^x γ(α, x)
        return Ok(libm::exp(ln_gamma(alpha) + x) - lower_scaled);
    }
    // Negative non-integer α with x < 1: recurse down from α + m ∈ (0, 1).
    let m = libm::ceil(-alpha) as u32;
    let mut g = upper_incomplete_gamma_scaled(alpha + m as f64, x)?;
    for j in (0..m).rev() {
        let a = alpha + j as f64;
        g = (g - libm::pow(x, a)) / a;
    }
    Ok(g)
}

fn upper_gamma_quadrature_scaled(alpha: f64, x: f64) -> Result<f64> {
    // t = x e^u: e^x Γ(α, x) = x^α ∫_0^∞ exp(α u - x (e^u - 1)) du
    let umax = libm::log1p(quad::tail_cutoff(alpha.abs()) / x);
    let (v, _, ok) = quad::integrate_real(
        |u| libm::exp(alpha * u - x * libm::expm1(u)),
        0.0,
        umax.max(1.0),
        16,
        0.0,
        1e-14,
    );
    if !ok {
        return Err(Error::NoConvergence("incomplete gamma quadrature"));
    }
    Ok(v * libm::pow(x, alpha))
}

/// Upper incomplete gamma Γ(α, x) = ∫ₓ^∞ t^{α-1} e^{-t} dt, x > 0.
pub fn upper_incomplete_gamma(alpha: f64, x: f64) -> Result<f64> {
    Ok(upper_incomplete_gamma_scaled(alpha, x)? * libm::exp(-x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(5), 120.0);
        assert!((factorial(25) / 1.551_121_004_333_098_6e25 - 1.0).abs() < 1e-13);
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(5) - 1.036_927_755_143_37).abs() < 1e-14);
        assert!((hurwitz_zeta(2, 1.0) - core::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn polygamma_high_order_consistent() {
        // ψ^(4)(1) = -24 ζ(5)
        let v = polygamma(4, 1).unwrap();
        assert!((v + 24.0 * zeta(5)).abs() < 1e-12);
        // recurrence ψ^(m)(z+1) = ψ^(m)(z) + (-1)^m m! z^{-m-1}
        for m in 0..6u32 {
            for z in [1u32, 3, 70, 100] {
                let lhs = polygamma(m, z + 1).unwrap();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = polygamma(m, z).unwrap()
                    + sign * factorial(m) * (z as f64).powi(-(m as i32) - 1);
                assert!((lhs - rhs).abs() < 1e-13 * rhs.abs().max(1.0), "m={m} z={z}");
            }
        }
    }

    #[test]
    fn complex_log_gamma_matches_real() {
        for x in [0.5, 1.0, 2.5, 7.0, 30.0] {
            let z = ln_gamma_complex(Complex64::new(x, 0.0));
            assert!((z.re - ln_gamma(x)).abs() < 1e-13);
        }
        // Γ(1+i) = i Γ(i); |Γ(iy)|² = π / (y sinh πy)
        let y: f64 = 1.3;
        let g = ln_gamma_complex(Complex64::new(1.0, y)).exp();
        let mag2 = core::f64::consts::PI * y / libm::sinh(core::f64::consts::PI * y);
        assert!((g.norm_sqr() - mag2).abs() < 1e-13);
    }

    #[test]
    fn incomplete_gamma_recurrence_chain() {
        for &x in &[0.05, 0.3, 0.9, 1.0, 2.0, 7.5, 40.0] {
            for k in 0..12 {
                let a = -(k as f64) - 1.0;
                let lhs = upper_incomplete_gamma_scaled(a + 1.0, x).unwrap();
                let rhs = a * upper_incomplete_gamma_scaled(a, x).unwrap() + libm::pow(x, a);
                assert!((lhs - rhs).abs() < 1e-12 * lhs.abs(), "x={x} a={a}");
            }
        }
    }

    #[test]
    fn incomplete_gamma_positive_order() {
        // Γ(2.5, x) at both regimes vs quadrature
        for &x in &[0.2, 3.0, 12.0] {
            let q = upper_gamma_quadrature_scaled(2.5, x).unwrap();
            let v = upper_incomplete_gamma_scaled(2.5, x).unwrap();
            assert!((q - v).abs() < 1e-13 * q);
        }
        let q = upper_gamma_quadrature_scaled(-2.3, 0.4).unwrap();
        let v = upper_incomplete_gamma_scaled(-2.3, 0.4).unwrap();
        assert!((q - v).abs() < 1e-12 * q);
    }

    #[test]
    fn large_negative_order_uses_quadrature() {
        let x = 0.5;
        let v = upper_incomplete_gamma_scaled(-35.0, x).unwrap();
        let mut g = exp_integral_e1_scaled(x).unwrap();
        for j in 1..=35 {
            let a = -(j as f64);
            g = (g - libm::pow(x, a)) / a;
        }
        assert!((v - g).abs() < 1e-10 * g.abs());
    }
}
