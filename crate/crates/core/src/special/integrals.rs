//! The integral family
//!
//! G_n(a,b,ξ)   = ∫₀^∞ (1+ax)^{ξ-1} x^{n-1} e^{-x/b} dx
//! J_{n,ℓ}(a,b,ξ) = ∫₀^∞ (1+ax)^{ξ-1} ln^ℓ(1+ax) x^{n-1} e^{-x/b} dx = ∂^ℓ_ξ G_n
//!
//! Closed forms: a finite sum when ξ is a positive integer, otherwise (real ξ)
//! the incomplete-gamma expansion
//! G_n = (ab / aⁿ) Σ_k (-1)^{n-1-k} C(n-1,k) W(ξ+k),  W(α) = e^X X^{1-α} Γ(α, X),
//! with X = 1/(ab). ξ-derivatives come from Taylor jets of W in α. The
//! alternating sum cancels badly when ab is small, so jets are carried in
//! double-double there.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::gamma::{binomial, factorial, upper_incomplete_gamma_scaled};
use super::quad;
use crate::dd::Dd;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegralParams {
    pub a: f64,
    pub b: f64,
    pub n: u32,
    pub xi: Complex64,
    pub ell: u32,
}

impl IntegralParams {
    pub fn g(a: f64, b: f64, n: u32, xi: Complex64) -> IntegralParams {
        IntegralParams { a, b, n, xi, ell: 0 }
    }

    pub fn j(a: f64, b: f64, n: u32, xi: Complex64, ell: u32) -> IntegralParams {
        IntegralParams { a, b, n, xi, ell }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Domain("integral parameter a must be positive"));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Domain("integral parameter b must be positive"));
        }
        if self.n == 0 {
            return Err(Error::Domain("integral order n must be at least 1"));
        }
        if !(self.xi.re.is_finite() && self.xi.im.is_finite()) {
            return Err(Error::Domain("xi must be finite"));
        }
        Ok(())
    }

    fn integer_xi(&self) -> Option<u32> {
        let r = libm::round(self.xi.re);
        if self.xi.im == 0.0 && r >= 1.0 && (self.xi.re - r).abs() < 1e-12 && r < 4.0e9 {
            Some(r as u32)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalResult {
    pub value: Complex64,
    pub method: Method,
    pub est_abs_error: f64,
}

/// G_n(a, b, ξ): finite sum for positive-integer ξ, incomplete-gamma form for
/// other real ξ, quadrature for complex ξ.
pub fn integral_g(p: IntegralParams) -> Result<EvalResult> {
    p.validate()?;
    let p = IntegralParams { ell: 0, ..p };
    if let Some(m) = p.integer_xi() {
        let v = g_finite_sum(p.a, p.b, p.n, m);
        return Ok(EvalResult {
            value: Complex64::new(v, 0.0),
            method: Method::ClosedForm,
            est_abs_error: 4.0 * f64::EPSILON * v.abs(),
        });
    }
    if p.xi.im == 0.0 {
        return closed_form(p);
    }
    quadrature(p)
}

/// J_{n,ℓ}(a, b, ξ), ℓ ≥ 1: incomplete-gamma expansion for real ξ, quadrature
/// for complex ξ.
pub fn integral_j(p: IntegralParams) -> Result<EvalResult> {
    p.validate()?;
    if p.ell == 0 {
        return Err(Error::Domain("J requires derivative order ell >= 1"));
    }
    if p.xi.im == 0.0 {
        return closed_form(p);
    }
    quadrature(p)
}

/// b^n Σ_k C(m-1,k) (ab)^k (n+k-1)!
pub fn g_finite_sum(a: f64, b: f64, n: u32, m: u32) -> f64 {
    let ab = a * b;
    let mut s = 0.0;
    let mut abk = 1.0;
    for k in 0..m {
        s += binomial(m - 1, k) * abk * factorial(n + k - 1);
        abk *= ab;
    }
    libm::pow(b, n as f64) * s
}

/// J_{n,1}(a, b, 1) = bⁿ (n-1)! e^X Σ_{k<n} (ab)^{-k} Γ(-k, X), X = 1/(ab).
pub fn j_n1_at_xi_one(a: f64, b: f64, n: u32) -> Result<f64> {
    IntegralParams::g(a, b, n, Complex64::new(1.0, 0.0)).validate()?;
    let ab = a * b;
    let x = 1.0 / ab;
    let mut s = 0.0;
    for k in 0..n {
        s += libm::pow(ab, -(k as f64)) * upper_incomplete_gamma_scaled(-(k as f64), x)?;
    }
    Ok(libm::pow(b, n as f64) * factorial(n - 1) * s)
}

/// Direct quadrature in u = ln(1 + a x), adaptive Gauss-Kronrod.
pub fn quadrature(p: IntegralParams) -> Result<EvalResult> {
    p.validate()?;
    let x_rate = 1.0 / (p.a * p.b);
    let nm1 = (p.n - 1) as f64;
    let ell = p.ell as f64;
    let q = nm1 + (p.xi.re - 1.0).max(0.0) + ell + 1.0;
    let umax = libm::log1p(quad::tail_cutoff(q) / x_rate);
    let xi = p.xi;
    let f = |u: f64| {
        if u <= 0.0 {
            return if p.n == 1 && p.ell == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let em1 = libm::expm1(u);
        let mut lnmag = xi.re * u - x_rate * em1;
        if p.n > 1 {
            lnmag += nm1 * libm::log(em1);
        }
        if p.ell > 0 {
            lnmag += ell * libm::log(u);
        }
        Complex64::from_polar(libm::exp(lnmag), xi.im * u)
    };
    // two starting panels per half-oscillation
    let pieces = (16.0f64).max(libm::ceil(xi.im.abs() * umax / core::f64::consts::FRAC_PI_2)).min(20000.0) as usize;
    let r = quad::integrate(f, 0.0, umax, pieces, 1e-300, 1e-13);
    if !r.converged {
        return Err(Error::NoConvergence("G/J quadrature"));
    }
    let scale = libm::pow(p.a, -(p.n as f64));
    let value = r.value * scale;
    Ok(EvalResult {
        value,
        method: Method::Quadrature,
        est_abs_error: (r.abs_error * scale).max(f64::EPSILON * value.norm()).max(f64::MIN_POSITIVE),
    })
}

/// Incomplete-gamma expansion for real ξ. Falls back to quadrature when the
/// alternating sum would cancel beyond double-double reach.
pub fn closed_form(p: IntegralParams) -> Result<EvalResult> {
    p.validate()?;
    if p.xi.im != 0.0 {
        return Err(Error::Domain("closed form requires real xi"));
    }
    let ell = p.ell as usize;
    let ab = p.a * p.b;
    let xr = Dd::ONE / (Dd::new(p.a) * Dd::new(p.b));
    let xi = p.xi.re;
    let mut jet = w_jets(xi, xr, ell)?;
    let abd = Dd::new(p.a) * Dd::new(p.b);
    let nm1 = p.n - 1;
    let mut sum = Dd::ZERO;
    let mut biggest = 0.0f64;
    for k in 0..p.n {
        let sign = if (nm1 - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        let term = jet[ell].mul_f64(sign * binomial(nm1, k));
        biggest = biggest.max(term.to_f64().abs());
        sum = sum + term;
        if k + 1 < p.n {
            // W(α+1) = 1 + ab α W(α), α carried as the jet (ξ + k) + ε
            let alpha = Dd::new(xi) + Dd::new(k as f64);
            let mut next = vec![Dd::ZERO; ell + 1];
            for i in 0..=ell {
                let mut v = alpha * jet[i];
                if i > 0 {
                    v = v + jet[i - 1];
                }
                next[i] = abd * v;
            }
            next[0] = next[0] + Dd::ONE;
            jet = next;
        }
    }
    let s = sum.to_f64();
    let loss = if s == 0.0 { f64::INFINITY } else { biggest / s.abs() };
    if !(loss < 1e15) {
        return quadrature(p);
    }
    let value = s * factorial(p.ell) * ab * libm::pow(p.a, -(p.n as f64));
    Ok(EvalResult {
        value: Complex64::new(value, 0.0),
        method: Method::ClosedForm,
        est_abs_error: 1e-15 * value.abs() * (1.0 + loss * 1e-14),
    })
}

/// Taylor jet of W(α + ε) = e^X X^{1-α-ε} Γ(α+ε, X) up to ε^order.
fn w_jets(alpha: f64, x: Dd, order: usize) -> Result<Vec<Dd>> {
    let xf = x.to_f64();
    if xf >= 1.0 {
        return w_jets_continued_fraction(alpha, x, order);
    }
    // X < 1: W^{(i)}(α) = X ∫_0^∞ e^{αu} u^i e^{-X(e^u - 1)} du
    let umax = libm::log1p(quad::tail_cutoff(alpha.abs() + order as f64 + 1.0) / xf);
    let mut out = Vec::with_capacity(order + 1);
    for i in 0..=order {
        let fi = i as f64;
        let (v, _, ok) = quad::integrate_real(
            |u| {
                if u <= 0.0 {
                    return if i == 0 { 1.0 } else { 0.0 };
                }
                let mut l = alpha * u - xf * libm::expm1(u);
                if i > 0 {
                    l += fi * libm::log(u);
                }
                libm::exp(l)
            },
            0.0,
            umax,
            16,
            1e-300,
            1e-14,
        );
        if !ok {
            return Err(Error::NoConvergence("W tail quadrature"));
        }
        out.push(Dd::new(v * xf / factorial(i as u32)));
    }
    Ok(out)
}

fn jet_div(u: &[Dd], v: &[Dd]) -> Vec<Dd> {
    let n = u.len();
    let mut q = vec![Dd::ZERO; n];
    let inv = v[0].recip();
    for i in 0..n {
        let mut acc = u[i];
        for k in 1..=i {
            acc = acc - v[k] * q[i - k];
        }
        q[i] = acc * inv;
    }
    q
}

/// Backward evaluation of X / (b₀ + a₁/(b₁ + a₂/(b₂ + ...))) with
/// bᵢ = X + 2i + 1 - α - ε and aᵢ = -i(i - α - ε), in jets.
fn w_jets_continued_fraction(alpha: f64, x: Dd, order: usize) -> Result<Vec<Dd>> {
    let eval = |depth: usize| -> Vec<Dd> {
        let b = |i: usize| {
            let mut j = vec![Dd::ZERO; order + 1];
            j[0] = x + Dd::new((2 * i + 1) as f64) - Dd::new(alpha);
            if order >= 1 {
                j[1] = Dd::new(-1.0);
            }
            j
        };
        let mut t = b(depth);
        for i in (0..depth).rev() {
            let fi = (i + 1) as f64;
            let mut a = vec![Dd::ZERO; order + 1];
            a[0] = Dd::new(-fi) * (Dd::new(fi) - Dd::new(alpha));
            if order >= 1 {
                a[1] = Dd::new(fi);
            }
            let frac = jet_div(&a, &t);
            let mut bi = b(i);
            for k in 0..=order {
                bi[k] = bi[k] + frac[k];
            }
            t = bi;
        }
        let mut num = vec![Dd::ZERO; order + 1];
        num[0] = x;
        jet_div(&num, &t)
    };
    let mut depth = 48usize;
    let mut prev = eval(depth);
    while depth < 1 << 17 {
        depth *= 2;
        let cur = eval(depth);
        let converged = cur
            .iter()
            .zip(&prev)
            .all(|(c, p)| (*c - *p).abs().to_f64() <= 1e-30 * c.abs().to_f64().max(1e-300));
        if converged {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence("W continued fraction"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn xi_one_kills_power_factor() {
        let r = integral_g(IntegralParams::g(2.0, 0.5, 3, c(1.0))).unwrap();
        assert!((r.value.re - 0.25).abs() < 1e-15);
        assert_eq!(r.method, Method::ClosedForm);
    }

    #[test]
    fn g1_at_two() {
        let r = integral_g(IntegralParams::g(1.0, 1.0, 1, c(2.0))).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn finite_sum_vs_incomplete_gamma_form_at_integers() {
        for &(a, b) in &[(0.1, 0.2), (1.0, 1.0), (5.0, 3.0), (0.3, 9.0)] {
            for n in 1..6 {
                for m in 1..6 {
                    let fs = g_finite_sum(a, b, n, m);
                    let cf = closed_form(IntegralParams::g(a, b, n, c(m as f64))).unwrap();
                    assert!((cf.value.re - fs).abs() < 1e-13 * fs, "a={a} b={b} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn special_case_matches_general_closed_form() {
        for &(a, b) in &[(1.0, 1.0), (0.4, 0.7), (6.0, 2.0), (0.05, 0.5)] {
            for n in 1..5 {
                let s = j_n1_at_xi_one(a, b, n).unwrap();
                let g = closed_form(IntegralParams::j(a, b, n, c(1.0), 1)).unwrap();
                assert!((s - g.value.re).abs() < 1e-12 * s, "a={a} b={b} n={n}");
            }
        }
    }

    #[test]
    fn complex_xi_uses_quadrature() {
        let r = integral_g(IntegralParams::g(0.7, 1.3, 2, Complex64::new(2.5, 1.0))).unwrap();
        assert_eq!(r.method, Method::Quadrature);
        assert!(r.est_abs_error > 0.0);
    }
}
