//! Integral Cauchy-Binet identity, checked numerically on polynomial data.
//!
//! For functions f_1..f_m, g_1..g_n (m ≤ n), constants c (n-m rows) and a
//! weight h on D,
//!
//! ∫_{D^m} det[f_j(x_i)] det[c ; g_j(x_i)] Π h(x_i) dx = m! det Φ,
//!
//! where Φ has the rows of c on top and ∫ f_i g_j h below.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{det, CMat};
use crate::special::gamma::factorial;
use crate::special::quad::gauss_legendre;

/// Polynomial coefficients, lowest degree first.
pub type Poly = Vec<f64>;

fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CauchyBinetInstance {
    pub f: Vec<Poly>,
    pub g: Vec<Poly>,
    /// (n - m) × n constants.
    pub c: Vec<Vec<f64>>,
    pub h: Poly,
    /// Integration interval D = [lo, hi].
    pub domain: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyBinetCheck {
    /// m-fold integral by tensor Gauss-Legendre.
    pub lhs: f64,
    /// m! det Φ.
    pub rhs: f64,
    pub rel_error: f64,
}

impl CauchyBinetInstance {
    fn dims(&self) -> Result<(usize, usize)> {
        let (m, n) = (self.f.len(), self.g.len());
        if m == 0 || m > n {
            return Err(Error::Domain("need 1 <= m <= n"));
        }
        if self.c.len() != n - m || self.c.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n - m, found: self.c.len() });
        }
        if !(self.domain.0 < self.domain.1) {
            return Err(Error::Domain("empty integration domain"));
        }
        Ok((m, n))
    }

    fn rule(&self, order: usize) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.domain;
        let (x, w) = gauss_legendre(order);
        let half = 0.5 * (hi - lo);
        (x.iter().map(|t| lo + half * (t + 1.0)).collect(), w.iter().map(|v| v * half).collect())
    }

    /// m! det Φ with one-dimensional integrals.
    pub fn rhs(&self, order: usize) -> Result<f64> {
        let (m, n) = self.dims()?;
        let (x, w) = self.rule(order);
        let phi = CMat::from_fn(n, n, |i, j| {
            if i < n - m {
                Complex64::new(self.c[i][j], 0.0)
            } else {
                let fi = &self.f[i - (n - m)];
                let v: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * eval(fi, t) * eval(&self.g[j], t) * eval(&self.h, t)).sum();
                Complex64::new(v, 0.0)
            }
        });
        Ok(factorial(m as u32) * det(&phi)?.re)
    }

    /// Left side by brute-force tensor-product quadrature with `order` nodes per axis.
    pub fn lhs(&self, order: usize) -> Result<f64> {
        let (m, n) = self.dims()?;
        let (x, w) = self.rule(order);
        let mut idx = alloc::vec![0usize; m];
        let mut total = 0.0;
        loop {
            let pts: Vec<f64> = idx.iter().map(|&k| x[k]).collect();
            let weight: f64 = idx.iter().map(|&k| w[k] * eval(&self.h, x[k])).product();
            let fm = CMat::from_real(m, m, |i, j| eval(&self.f[j], pts[i]));
            let gm = CMat::from_real(n, n, |i, j| if i < n - m { self.c[i][j] } else { eval(&self.g[j], pts[i - (n - m)]) });
            total += weight * (det(&fm)? * det(&gm)?).re;
            // odometer increment
            let mut d = 0;
            loop {
                if d == m {
                    return Ok(total);
                }
                idx[d] += 1;
                if idx[d] < order {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    pub fn check(&self, order: usize) -> Result<CauchyBinetCheck> {
        let lhs = self.lhs(order)?;
        let rhs = self.rhs(order)?;
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        Ok(CauchyBinetCheck { lhs, rhs, rel_error: (lhs - rhs).abs() / scale })
    }
}
