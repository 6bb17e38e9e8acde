//! Truncated power series in one variable, used to carry derivatives with
//! respect to the CF argument through real-valued computations.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

/// `c[0] + c[1] e + ... + c[n] e^n` modulo `e^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// `v + e`
    pub fn variable(v: f64, order: usize) -> Jet {
        let mut j = Jet::constant(v, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// n-th derivative at zero.
    pub fn derivative(&self, n: usize) -> f64 {
        self.c[n] * crate::special::gamma::factorial(n as u32)
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut out = vec![0.0; n];
        out[0] = libm::exp(self.c[0]);
        for k in 1..n {
            let mut s = 0.0;
            for i in 1..=k {
                s += i as f64 * self.c[i] * out[k - i];
            }
            out[k] = s / k as f64;
        }
        Jet { c: out }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = self.c.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                out[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Jet { c: out }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable() {
        let e = Jet::variable(0.0, 4).scale(2.0).exp();
        // e^{2x} = sum 2^k x^k / k!
        let want = [1.0, 2.0, 2.0, 4.0 / 3.0, 2.0 / 3.0];
        for (a, b) in e.c.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((e.derivative(3) - 8.0).abs() < 1e-14);
    }
}
