//! Divided differences that stay accurate when nodes cluster or coincide.
//!
//! For a span of nodes `t_i..t_j` close enough (relative to the function's
//! local Taylor radius) the divided difference is summed from the Taylor
//! expansion about the span midpoint,
//! `f[t_i..t_j] = sum_r f_{k+r}(c) h_r(t_i - c, .., t_j - c)`,
//! where `f_m` are Taylor coefficients and `h_r` complete homogeneous
//! symmetric polynomials. Wider spans use the usual recursion.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};
use num_complex::Complex64;

use crate::jet::Jet;

/// Number field the divided differences are taken in.
pub trait Scalar: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
    fn add_f64(self, v: f64) -> Self;
    /// `base^exponent` for `base > 0`.
    fn pow_base(base: f64, exponent: &Self) -> Self;
}

impl Scalar for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn add_f64(self, v: f64) -> f64 {
        self + v
    }
    fn pow_base(base: f64, exponent: &f64) -> f64 {
        libm::pow(base, *exponent)
    }
}

impl Scalar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn add_f64(self, v: f64) -> Complex64 {
        self + v
    }
    fn pow_base(base: f64, exponent: &Complex64) -> Complex64 {
        (exponent * libm::log(base)).exp()
    }
}

impl Scalar for Jet {
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
    fn add_f64(mut self, v: f64) -> Jet {
        self.c[0] += v;
        self
    }
    fn pow_base(base: f64, exponent: &Jet) -> Jet {
        exponent.scale(libm::log(base)).exp()
    }
}

/// A function of one real variable that can report its value and Taylor
/// coefficients.
pub trait Expand {
    type S: Scalar;
    type Gen: Iterator<Item = Self::S>;
    fn value(&self, t: f64) -> Self::S;
    /// True when a Taylor expansion about `c` converges quickly over `c ± width/2`.
    fn close(&self, c: f64, width: f64) -> bool;
    /// Taylor coefficients `f^{(m)}(c) / m!`, m = 0, 1, ...
    fn taylor(&self, c: f64) -> Self::Gen;
}

/// `(p + q t)^beta` on the region where `p + q t > 0`.
#[derive(Clone, Debug)]
pub struct PowerAffine<S> {
    pub p: f64,
    pub q: f64,
    pub beta: S,
}

pub struct PowerGen<S> {
    coef: S,
    beta: S,
    s: f64,
    m: usize,
}

impl<S: Scalar> Iterator for PowerGen<S> {
    type Item = S;
    fn next(&mut self) -> Option<S> {
        let out = self.coef.clone();
        let m = self.m as f64;
        self.coef = self.coef.clone() * self.beta.clone().add_f64(-m) * (self.s / (m + 1.0));
        self.m += 1;
        Some(out)
    }
}

impl<S: Scalar> Expand for PowerAffine<S> {
    type S = S;
    type Gen = PowerGen<S>;
    fn value(&self, t: f64) -> S {
        S::pow_base(self.p + self.q * t, &self.beta)
    }
    fn close(&self, c: f64, width: f64) -> bool {
        let w = self.p + self.q * c;
        width * (self.q / w).abs() * self.beta.magnitude().max(1.0) <= 0.5
    }
    fn taylor(&self, c: f64) -> PowerGen<S> {
        let w = self.p + self.q * c;
        PowerGen { coef: S::pow_base(w, &self.beta), beta: self.beta.clone(), s: self.q / w, m: 0 }
    }
}

/// `t^p e^{-x/t}` for `t > 0`.
#[derive(Clone, Copy, Debug)]
pub struct ExpPow {
    pub p: f64,
    pub x: f64,
}

pub struct ExpPowGen {
    prev: f64,
    cur: f64,
    p: f64,
    y: f64,
    inv_c: f64,
    scale: f64,
    m: usize,
}

impl Iterator for ExpPowGen {
    type Item = f64;
    fn next(&mut self) -> Option<f64> {
        // coefficients of (1+u)^p exp(y u / (1+u)) satisfy
        // (m+1) f_{m+1} = (p + y - 2m) f_m + (p - m + 1) f_{m-1}
        let out = self.cur * self.scale;
        let m = self.m as f64;
        let next = ((self.p + self.y - 2.0 * m) * self.cur + (self.p - m + 1.0) * self.prev) / (m + 1.0);
        self.prev = self.cur;
        self.cur = next;
        self.scale *= self.inv_c;
        self.m += 1;
        Some(out)
    }
}

impl Expand for ExpPow {
    type S = f64;
    type Gen = ExpPowGen;
    fn value(&self, t: f64) -> f64 {
        libm::pow(t, self.p) * libm::exp(-self.x / t)
    }
    fn close(&self, c: f64, width: f64) -> bool {
        width / c * 1f64.max(self.x / c).max(self.p.abs()) <= 0.5
    }
    fn taylor(&self, c: f64) -> ExpPowGen {
        let y = self.x / c;
        ExpPowGen {
            prev: 0.0,
            cur: 1.0,
            p: self.p,
            y,
            inv_c: 1.0 / c,
            scale: libm::pow(c, self.p) * libm::exp(-y),
            m: 0,
        }
    }
}

const R_CAP: usize = 100;

#[derive(Clone, Debug)]
struct Span {
    center: f64,
    width: f64,
    /// h_r of the node offsets from `center`, r = 0..=R_CAP
    h: Vec<f64>,
}

/// Precomputed data for divided differences over a fixed ascending node list.
#[derive(Clone, Debug)]
pub struct DdPlan {
    nodes: Vec<f64>,
    /// spans[len-1][i] covers nodes i..=i+len
    spans: Vec<Vec<Span>>,
}

/// `h_r(vars)` for r = 0..=cap.
pub fn complete_homogeneous(vars: &[f64], cap: usize) -> Vec<f64> {
    let mut h = vec![0.0; cap + 1];
    h[0] = 1.0;
    for &d in vars {
        for r in 1..=cap {
            h[r] += d * h[r - 1];
        }
    }
    h
}

impl DdPlan {
    pub fn new(nodes: &[f64]) -> DdPlan {
        let m = nodes.len();
        let mut spans = Vec::with_capacity(m.saturating_sub(1));
        for len in 1..m {
            let mut row = Vec::with_capacity(m - len);
            for i in 0..m - len {
                let lo = nodes[i];
                let hi = nodes[i + len];
                let center = 0.5 * (lo + hi);
                let offsets: Vec<f64> = nodes[i..=i + len].iter().map(|t| t - center).collect();
                row.push(Span { center, width: hi - lo, h: complete_homogeneous(&offsets, R_CAP) });
            }
            spans.push(row);
        }
        DdPlan { nodes: nodes.to_vec(), spans }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn taylor_dd<F: Expand>(f: &F, span: &Span, k: usize) -> F::S {
        let mut gen = f.taylor(span.center);
        for _ in 0..k {
            gen.next();
        }
        let mut acc = gen.next().expect("taylor generator is infinite");
        let mut small = 0;
        for r in 1..=R_CAP {
            let c = gen.next().expect("taylor generator is infinite");
            let term = c * span.h[r];
            let tm = term.magnitude();
            acc = acc + term;
            if tm <= 1e-17 * acc.magnitude() {
                small += 1;
                if small >= 2 && r >= 4 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        acc
    }

    /// Prefix divided differences `f[t_0..t_k]` for k = 0..m-1.
    pub fn prefix<F: Expand>(&self, f: &F) -> Vec<F::S> {
        let m = self.nodes.len();
        let mut out = Vec::with_capacity(m);
        if m == 0 {
            return out;
        }
        let mut level: Vec<F::S> = self.nodes.iter().map(|&t| f.value(t)).collect();
        out.push(level[0].clone());
        for len in 1..m {
            let spans = &self.spans[len - 1];
            let mut next = Vec::with_capacity(m - len);
            for (i, span) in spans.iter().enumerate() {
                let v = if f.close(span.center, span.width) {
                    Self::taylor_dd(f, span, len)
                } else {
                    (level[i + 1].clone() - level[i].clone()) * (1.0 / span.width)
                };
                next.push(v);
            }
            out.push(next[0].clone());
            level = next;
        }
        out
    }
}
