//! Small dense complex matrices: LU with log-determinant, solves, condition
//! estimates, a double-double determinant, and a Hermitian Jacobi eigensolver.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};
use num_complex::Complex64;

use crate::dd::CDd;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> CMat {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> CMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_real<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> CMat {
        CMat::from_fn(rows, cols, |i, j| Complex64::new(f(i, j), 0.0))
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<CMat> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn diagonal(d: &[f64]) -> CMat {
        let mut m = CMat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Max elementwise |A - A^H|.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, r) in orow.iter_mut().zip(rrow) {
                    *o += a * r;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

/// Determinant as log-magnitude plus phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogDet {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(libm::exp(self.ln_abs), self.arg)
    }

    /// exp(ln|det| + shift) e^{i arg}
    pub fn value_shifted(&self, shift: Complex64) -> Complex64 {
        let z = Complex64::new(self.ln_abs + shift.re, self.arg + shift.im);
        z.exp()
    }
}

/// LU factorization with row equilibration and partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: CMat,
    perm: Vec<usize>,
    row_scale: Vec<f64>,
    swaps: usize,
}

pub fn lu(a: &CMat) -> Result<Lu> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut row_scale = vec![1.0; n];
    for i in 0..n {
        let mx = m.row(i).iter().fold(0.0f64, |s, v| s.max(v.norm()));
        if mx == 0.0 || !mx.is_finite() {
            return Err(Error::Degenerate { condition: f64::INFINITY });
        }
        row_scale[i] = mx;
        for v in m.row_mut(i) {
            *v /= mx;
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let (p, pmax) = (k..n).fold((k, -1.0), |acc, i| {
            let v = m[(i, k)].norm();
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
        if pmax == 0.0 {
            return Err(Error::Degenerate { condition: f64::INFINITY });
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            row_scale.swap(k, p);
            swaps += 1;
        }
        let inv = m[(k, k)].inv();
        for i in k + 1..n {
            let f = m[(i, k)] * inv;
            m[(i, k)] = f;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let u = m[(k, j)];
                m[(i, j)] -= f * u;
            }
        }
    }
    Ok(Lu { lu: m, perm, row_scale, swaps })
}

impl Lu {
    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn log_det(&self) -> LogDet {
        let mut ln_abs = 0.0;
        let mut arg = if self.swaps % 2 == 1 { core::f64::consts::PI } else { 0.0 };
        for i in 0..self.dim() {
            let d = self.lu[(i, i)];
            ln_abs += libm::log(d.norm()) + libm::log(self.row_scale[i]);
            arg += d.arg();
        }
        LogDet { ln_abs, arg: wrap_angle(arg) }
    }

    /// Solve A X = B.
    pub fn solve(&self, b: &CMat) -> CMat {
        let n = self.dim();
        assert_eq!(b.rows, n);
        let mut x = CMat::zeros(n, b.cols);
        for i in 0..n {
            let src = self.perm[i];
            for j in 0..b.cols {
                x[(i, j)] = b[(src, j)] / self.row_scale[i];
            }
        }
        for j in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, j)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / self.lu[(i, i)];
            }
        }
        x
    }

    pub fn inverse(&self) -> CMat {
        self.solve(&CMat::identity(self.dim()))
    }
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut r = libm::fmod(a, two_pi);
    if r > core::f64::consts::PI {
        r -= two_pi;
    } else if r <= -core::f64::consts::PI {
        r += two_pi;
    }
    r
}

pub fn log_det(a: &CMat) -> Result<LogDet> {
    Ok(lu(a)?.log_det())
}

/// Determinant; exactly singular input gives 0.
pub fn det(a: &CMat) -> Result<Complex64> {
    match lu(a) {
        Ok(f) => Ok(f.log_det().value()),
        Err(Error::Degenerate { .. }) => Ok(ZERO),
        Err(e) => Err(e),
    }
}

/// 1-norm condition number ||A||₁ ||A⁻¹||₁ via an explicit inverse.
pub fn condition_number(a: &CMat) -> Result<f64> {
    let f = lu(a)?;
    Ok(a.norm1() * f.inverse().norm1())
}

/// Log-determinant with elimination carried out in double-double arithmetic.
pub fn log_det_dd(a: &CMat) -> Result<LogDet> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut ln_scale = 0.0;
    let mut m: Vec<CDd> = Vec::with_capacity(n * n);
    for i in 0..n {
        let mx = a.row(i).iter().fold(0.0f64, |s, v| s.max(v.norm()));
        if mx == 0.0 || !mx.is_finite() {
            return Err(Error::Degenerate { condition: f64::INFINITY });
        }
        // power-of-two scaling keeps the entries exact
        let e = libm::ilogb(mx);
        let s = libm::scalbn(1.0, -e);
        ln_scale += e as f64 * core::f64::consts::LN_2;
        for v in a.row(i) {
            m.push(CDd::from_c64(*v * s));
        }
    }
    let mut swaps = 0;
    let mut ln_abs = ln_scale;
    let mut arg = 0.0;
    for k in 0..n {
        let (p, pmax) = (k..n).fold((k, -1.0), |acc, i| {
            let v = m[i * n + k].abs_approx();
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
        if pmax == 0.0 {
            return Err(Error::Degenerate { condition: f64::INFINITY });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            swaps += 1;
        }
        let piv = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            for j in k + 1..n {
                let u = m[k * n + j];
                m[i * n + j] = m[i * n + j] - f * u;
            }
        }
        let d = piv.to_c64();
        ln_abs += libm::log(d.norm());
        arg += d.arg();
    }
    if swaps % 2 == 1 {
        arg += core::f64::consts::PI;
    }
    Ok(LogDet { ln_abs, arg: wrap_angle(arg) })
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending, eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

fn jacobi(a: &CMat, want_vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut m = a.clone();
    // symmetrize exactly: average with the adjoint
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    let mut v = if want_vectors { Some(CMat::identity(n)) } else { None };
    let total: f64 = m.data.iter().map(|z| z.norm_sqr()).sum();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
                let pc = phase.conj();
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -pc * s;
                let u_qq = pc * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * u_pp + mkq * u_qp;
                    m[(k, q)] = mkp * u_pq + mkq * u_qq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = u_pp.conj() * mpk + u_qp.conj() * mqk;
                    m[(q, k)] = u_pq.conj() * mpk + u_qq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u_pp + vkq * u_qp;
                        v[(k, q)] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(core::cmp::Ordering::Equal));
    let values: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| CMat::from_fn(n, n, |r, c| v[(r, idx[c])]));
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Internal("non-finite eigenvalue"));
    }
    Ok((values, vectors))
}

pub fn hermitian_eigen(a: &CMat) -> Result<HermitianEigen> {
    let (values, vectors) = jacobi(a, true)?;
    Ok(HermitianEigen { values, vectors: vectors.unwrap_or_else(|| CMat::identity(0)) })
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    Ok(jacobi(a, false)?.0)
}

impl HermitianEigen {
    /// V diag(f(λ)) V^H
    pub fn reconstruct_with<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        let n = self.values.len();
        let mut out = CMat::zeros(n, n);
        for k in 0..n {
            let fk = f(self.values[k]);
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues below -1e-12 (relative to the largest) are rejected.
pub fn hermitian_sqrt(a: &CMat) -> Result<CMat> {
    let e = hermitian_eigen(a)?;
    let scale = e.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let Some(&min) = e.values.first() {
        if min < -1e-12 * scale {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
    }
    Ok(e.reconstruct_with(|x| libm::sqrt(x.max(0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> CMat {
        CMat::from_rows(
            3,
            3,
            vec![c(2.0, 1.0), c(-1.0, 0.5), c(0.3, 0.0), c(0.7, -2.0), c(1.5, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(-0.2, 0.4), c(3.0, -1.0)],
        )
        .unwrap()
    }

    fn det3(m: &CMat) -> Complex64 {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = sample();
        let want = det3(&m);
        assert!((det(&m).unwrap() - want).norm() < 1e-13 * want.norm());
        assert!((log_det_dd(&m).unwrap().value() - want).norm() < 1e-13 * want.norm());
    }

    #[test]
    fn solve_and_inverse() {
        let m = sample();
        let inv = lu(&m).unwrap().inverse();
        let id = m.matmul(&inv);
        assert!(id.max_abs_diff(&CMat::identity(3)) < 1e-14);
        assert!(condition_number(&m).unwrap() >= 1.0);
    }

    #[test]
    fn singular_is_degenerate() {
        let m = CMat::from_real(2, 2, |i, _| i as f64 + 1.0);
        assert!(matches!(lu(&m), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = sample();
        let h = &a + &a.adjoint();
        let e = hermitian_eigen(&h).unwrap();
        let back = e.reconstruct_with(|x| x);
        assert!(back.max_abs_diff(&h) < 1e-13);
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let tr: f64 = e.values.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-13);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = sample();
        let p = &a.matmul(&a.adjoint()) + &CMat::identity(3);
        let r = hermitian_sqrt(&p).unwrap();
        assert!(r.matmul(&r).max_abs_diff(&p) < 1e-12);
    }
}
