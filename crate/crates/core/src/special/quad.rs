//! Gauss-Legendre rules and adaptive Gauss-Kronrod integration.

use alloc::vec::Vec;
use num_complex::Complex64;

/// `n`-point Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// (K15, |K15 - G7|, K15 of |f|)
fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (fl, fr) = (f(c - dx), f(c + dx));
        let s = fl + fr;
        k += s * WGK[j];
        l1 += (fl.norm() + fr.norm()) * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm(), l1 * h.abs())
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub converged: bool,
}

/// Adaptive Gauss-Kronrod (7/15) integration of a complex integrand over [a, b].
///
/// The interval starts split into `pieces` equal parts; the part with the
/// largest |K15 - G7| is bisected until the summed estimate meets
/// `max(abs_tol, rel_tol * |value|)`, or `1e-12 ∫|f|`
/// when the integrand oscillates enough to cancel.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    pieces: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    const MAX_INTERVALS: usize = 20000;
    let pieces = pieces.max(1);
    let mut parts: Vec<(f64, f64, Complex64, f64, f64)> = Vec::with_capacity(pieces * 4);
    let step = (b - a) / pieces as f64;
    for i in 0..pieces {
        let lo = a + step * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + step };
        let (v, e, l) = gk15(&mut f, lo, hi);
        parts.push((lo, hi, v, e, l));
    }
    loop {
        let total: Complex64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let l1: f64 = parts.iter().map(|p| p.4).sum();
        let tol = abs_tol.max(rel_tol * total.norm()).max(1e-12 * l1);
        if err <= tol || parts.len() >= MAX_INTERVALS {
            return QuadResult { value: total, abs_error: err, converged: err <= tol };
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return QuadResult { value: total, abs_error: err, converged: false };
        }
        let (v1, e1, l1) = gk15(&mut f, lo, mid);
        let (v2, e2, l2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1, l1));
        parts.push((mid, hi, v2, e2, l2));
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    pieces: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> (f64, f64, bool) {
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, pieces, abs_tol, rel_tol);
    (r.value.re, r.abs_error, r.converged)
}

/// Fixed composite rule for integrals over [0, inf): one Gauss-Legendre panel on
/// [0, x0], then panels of constant width `delta` in ln x up to `x_max`.
/// `weights` already include the Jacobian.
#[derive(Clone, Debug)]
pub struct LogPanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LogPanelRule {
    pub fn new(x0: f64, x_max: f64, delta: f64, order: usize) -> LogPanelRule {
        let (gx, gw) = gauss_legendre(order);
        let t0 = libm::log(x0);
        let t1 = libm::log(x_max.max(x0 * 1.0001));
        let panels = libm::ceil((t1 - t0) / delta).max(1.0) as usize;
        let h = (t1 - t0) / panels as f64;
        let mut nodes = Vec::with_capacity(order * (panels + 1));
        let mut weights = Vec::with_capacity(order * (panels + 1));
        for (xi, wi) in gx.iter().zip(&gw) {
            nodes.push(0.5 * x0 * (xi + 1.0));
            weights.push(0.5 * x0 * wi);
        }
        for p in 0..panels {
            let c = t0 + h * (p as f64 + 0.5);
            for (xi, wi) in gx.iter().zip(&gw) {
                let x = libm::exp(c + 0.5 * h * xi);
                nodes.push(x);
                weights.push(0.5 * h * wi * x);
            }
        }
        LogPanelRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Smallest `t` with `exp(-t) t^q` below about 1e-19 of the peak scale, used to
/// cut semi-infinite integrals.
pub fn tail_cutoff(q: f64) -> f64 {
    let q = q.max(0.0);
    let mut t: f64 = 50.0 + q;
    for _ in 0..30 {
        t = 44.0 + q * libm::log(t.max(1.0)) + 4.0;
    }
    t
}
