//! Characteristic function of the capacity.
//!
//! The correlated kind is evaluated in a divided-difference form: with
//! `a = eta_bar * lambda`, the rows of Λ(ν) are divided-differenced over `a`
//! and the columns over `σ`. Both Vandermonde products in the normalizer
//! cancel exactly, leaving `φ(ν) = Υ(ν) det M(ν)` with
//!
//! * top rows `M_ij = h_{i-j}(σ_1..σ_j)` (complete homogeneous polynomials),
//! * bottom rows `M_ιj = ∫ A_ι(x) S_j(x) dx`, where `A_ι` is the divided
//!   difference of `(1 + a x)^{ν + n_S - 1}` over `a_1..a_ι` and `S_j` that of
//!   `σ^{n_L - n_S - 1} e^{-x/σ}` over `σ_1..σ_j`.
//!
//! No eigenvalue differences are ever divided out, so clustered or repeated
//! eigenvalues are harmless. The literal Λ, Λ^{(n)} and Ω builders are kept
//! for cross-checks.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::divdiff::{complete_homogeneous, DdPlan, ExpPow, PowerAffine};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{condition_number, log_det, log_det_dd, CMat, LogDet};
use crate::model::{min_relative_gap, ChannelConfig, CorrelationPair, Warning};
use crate::special::gamma::{factorial, ln_factorial, ln_gamma_complex};
use crate::special::quad::{tail_cutoff, LogPanelRule};
use crate::special::{integral_g, integral_j, IntegralParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CfKind {
    Correlated,
    Iid,
    HighSnr,
}

/// Spectral data and normalization shared by all CF evaluations.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CFMatrixBundle {
    pub kind: CfKind,
    /// Ascending eigenvalues of the small-side correlation.
    pub lambda_small: Vec<f64>,
    /// Ascending eigenvalues of the large-side correlation.
    pub sigma_large: Vec<f64>,
    pub eta_bar: f64,
    pub n_s: usize,
    pub n_l: usize,
    /// ln K_cor (correlated), ln K_iid (iid), or ln(Π Γ(ℓ) V(σ)) (high SNR).
    pub ln_norm: f64,
}

impl CFMatrixBundle {
    pub fn norm(&self) -> f64 {
        libm::exp(self.ln_norm)
    }
}

/// ln Π_{i<j} (x_j - x_i) for ascending `x`.
pub fn ln_vandermonde(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..x.len() {
        for i in 0..j {
            s += libm::log(x[j] - x[i]);
        }
    }
    s
}

/// ln K_cor = n_S(n_S-1)/2 ln η̄ + ln V(λ) + ln V(σ)
pub fn ln_k_cor(eta_bar: f64, lambda: &[f64], sigma: &[f64]) -> f64 {
    let n_s = lambda.len() as f64;
    0.5 * n_s * (n_s - 1.0) * libm::log(eta_bar) + ln_vandermonde(lambda) + ln_vandermonde(sigma)
}

/// ln K_iid = Σ_{ℓ=1}^{n_S} ln[(n_L-ℓ)! (ℓ-1)!]
pub fn ln_k_iid(n_s: usize, n_l: usize) -> f64 {
    (1..=n_s).map(|l| ln_factorial((n_l - l) as u32) + ln_factorial((l - 1) as u32)).sum()
}

/// ln Υ(ν) = -Σ_{ℓ=1}^{n_S-1} ℓ ln(ν + ℓ)
pub fn ln_upsilon(n_s: usize, nu: Complex64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for l in 1..n_s {
        s -= (nu + l as f64).ln() * l as f64;
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfOptions {
    /// Minimum relative eigenvalue gap accepted by the correlated kind; 0 accepts
    /// repeated eigenvalues.
    pub gap_threshold: f64,
    /// Force double-double determinants; `None` enables them for n_L > 8.
    pub extended_precision: Option<bool>,
    pub cond_warn: f64,
}

impl Default for CfOptions {
    fn default() -> Self {
        CfOptions { gap_threshold: 1e-9, extended_precision: None, cond_warn: 1e12 }
    }
}

const GL_ORDER: usize = 16;
const BASE_DELTA: f64 = 0.5;
/// Largest |ω| δ handled per log-panel.
const PHASE_PER_PANEL: f64 = 8.0;
const PRECOMPUTED_LEVELS: usize = 6;

#[derive(Clone, Debug)]
struct Level {
    omega_limit: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// S_j(x_k), node-major.
    s: Vec<f64>,
}

/// Variable the bottom rows are divided-differenced over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowMode {
    /// `a = η̄λ`, rows `(1 + a x)^β`; suits small `a`.
    Affine,
    /// `b = 1/a`, rows `(x + b)^β` after pulling `a^β` out of each row; suits large `a`.
    Inverse,
}

#[derive(Clone, Debug)]
struct CorrelatedEngine {
    mode: RowMode,
    /// ν coefficient of the extra log factor (Σ ln a in inverse mode).
    log_shift: f64,
    /// iπ when the inverse ordering flips the determinant sign.
    sign_phase: f64,
    a_plan: DdPlan,
    sigma_plan: DdPlan,
    p: f64,
    x0: f64,
    x_max: f64,
    top: CMat,
    levels: Vec<Level>,
}

#[derive(Clone, Debug)]
struct HighSnrEngine {
    sigma_plan: DdPlan,
    top: CMat,
    /// n_S ln η̄ + ln det Ψ_S
    log_shift: f64,
}

#[derive(Clone, Debug)]
enum Engine {
    Correlated(CorrelatedEngine),
    Iid,
    HighSnr(HighSnrEngine),
}

/// Evaluable capacity characteristic function.
#[derive(Clone, Debug)]
pub struct CapacityCf {
    pub bundle: CFMatrixBundle,
    /// 1-norm condition number of Λ(0) (correlated), Ω(0) (iid) or K(0) (high SNR).
    pub cond_estimate_at_zero: f64,
    /// Condition number of the matrix actually factored at ν = 0.
    pub cond_evaluated_at_zero: f64,
    pub warnings: Vec<Warning>,
    extended: bool,
    engine: Engine,
}

fn top_rows(sigma: &[f64], rows: usize) -> CMat {
    let n_l = sigma.len();
    let mut m = CMat::zeros(rows, n_l);
    for i in 0..rows {
        for j in 0..=i.min(n_l - 1) {
            let h = complete_homogeneous(&sigma[..=j], i - j);
            m[(i, j)] = Complex64::new(h[i - j], 0.0);
        }
    }
    m
}

fn stack(top: &CMat, bottom: &CMat) -> CMat {
    let n = top.cols();
    CMat::from_fn(top.rows() + bottom.rows(), n, |i, j| {
        if i < top.rows() {
            top[(i, j)]
        } else {
            bottom[(i - top.rows(), j)]
        }
    })
}

impl CorrelatedEngine {
    fn new(bundle: &CFMatrixBundle) -> CorrelatedEngine {
        let a: Vec<f64> = bundle.lambda_small.iter().map(|l| bundle.eta_bar * l).collect();
        let sigma = &bundle.sigma_large;
        let a_max = a.last().copied().unwrap_or(1.0);
        let ln_a_sum: f64 = a.iter().map(|v| libm::log(*v)).sum();
        let geo_mean = libm::exp(ln_a_sum / a.len() as f64);
        let (mode, nodes, log_shift, sign_phase) = if geo_mean > 1.0 {
            let b: Vec<f64> = a.iter().rev().map(|v| 1.0 / v).collect();
            let flips = a.len() / 2;
            (RowMode::Inverse, b, ln_a_sum, if flips % 2 == 1 { core::f64::consts::PI } else { 0.0 })
        } else {
            (RowMode::Affine, a.clone(), 0.0, 0.0)
        };
        let x0 = 1e-3 * (1.0 / a_max).min(sigma[0]);
        let q = (bundle.n_s + bundle.n_l) as f64 + 2.0;
        let x_max = sigma[sigma.len() - 1] * tail_cutoff(q);
        let mut e = CorrelatedEngine {
            mode,
            log_shift,
            sign_phase,
            a_plan: DdPlan::new(&nodes),
            sigma_plan: DdPlan::new(sigma),
            p: bundle.n_l as f64 - bundle.n_s as f64 - 1.0,
            x0,
            x_max,
            top: top_rows(sigma, bundle.n_l - bundle.n_s),
            levels: Vec::new(),
        };
        let l0 = e.build_level(BASE_DELTA);
        e.levels.push(l0);
        e
    }

    fn build_level(&self, delta: f64) -> Level {
        let rule = LogPanelRule::new(self.x0, self.x_max, delta, GL_ORDER);
        let n_l = self.sigma_plan.nodes().len();
        let mut s = Vec::with_capacity(rule.len() * n_l);
        for &x in &rule.nodes {
            s.extend(self.sigma_plan.prefix(&ExpPow { p: self.p, x }));
        }
        Level { omega_limit: PHASE_PER_PANEL / delta, nodes: rule.nodes, weights: rule.weights, s }
    }

    fn ensure_levels(&mut self, omega_max: f64) {
        while self.levels.len() < PRECOMPUTED_LEVELS && self.levels.last().is_none_or(|l| l.omega_limit < omega_max) {
            let delta = BASE_DELTA / libm::pow(2.0, self.levels.len() as f64);
            let lvl = self.build_level(delta);
            self.levels.push(lvl);
        }
    }

    fn affine(&self, x: f64) -> (f64, f64) {
        match self.mode {
            RowMode::Affine => (1.0, x),
            RowMode::Inverse => (x, 1.0),
        }
    }

    fn bottom(&self, nu: Complex64) -> CMat {
        let w = nu.im.abs();
        let tmp;
        let level = match self.levels.iter().find(|l| l.omega_limit >= w) {
            Some(l) => l,
            None => {
                tmp = self.build_level(PHASE_PER_PANEL / w);
                &tmp
            }
        };
        let n_s = self.a_plan.nodes().len();
        let n_l = self.sigma_plan.nodes().len();
        let beta = nu + (n_s as f64 - 1.0);
        let mut b = vec![Complex64::new(0.0, 0.0); n_s * n_l];
        for (k, (&x, &wk)) in level.nodes.iter().zip(&level.weights).enumerate() {
            let (p, q) = self.affine(x);
            let a = self.a_plan.prefix(&PowerAffine { p, q, beta });
            let s = &level.s[k * n_l..(k + 1) * n_l];
            for (i, ai) in a.iter().enumerate() {
                let ai = ai * wk;
                for (j, sj) in s.iter().enumerate() {
                    b[i * n_l + j] += ai * *sj;
                }
            }
        }
        CMat::from_rows(n_s, n_l, b).expect("sizes match")
    }

    /// Bottom rows as jets in ν about 0.
    fn bottom_jets(&self, order: usize) -> Vec<Jet> {
        let level = &self.levels[0];
        let n_s = self.a_plan.nodes().len();
        let n_l = self.sigma_plan.nodes().len();
        let beta = Jet::variable(n_s as f64 - 1.0, order);
        let mut b = vec![Jet::constant(0.0, order); n_s * n_l];
        for (k, (&x, &wk)) in level.nodes.iter().zip(&level.weights).enumerate() {
            let (p, q) = self.affine(x);
            let a = self.a_plan.prefix(&PowerAffine { p, q, beta: beta.clone() });
            let s = &level.s[k * n_l..(k + 1) * n_l];
            for (i, ai) in a.iter().enumerate() {
                for (j, sj) in s.iter().enumerate() {
                    let f = wk * sj;
                    if f == 0.0 {
                        continue;
                    }
                    for (acc, v) in b[i * n_l + j].c.iter_mut().zip(&ai.c) {
                        *acc += f * v;
                    }
                }
            }
        }
        b
    }
}

impl HighSnrEngine {
    fn bottom(&self, nu: Complex64, n_s: usize) -> CMat {
        let n_l = self.sigma_plan.nodes().len();
        let mut m = CMat::zeros(n_s, n_l);
        for r in 0..n_s {
            let beta = nu + (n_l - n_s + r) as f64;
            let d = self.sigma_plan.prefix(&PowerAffine { p: 0.0, q: 1.0, beta });
            for (j, v) in d.into_iter().enumerate() {
                m[(r, j)] = v;
            }
        }
        m
    }

    fn bottom_jets(&self, n_s: usize, order: usize) -> Vec<Jet> {
        let n_l = self.sigma_plan.nodes().len();
        let mut out = Vec::with_capacity(n_s * n_l);
        for r in 0..n_s {
            let beta = Jet::variable((n_l - n_s + r) as f64, order);
            out.extend(self.sigma_plan.prefix(&PowerAffine { p: 0.0, q: 1.0, beta }));
        }
        out
    }
}

fn check_sizes(config: &ChannelConfig, pair: &CorrelationPair) -> Result<()> {
    if pair.lambda.len() != config.n_s {
        return Err(Error::DimensionMismatch { expected: config.n_s, found: pair.lambda.len() });
    }
    if pair.sigma.len() != config.n_l {
        return Err(Error::DimensionMismatch { expected: config.n_l, found: pair.sigma.len() });
    }
    Ok(())
}

fn cond_or_inf(m: &CMat) -> f64 {
    condition_number(m).unwrap_or(f64::INFINITY)
}

impl CapacityCf {
    /// Exact CF of a doubly correlated channel.
    pub fn correlated(config: &ChannelConfig, pair: &CorrelationPair) -> Result<CapacityCf> {
        CapacityCf::correlated_with(config, pair, &CfOptions::default())
    }

    pub fn correlated_with(config: &ChannelConfig, pair: &CorrelationPair, opts: &CfOptions) -> Result<CapacityCf> {
        check_sizes(config, pair)?;
        let gap = min_relative_gap(&pair.lambda).min(min_relative_gap(&pair.sigma));
        if opts.gap_threshold > 0.0 && gap < opts.gap_threshold {
            return Err(Error::Domain("correlation spectra have repeated eigenvalues; regularize them or lower the gap threshold"));
        }
        let bundle = CFMatrixBundle {
            kind: CfKind::Correlated,
            lambda_small: pair.lambda.clone(),
            sigma_large: pair.sigma.clone(),
            eta_bar: config.eta_bar,
            n_s: config.n_s,
            n_l: config.n_l,
            ln_norm: ln_k_cor(config.eta_bar, &pair.lambda, &pair.sigma),
        };
        let engine = CorrelatedEngine::new(&bundle);
        let cond_lambda = build_lambda_matrix(&bundle, Complex64::new(0.0, 0.0)).map(|m| cond_or_inf(&m)).unwrap_or(f64::INFINITY);
        let m0 = stack(&engine.top, &engine.bottom(Complex64::new(0.0, 0.0)));
        CapacityCf::finish(bundle, Engine::Correlated(engine), cond_lambda, cond_or_inf(&m0), opts)
    }

    /// Exact CF of the i.i.d. channel (identity correlations).
    pub fn iid(config: &ChannelConfig) -> Result<CapacityCf> {
        CapacityCf::iid_with(config, &CfOptions::default())
    }

    pub fn iid_with(config: &ChannelConfig, opts: &CfOptions) -> Result<CapacityCf> {
        let bundle = CFMatrixBundle {
            kind: CfKind::Iid,
            lambda_small: vec![1.0; config.n_s],
            sigma_large: vec![1.0; config.n_l],
            eta_bar: config.eta_bar,
            n_s: config.n_s,
            n_l: config.n_l,
            ln_norm: ln_k_iid(config.n_s, config.n_l),
        };
        let c = cond_or_inf(&build_omega_matrix(&bundle, Complex64::new(0.0, 0.0), 0)?);
        CapacityCf::finish(bundle, Engine::Iid, c, c, opts)
    }

    /// High-SNR asymptotic CF.
    pub fn high_snr(config: &ChannelConfig, pair: &CorrelationPair) -> Result<CapacityCf> {
        CapacityCf::high_snr_with(config, pair, &CfOptions::default())
    }

    pub fn high_snr_with(config: &ChannelConfig, pair: &CorrelationPair, opts: &CfOptions) -> Result<CapacityCf> {
        check_sizes(config, pair)?;
        let sigma = pair.sigma.clone();
        let n_s = config.n_s;
        let ln_norm = (1..=n_s).map(|l| ln_factorial((l - 1) as u32)).sum::<f64>() + ln_vandermonde(&sigma);
        let bundle = CFMatrixBundle {
            kind: CfKind::HighSnr,
            lambda_small: pair.lambda.clone(),
            sigma_large: sigma.clone(),
            eta_bar: config.eta_bar,
            n_s,
            n_l: config.n_l,
            ln_norm,
        };
        let engine = HighSnrEngine {
            sigma_plan: DdPlan::new(&sigma),
            top: top_rows(&sigma, config.n_l - n_s),
            log_shift: n_s as f64 * libm::log(config.eta_bar) + pair.ln_det_psi_s(),
        };
        let k0 = build_k_matrix(&bundle, Complex64::new(0.0, 0.0));
        let m0 = stack(&engine.top, &engine.bottom(Complex64::new(0.0, 0.0), n_s));
        CapacityCf::finish(bundle, Engine::HighSnr(engine), cond_or_inf(&k0), cond_or_inf(&m0), opts)
    }

    fn finish(bundle: CFMatrixBundle, engine: Engine, cond_src: f64, cond_eval: f64, opts: &CfOptions) -> Result<CapacityCf> {
        let mut warnings = Vec::new();
        if !(cond_eval <= opts.cond_warn) {
            warnings.push(Warning::IllConditioned { condition: cond_eval });
        }
        let extended = opts.extended_precision.unwrap_or(bundle.n_l > 8);
        Ok(CapacityCf { bundle, cond_estimate_at_zero: cond_src, cond_evaluated_at_zero: cond_eval, warnings, extended, engine })
    }

    pub fn kind(&self) -> CfKind {
        self.bundle.kind
    }

    /// Precompute quadrature levels for evaluations up to |ω| = `omega_max`.
    pub fn prepare(&mut self, omega_max: f64) {
        if let Engine::Correlated(e) = &mut self.engine {
            e.ensure_levels(omega_max);
        }
    }

    fn det(&self, m: &CMat) -> Result<LogDet> {
        if self.extended {
            log_det_dd(m)
        } else {
            log_det(m)
        }
    }

    /// ln φ(ν) for complex ν (principal branch of the phase is not tracked).
    pub fn ln_cf(&self, nu: Complex64) -> Result<Complex64> {
        let b = &self.bundle;
        let degenerate = |_e: Error| Error::Degenerate { condition: self.cond_evaluated_at_zero };
        match &self.engine {
            Engine::Correlated(e) => {
                let m = stack(&e.top, &e.bottom(nu));
                let ld = self.det(&m).map_err(degenerate)?;
                Ok(ln_upsilon(b.n_s, nu) + nu * e.log_shift + Complex64::new(ld.ln_abs, ld.arg + e.sign_phase))
            }
            Engine::Iid => {
                let m = build_omega_matrix(b, nu, 0)?;
                let ld = self.det(&m).map_err(degenerate)?;
                Ok(Complex64::new(ld.ln_abs - b.ln_norm, ld.arg))
            }
            Engine::HighSnr(e) => {
                let m = stack(&e.top, &e.bottom(nu, b.n_s));
                let ld = self.det(&m).map_err(degenerate)?;
                let mut s = nu * e.log_shift + Complex64::new(ld.ln_abs, ld.arg);
                for l in 1..=b.n_s {
                    s += ln_gamma_complex(nu + l as f64) - ln_factorial((l - 1) as u32);
                }
                Ok(s)
            }
        }
    }

    pub fn evaluate_nu(&self, nu: Complex64) -> Result<Complex64> {
        Ok(self.ln_cf(nu)?.exp())
    }

    /// φ_C(jω)
    pub fn evaluate(&self, omega: f64) -> Result<Complex64> {
        if !omega.is_finite() {
            return Err(Error::Domain("omega must be finite"));
        }
        self.evaluate_nu(Complex64::new(0.0, omega))
    }

    /// Base matrix and its ν-derivatives at 0: `[R(0), R'(0), .., R^{(order)}(0)]`.
    /// R is the divided-difference matrix (correlated, high SNR) or Ω (iid);
    /// the log-derivatives of det R match those of the source matrices.
    pub fn derivative_matrices(&self, order: usize) -> Result<Vec<CMat>> {
        let b = &self.bundle;
        match &self.engine {
            Engine::Iid => (0..=order).map(|n| build_omega_matrix(b, Complex64::new(0.0, 0.0), n as u32)).collect(),
            Engine::Correlated(e) => {
                let jets = e.bottom_jets(order);
                Ok(assemble_jets(&e.top, &jets, b.n_s, b.n_l, order))
            }
            Engine::HighSnr(e) => {
                let jets = e.bottom_jets(b.n_s, order);
                Ok(assemble_jets(&e.top, &jets, b.n_s, b.n_l, order))
            }
        }
    }

    /// Constant added to the trace term of the first cumulant: the ν
    /// coefficient of the factor `e^{ν s}` split off the evaluated determinant.
    pub fn log_shift(&self) -> f64 {
        match &self.engine {
            Engine::HighSnr(e) => e.log_shift,
            Engine::Correlated(e) => e.log_shift,
            Engine::Iid => 0.0,
        }
    }
}

fn assemble_jets(top: &CMat, jets: &[Jet], n_s: usize, n_l: usize, order: usize) -> Vec<CMat> {
    (0..=order)
        .map(|n| {
            let scale = factorial(n as u32);
            let bottom = CMat::from_real(n_s, n_l, |i, j| jets[i * n_l + j].c[n] * scale);
            let t = if n == 0 { top.clone() } else { CMat::zeros(top.rows(), n_l) };
            stack(&t, &bottom)
        })
        .collect()
}

/// Λ(ν): top rows σ_j^{i-1}, bottom rows σ_j^{n_L-n_S-1} G_1(η̄λ_ι, σ_j, ν+n_S).
pub fn build_lambda_matrix(bundle: &CFMatrixBundle, nu: Complex64) -> Result<CMat> {
    lambda_like(bundle, nu, 0)
}

/// Λ^{(n)}(ν): top rows zero, bottom rows σ_j^{n_L-n_S-1} J_{1,n}(η̄λ_ι, σ_j, ν+n_S).
pub fn build_lambda_derivative(bundle: &CFMatrixBundle, nu: Complex64, order: u32) -> Result<CMat> {
    if order == 0 {
        return Err(Error::Domain("derivative order must be positive"));
    }
    lambda_like(bundle, nu, order)
}

fn lambda_like(bundle: &CFMatrixBundle, nu: Complex64, order: u32) -> Result<CMat> {
    let (n_s, n_l) = (bundle.n_s, bundle.n_l);
    let top = n_l - n_s;
    let mut m = CMat::zeros(n_l, n_l);
    for j in 0..n_l {
        let s = bundle.sigma_large[j];
        if order == 0 {
            for i in 0..top {
                m[(i, j)] = Complex64::new(libm::pow(s, i as f64), 0.0);
            }
        }
        let pre = libm::pow(s, top as f64 - 1.0);
        for r in 0..n_s {
            let a = bundle.eta_bar * bundle.lambda_small[r];
            let xi = nu + n_s as f64;
            let v = if order == 0 {
                integral_g(IntegralParams::g(a, s, 1, xi))?
            } else {
                integral_j(IntegralParams::j(a, s, 1, xi, order))?
            };
            m[(top + r, j)] = v.value * pre;
        }
    }
    Ok(m)
}

/// Ω(ν) (order 0) or Ω^{(n)}(ν): entry G or J with n = n_L-n_S+i+j-1, a = η̄, b = 1, ξ = ν+1.
pub fn build_omega_matrix(bundle: &CFMatrixBundle, nu: Complex64, order: u32) -> Result<CMat> {
    let (n_s, n_l) = (bundle.n_s, bundle.n_l);
    let xi = nu + 1.0;
    let mut hankel = Vec::with_capacity(2 * n_s - 1);
    for k in 0..2 * n_s - 1 {
        let n = (n_l - n_s + k + 1) as u32;
        let v = if order == 0 {
            integral_g(IntegralParams::g(bundle.eta_bar, 1.0, n, xi))?
        } else {
            integral_j(IntegralParams::j(bundle.eta_bar, 1.0, n, xi, order))?
        };
        hankel.push(v.value);
    }
    Ok(CMat::from_fn(n_s, n_s, |i, j| hankel[i + j]))
}

/// High-SNR K(ν): top rows σ_j^{i-1}, bottom rows σ_j^{ν+i-1}.
pub fn build_k_matrix(bundle: &CFMatrixBundle, nu: Complex64) -> CMat {
    let (n_s, n_l) = (bundle.n_s, bundle.n_l);
    CMat::from_fn(n_l, n_l, |i, j| {
        let s = bundle.sigma_large[j];
        if i < n_l - n_s {
            Complex64::new(libm::pow(s, i as f64), 0.0)
        } else {
            ((nu + i as f64) * libm::log(s)).exp()
        }
    })
}

/// φ(ν) straight from the source determinant formulas (Λ with K_cor, Ω with
/// K_iid, K with the high-SNR prefactor). Loses accuracy when eigenvalues
/// cluster; intended for cross-checks.
pub fn evaluate_direct(bundle: &CFMatrixBundle, nu: Complex64, log_shift: f64) -> Result<Complex64> {
    match bundle.kind {
        CfKind::Correlated => {
            let ld = log_det(&build_lambda_matrix(bundle, nu)?)?;
            Ok((ln_upsilon(bundle.n_s, nu) + Complex64::new(ld.ln_abs - bundle.ln_norm, ld.arg)).exp())
        }
        CfKind::Iid => {
            let ld = log_det(&build_omega_matrix(bundle, nu, 0)?)?;
            Ok(Complex64::new(ld.ln_abs - bundle.ln_norm, ld.arg).exp())
        }
        CfKind::HighSnr => {
            let ld = log_det(&build_k_matrix(bundle, nu))?;
            let mut s = nu * log_shift + Complex64::new(ld.ln_abs - bundle.ln_norm, ld.arg);
            for l in 1..=bundle.n_s {
                s += ln_gamma_complex(nu + l as f64);
            }
            Ok(s.exp())
        }
    }
}
