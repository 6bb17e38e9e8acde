//! Channel configuration, correlation matrices and their spectra.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat};

/// Antenna counts and SNR. `eta_bar = eta / n_t` is the per-antenna SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_db: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub n_s: usize,
    pub n_l: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Transmit,
    Receive,
}

impl ChannelConfig {
    pub fn new(n_t: usize, n_r: usize, snr_db: f64) -> Result<ChannelConfig> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::Domain("antenna counts must be positive"));
        }
        if !snr_db.is_finite() {
            return Err(Error::Domain("SNR must be finite"));
        }
        let eta = libm::pow(10.0, snr_db / 10.0);
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain("SNR out of range"));
        }
        Ok(ChannelConfig {
            n_t,
            n_r,
            snr_db,
            eta,
            eta_bar: eta / n_t as f64,
            n_s: n_t.min(n_r),
            n_l: n_t.max(n_r),
        })
    }

    /// Side holding the smaller antenna count (receive side on ties).
    pub fn small_side(&self) -> Side {
        if self.n_r <= self.n_t {
            Side::Receive
        } else {
            Side::Transmit
        }
    }

    /// Same channel with transmit and receive roles exchanged, keeping `eta_bar`.
    pub fn swapped(&self) -> ChannelConfig {
        ChannelConfig { n_t: self.n_r, n_r: self.n_t, ..*self }
    }
}

/// `[rho^{|i-j|}]`
pub fn make_exponential_correlation(n: usize, rho: f64) -> Result<CMat> {
    if n == 0 {
        return Err(Error::Domain("matrix size must be positive"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain("exponential correlation requires 0 <= rho < 1"));
    }
    Ok(CMat::from_real(n, n, |i, j| libm::pow(rho, i.abs_diff(j) as f64)))
}

/// How strictly to treat a correlation matrix whose diagonal is not all ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DiagonalPolicy {
    Strict,
    Warn,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationOptions {
    pub hermitian_tol: f64,
    pub diagonal_tol: f64,
    pub diagonal: DiagonalPolicy,
    /// Minimum relative eigenvalue gap below which a spectrum counts as degenerate.
    pub gap_threshold: f64,
    pub auto_regularize: bool,
    pub regularize_epsilon: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            hermitian_tol: 1e-12,
            diagonal_tol: 1e-12,
            diagonal: DiagonalPolicy::Strict,
            gap_threshold: 1e-9,
            auto_regularize: true,
            regularize_epsilon: 1e-6,
        }
    }
}

/// Non-fatal conditions noticed while preparing or evaluating a model.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Warning {
    NonUnitDiagonal { side: Side, max_deviation: f64 },
    Regularized { epsilon: f64, min_rel_gap: f64 },
    IllConditioned { condition: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumReport {
    pub min_rel_gap_small: f64,
    pub min_rel_gap_large: f64,
    pub regularized: bool,
    pub epsilon_used: f64,
}

/// Validated transmit/receive correlation matrices with sorted spectra.
#[derive(Clone, Debug)]
pub struct CorrelationPair {
    pub psi_t: CMat,
    pub psi_r: CMat,
    /// Ascending eigenvalues of the small-side matrix.
    pub lambda: Vec<f64>,
    /// Ascending eigenvalues of the large-side matrix.
    pub sigma: Vec<f64>,
    pub small_side: Side,
    pub report: SpectrumReport,
    pub warnings: Vec<Warning>,
    vec_t: CMat,
    vec_r: CMat,
    eig_t: Vec<f64>,
    eig_r: Vec<f64>,
}

impl CorrelationPair {
    pub fn psi_s(&self) -> &CMat {
        match self.small_side {
            Side::Receive => &self.psi_r,
            Side::Transmit => &self.psi_t,
        }
    }

    pub fn psi_l(&self) -> &CMat {
        match self.small_side {
            Side::Receive => &self.psi_t,
            Side::Transmit => &self.psi_r,
        }
    }

    pub fn is_degenerate(&self, threshold: f64) -> bool {
        self.report.min_rel_gap_small < threshold || self.report.min_rel_gap_large < threshold
    }

    /// ln det of the small-side matrix.
    pub fn ln_det_psi_s(&self) -> f64 {
        self.lambda.iter().map(|&l| libm::log(l)).sum()
    }

    /// Eigenvalues of the transmit matrix, ascending.
    pub fn transmit_spectrum(&self) -> &[f64] {
        &self.eig_t
    }

    pub fn receive_spectrum(&self) -> &[f64] {
        &self.eig_r
    }
}

/// Smallest `(b - a) / b` over adjacent ascending entries; infinite for fewer than two.
pub fn min_relative_gap(sorted: &[f64]) -> f64 {
    sorted
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[1].abs().max(w[0].abs()))
        .fold(f64::INFINITY, f64::min)
}

fn check_matrix(m: &CMat, n: usize, side: Side, opts: &ValidationOptions, warnings: &mut Vec<Warning>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.rows() });
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("correlation matrix has non-finite entries"));
    }
    let dev = m.hermitian_deviation();
    if dev > opts.hermitian_tol {
        return Err(Error::NotHermitian { max_deviation: dev });
    }
    let diag_dev = (0..n).map(|i| (m[(i, i)] - Complex64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
    if diag_dev > opts.diagonal_tol {
        match opts.diagonal {
            DiagonalPolicy::Strict => return Err(Error::NonUnitDiagonal { max_deviation: diag_dev }),
            DiagonalPolicy::Warn => warnings.push(Warning::NonUnitDiagonal { side, max_deviation: diag_dev }),
        }
    }
    Ok(())
}

fn decompose(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let e = hermitian_eigen(m)?;
    let min = e.values.first().copied().unwrap_or(0.0);
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok((e.values, e.vectors))
}

/// Validate both matrices and decompose them, with default options.
pub fn validate_and_decompose(psi_t: &CMat, psi_r: &CMat, config: &ChannelConfig) -> Result<CorrelationPair> {
    validate_and_decompose_with(psi_t, psi_r, config, &ValidationOptions { auto_regularize: false, ..Default::default() })
}

/// Validate, decompose and, when enabled and needed, regularize the spectra.
pub fn validate_and_decompose_with(
    psi_t: &CMat,
    psi_r: &CMat,
    config: &ChannelConfig,
    opts: &ValidationOptions,
) -> Result<CorrelationPair> {
    let mut warnings = Vec::new();
    check_matrix(psi_t, config.n_t, Side::Transmit, opts, &mut warnings)?;
    check_matrix(psi_r, config.n_r, Side::Receive, opts, &mut warnings)?;
    let (eig_t, vec_t) = decompose(psi_t)?;
    let (eig_r, vec_r) = decompose(psi_r)?;
    let small_side = config.small_side();
    let (lambda, sigma) = match small_side {
        Side::Receive => (eig_r.clone(), eig_t.clone()),
        Side::Transmit => (eig_t.clone(), eig_r.clone()),
    };
    let report = SpectrumReport {
        min_rel_gap_small: min_relative_gap(&lambda),
        min_rel_gap_large: min_relative_gap(&sigma),
        regularized: false,
        epsilon_used: 0.0,
    };
    let pair = CorrelationPair {
        psi_t: psi_t.clone(),
        psi_r: psi_r.clone(),
        lambda,
        sigma,
        small_side,
        report,
        warnings,
        vec_t,
        vec_r,
        eig_t,
        eig_r,
    };
    if opts.auto_regularize && pair.is_degenerate(opts.gap_threshold) {
        let min_gap = pair.report.min_rel_gap_small.min(pair.report.min_rel_gap_large);
        let (mut reg, report) = regularize_spectrum(&pair, opts.regularize_epsilon)?;
        reg.warnings.push(Warning::Regularized { epsilon: report.epsilon_used, min_rel_gap: min_gap });
        return Ok(reg);
    }
    Ok(pair)
}

/// Spread clusters of nearly equal eigenvalues (adjacent relative gap below
/// `epsilon`) symmetrically about the cluster mean over a total width
/// `epsilon * mean`. Each cluster keeps its sum, so traces are preserved.
pub fn spread_clusters(sorted: &[f64], epsilon: f64) -> (Vec<f64>, bool) {
    let mut out = sorted.to_vec();
    let mut changed = false;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && (sorted[end] - sorted[end - 1]) / sorted[end].abs().max(sorted[end - 1].abs()) < epsilon {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let mean = sorted[start..end].iter().sum::<f64>() / k as f64;
            for (i, v) in out[start..end].iter_mut().enumerate() {
                *v = mean + epsilon * mean * (i as f64 / (k - 1) as f64 - 0.5);
            }
            changed = true;
        }
        start = end;
    }
    (out, changed)
}

pub fn regularize_spectrum(pair: &CorrelationPair, epsilon: f64) -> Result<(CorrelationPair, SpectrumReport)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain("epsilon must be positive"));
    }
    let (eig_t, ch_t) = spread_clusters(&pair.eig_t, epsilon);
    let (eig_r, ch_r) = spread_clusters(&pair.eig_r, epsilon);
    let mut out = pair.clone();
    if !(ch_t || ch_r) {
        out.report.regularized = false;
        out.report.epsilon_used = 0.0;
        return Ok((out.clone(), out.report));
    }
    let rebuild = |vecs: &CMat, vals: &[f64]| {
        let n = vals.len();
        let mut m = CMat::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                let a = vecs[(i, k)] * vals[k];
                for j in 0..n {
                    m[(i, j)] += a * vecs[(j, k)].conj();
                }
            }
        }
        m
    };
    if ch_t {
        out.psi_t = rebuild(&pair.vec_t, &eig_t);
    }
    if ch_r {
        out.psi_r = rebuild(&pair.vec_r, &eig_r);
    }
    out.eig_t = eig_t;
    out.eig_r = eig_r;
    let (lambda, sigma) = match out.small_side {
        Side::Receive => (out.eig_r.clone(), out.eig_t.clone()),
        Side::Transmit => (out.eig_t.clone(), out.eig_r.clone()),
    };
    out.lambda = lambda;
    out.sigma = sigma;
    out.report = SpectrumReport {
        min_rel_gap_small: min_relative_gap(&out.lambda),
        min_rel_gap_large: min_relative_gap(&out.sigma),
        regularized: true,
        epsilon_used: epsilon,
    };
    Ok((out.clone(), out.report))
}

/// Pair of identity correlations (i.i.d. channel).
pub fn identity_pair(config: &ChannelConfig) -> Result<CorrelationPair> {
    validate_and_decompose(&CMat::identity(config.n_t), &CMat::identity(config.n_r), config)
}

/// Exponential correlations on both sides.
pub fn exponential_pair(config: &ChannelConfig, rho_t: f64, rho_r: f64, opts: &ValidationOptions) -> Result<CorrelationPair> {
    let t = make_exponential_correlation(config.n_t, rho_t)?;
    let r = make_exponential_correlation(config.n_r, rho_r)?;
    validate_and_decompose_with(&t, &r, config, opts)
}
