//! Cumulants from polymatrix traces, and the moment/cumulant conversions.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cf::{build_lambda_derivative, build_lambda_matrix, CapacityCf, CfKind, CfOptions};
use crate::error::{Error, Result};
use crate::linalg::{lu, CMat};
use crate::model::{ChannelConfig, CorrelationPair};
use crate::special::gamma::{binomial, factorial};
use crate::special::polygamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BaseKind {
    Omega,
    Lambda,
    KHighSnr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CumulantSource {
    ExactCorr,
    ExactIid,
    HighSnr,
    MonteCarlo,
}

/// Polymatrices `R_[n](0) = R(0)^{-1} R^{(n)}(0)` and dimatrix derivatives
/// `R_[1]^{(n)}(0)`.
#[derive(Clone, Debug)]
pub struct PolymatrixSet {
    pub base_kind: BaseKind,
    pub poly: Vec<CMat>,
    pub dimatrix_derivs: Vec<CMat>,
}

impl PolymatrixSet {
    /// From `[R(0), R'(0), .., R^{(N)}(0)]`.
    pub fn from_derivatives(base_kind: BaseKind, derivs: &[CMat]) -> Result<PolymatrixSet> {
        if derivs.len() < 2 {
            return Err(Error::Domain("need at least the first derivative"));
        }
        let f = lu(&derivs[0])?;
        let n = derivs[0].rows();
        let mut poly = vec![CMat::identity(n)];
        for d in &derivs[1..] {
            poly.push(f.solve(d));
        }
        let max_order = poly.len() - 1;
        let mut dims: Vec<CMat> = Vec::with_capacity(max_order);
        for k in 1..=max_order {
            // R_[1]^{(k-1)} = R_[k] - Σ_{ℓ=1}^{k-1} C(k-1,ℓ-1) R_[k-ℓ] R_[1]^{(ℓ-1)}
            let mut d = poly[k].clone();
            for l in 1..k {
                let term = poly[k - l].matmul(&dims[l - 1]).scale(Complex64::new(binomial((k - 1) as u32, (l - 1) as u32), 0.0));
                d = &d - &term;
            }
            dims.push(d);
        }
        Ok(PolymatrixSet { base_kind, poly, dimatrix_derivs: dims })
    }

    pub fn max_order(&self) -> usize {
        self.dimatrix_derivs.len()
    }

    /// Largest entrywise residual of `R_[n] = Σ_{ℓ=1}^{n} C(n-1,ℓ-1) R_[n-ℓ] R_[1]^{(ℓ-1)}`.
    pub fn recursion_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 1..=self.max_order() {
            let mut s = CMat::zeros(self.poly[0].rows(), self.poly[0].cols());
            for l in 1..=n {
                let term = self.poly[n - l].matmul(&self.dimatrix_derivs[l - 1]).scale(Complex64::new(binomial((n - 1) as u32, (l - 1) as u32), 0.0));
                s = &s + &term;
            }
            let scale = self.poly[n].max_abs().max(1.0);
            worst = worst.max(s.max_abs_diff(&self.poly[n]) / scale);
        }
        worst
    }

    /// `tr R_[1]^{(n-1)}(0)` for n = 1..=N.
    pub fn traces(&self) -> Vec<f64> {
        self.dimatrix_derivs.iter().map(|d| d.trace().re).collect()
    }
}

/// Cumulants with derived moments and shape statistics.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CumulantSet {
    /// κ_1..κ_N
    pub kappa: Vec<f64>,
    /// m_1..m_N
    pub raw_moments: Vec<f64>,
    /// μ_1..μ_N (μ_1 = 0)
    pub central_moments: Vec<f64>,
    pub skewness: Option<f64>,
    pub kurtosis_excess: Option<f64>,
    pub source: CumulantSource,
}

impl CumulantSet {
    pub fn from_kappa(kappa: Vec<f64>, source: CumulantSource) -> Result<CumulantSet> {
        let (raw_moments, central_moments) = moments_from_cumulants(&kappa)?;
        let k2 = kappa.get(1).copied();
        let skewness = match (k2, kappa.get(2)) {
            (Some(k2), Some(k3)) if k2 > 0.0 => Some(k3 / libm::pow(k2, 1.5)),
            _ => None,
        };
        let kurtosis_excess = match (k2, kappa.get(3)) {
            (Some(k2), Some(k4)) if k2 > 0.0 => Some(k4 / (k2 * k2)),
            _ => None,
        };
        Ok(CumulantSet { kappa, raw_moments, central_moments, skewness, kurtosis_excess, source })
    }

    pub fn mean(&self) -> f64 {
        self.kappa[0]
    }

    pub fn variance(&self) -> Option<f64> {
        self.kappa.get(1).copied()
    }
}

/// Raw moments m_1..m_N and central moments μ_1..μ_N from κ_1..κ_N.
pub fn moments_from_cumulants(kappa: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if kappa.is_empty() {
        return Err(Error::Domain("need at least one cumulant"));
    }
    let n = kappa.len();
    // m[0] = 1
    let mut m = vec![1.0; n + 1];
    for k in 1..=n {
        m[k] = (1..=k).map(|l| binomial((k - 1) as u32, (l - 1) as u32) * m[k - l] * kappa[l - 1]).sum();
    }
    let m1 = m[1];
    let central: Vec<f64> = (1..=n)
        .map(|k| (0..=k).map(|l| binomial(k as u32, l as u32) * m[k - l] * libm::pow(-m1, l as f64)).sum())
        .collect();
    Ok((m[1..].to_vec(), central))
}

/// κ_1..κ_N from raw moments m_1..m_N.
pub fn cumulants_from_moments(raw: &[f64]) -> Vec<f64> {
    let n = raw.len();
    let mut m = vec![1.0];
    m.extend_from_slice(raw);
    let mut kappa: Vec<f64> = Vec::with_capacity(n);
    for k in 1..=n {
        let s: f64 = (1..k).map(|l| binomial((k - 1) as u32, (l - 1) as u32) * kappa[l - 1] * m[k - l]).sum();
        kappa.push(m[k] - s);
    }
    kappa
}

/// (-1)^n (n-1)! Σ_{ℓ=1}^{n_S-1} ℓ^{1-n}: n-th derivative of ln Υ at 0.
pub fn upsilon_cumulant(n_s: usize, n: usize) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let s: f64 = (1..n_s).map(|l| libm::pow(l as f64, 1.0 - n as f64)).sum();
    sign * factorial((n - 1) as u32) * s
}

/// Σ_{ℓ=1}^{n_S} ψ^{(n-1)}(ℓ)
pub fn polygamma_sum(n_s: usize, n: usize) -> Result<f64> {
    let mut s = 0.0;
    for l in 1..=n_s {
        s += polygamma((n - 1) as u32, l as u32)?;
    }
    Ok(s)
}

fn base_kind(kind: CfKind) -> BaseKind {
    match kind {
        CfKind::Correlated => BaseKind::Lambda,
        CfKind::Iid => BaseKind::Omega,
        CfKind::HighSnr => BaseKind::KHighSnr,
    }
}

/// Polymatrices of the matrix whose determinant the CF of `cf` evaluates.
pub fn polymatrices_of(cf: &CapacityCf, max_order: usize) -> Result<PolymatrixSet> {
    if max_order == 0 {
        return Err(Error::Domain("max_order must be at least 1"));
    }
    PolymatrixSet::from_derivatives(base_kind(cf.kind()), &cf.derivative_matrices(max_order)?)
}

pub fn compute_polymatrices(kind: CfKind, config: &ChannelConfig, pair: &CorrelationPair, max_order: usize) -> Result<PolymatrixSet> {
    let cf = match kind {
        CfKind::Correlated => CapacityCf::correlated(config, pair)?,
        CfKind::Iid => CapacityCf::iid(config)?,
        CfKind::HighSnr => CapacityCf::high_snr_with(config, pair, &CfOptions { gap_threshold: 0.0, ..Default::default() })?,
    };
    polymatrices_of(&cf, max_order)
}

/// Polymatrices of the literal Λ(ν) built from the G/J integrals. Accurate only
/// for well separated spectra; used for cross-checks.
pub fn lambda_polymatrices_literal(cf: &CapacityCf, max_order: usize) -> Result<PolymatrixSet> {
    let zero = Complex64::new(0.0, 0.0);
    let mut d = vec![build_lambda_matrix(&cf.bundle, zero)?];
    for n in 1..=max_order {
        d.push(build_lambda_derivative(&cf.bundle, zero, n as u32)?);
    }
    PolymatrixSet::from_derivatives(BaseKind::Lambda, &d)
}

/// Cumulants of a CF from its polymatrix traces.
pub fn cumulants_of(cf: &CapacityCf, max_order: usize) -> Result<CumulantSet> {
    let poly = polymatrices_of(cf, max_order)?;
    let traces = poly.traces();
    let n_s = cf.bundle.n_s;
    let mut kappa = Vec::with_capacity(max_order);
    for n in 1..=max_order {
        let mut k = traces[n - 1];
        if n == 1 {
            k += cf.log_shift();
        }
        match cf.kind() {
            CfKind::Correlated => k += upsilon_cumulant(n_s, n),
            CfKind::HighSnr => k += polygamma_sum(n_s, n)?,
            CfKind::Iid => {}
        }
        kappa.push(k);
    }
    let source = match cf.kind() {
        CfKind::Correlated => CumulantSource::ExactCorr,
        CfKind::Iid => CumulantSource::ExactIid,
        CfKind::HighSnr => CumulantSource::HighSnr,
    };
    CumulantSet::from_kappa(kappa, source)
}

pub fn cumulants_iid(config: &ChannelConfig, max_order: usize) -> Result<CumulantSet> {
    cumulants_of(&CapacityCf::iid(config)?, max_order)
}

pub fn cumulants_correlated(config: &ChannelConfig, pair: &CorrelationPair, max_order: usize) -> Result<CumulantSet> {
    cumulants_of(&CapacityCf::correlated(config, pair)?, max_order)
}

/// High-SNR cumulants. Square channels use the closed form
/// `κ_n = δ_{1n}[n_S ln η̄ + ln det(Ψ_T Ψ_R)] + Σ ψ^{(n-1)}(ℓ)`.
pub fn cumulants_high_snr(config: &ChannelConfig, pair: &CorrelationPair, max_order: usize) -> Result<CumulantSet> {
    if max_order == 0 {
        return Err(Error::Domain("max_order must be at least 1"));
    }
    if config.n_t == config.n_r {
        let n_s = config.n_s;
        let ln_det_l: f64 = pair.sigma.iter().map(|s| libm::log(*s)).sum();
        let mut kappa = Vec::with_capacity(max_order);
        for n in 1..=max_order {
            let mut k = polygamma_sum(n_s, n)?;
            if n == 1 {
                k += n_s as f64 * libm::log(config.eta_bar) + pair.ln_det_psi_s() + ln_det_l;
            }
            kappa.push(k);
        }
        return CumulantSet::from_kappa(kappa, CumulantSource::HighSnr);
    }
    let cf = CapacityCf::high_snr_with(config, pair, &CfOptions { gap_threshold: 0.0, ..Default::default() })?;
    cumulants_of(&cf, max_order)
}

/// κ_1..κ_4 by the explicit trace polynomials in the polymatrices
/// (mean, variance, and the skewness/kurtosis numerators), with `shift`
/// added to the mean.
pub fn table_cumulants(poly: &PolymatrixSet, n_s: usize, shift: f64) -> Result<[f64; 4]> {
    if poly.max_order() < 4 {
        return Err(Error::Domain("need polymatrices up to order 4"));
    }
    let p = &poly.poly;
    let tr = |m: CMat| m.trace().re;
    let mul = |a: &CMat, b: &CMat| a.matmul(b);
    let sc = |m: &CMat, s: f64| m.scale(Complex64::new(s, 0.0));
    let p11 = mul(&p[1], &p[1]);
    let s1: f64 = (1..n_s).map(|l| 1.0 / l as f64).sum();
    let s2: f64 = (1..n_s).map(|l| 1.0 / (l * l) as f64).sum();
    let s3: f64 = (1..n_s).map(|l| 1.0 / (l * l * l) as f64).sum();
    let m1 = tr(p[1].clone()) + shift - (n_s as f64 - 1.0);
    let mu2 = tr(&p[2] - &p11) + s1;
    let k3 = tr(&(&sc(&mul(&p11, &p[1]), 2.0) - &sc(&mul(&p[1], &p[2]), 3.0)) + &p[3]) - 2.0 * s2;
    let p1111 = mul(&p11, &p11);
    let k4 = tr(&(&(&(&sc(&p1111, -6.0) + &sc(&mul(&p11, &p[2]), 12.0)) - &sc(&mul(&p[2], &p[2]), 3.0)) - &sc(&mul(&p[1], &p[3]), 4.0)) + &p[4]) + 6.0 * s3;
    Ok([m1, mu2, k3, k4])
}
