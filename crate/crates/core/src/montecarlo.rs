//! Monte Carlo reference for the capacity law.
//!
//! Trials are split into fixed-size shards; shard `s` draws from a ChaCha20
//! stream `s` of the seed, so results do not depend on how shards are
//! scheduled across threads.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cumulants::CumulantSet;
use crate::distribution::DistributionGrid;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_sqrt, CMat};
use crate::model::{ChannelConfig, CorrelationPair};

pub const DEFAULT_SHARD_SIZE: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationSpec {
    pub trials: u64,
    pub seed: u64,
    pub shard_size: u64,
}

impl SimulationSpec {
    pub fn new(trials: u64, seed: u64) -> SimulationSpec {
        SimulationSpec { trials, seed, shard_size: DEFAULT_SHARD_SIZE }
    }

    pub fn shard_count(&self) -> u64 {
        self.trials.div_ceil(self.shard_size.max(1))
    }

    /// Number of trials in shard `s`.
    pub fn shard_len(&self, s: u64) -> u64 {
        let size = self.shard_size.max(1);
        self.trials.saturating_sub(s * size).min(size)
    }
}

/// Draws `H = Ψ_R^{1/2} H_w Ψ_T^{1/2}` (n_R × n_T, H_w i.i.d. CN(0,1)) and
/// evaluates `ln det(I + η̄ H H^H)`.
#[derive(Clone, Debug)]
pub struct ChannelSampler {
    config: ChannelConfig,
    sqrt_t: CMat,
    sqrt_r: CMat,
}

impl ChannelSampler {
    pub fn new(config: &ChannelConfig, pair: &CorrelationPair) -> Result<ChannelSampler> {
        if pair.psi_t.rows() != config.n_t || pair.psi_r.rows() != config.n_r {
            return Err(Error::DimensionMismatch { expected: config.n_t, found: pair.psi_t.rows() });
        }
        Ok(ChannelSampler { config: *config, sqrt_t: hermitian_sqrt(&pair.psi_t)?, sqrt_r: hermitian_sqrt(&pair.psi_r)? })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn draw_channel<R: RngCore>(&self, rng: &mut R) -> CMat {
        let mut gauss = GaussianPairs;
        let hw = CMat::from_fn(self.config.n_r, self.config.n_t, |_, _| gauss.next(rng));
        self.sqrt_r.matmul(&hw).matmul(&self.sqrt_t)
    }

    /// Gram matrix of the smaller side: H H^H if n_R ≤ n_T, else H^H H.
    fn gram(&self, h: &CMat) -> CMat {
        if self.config.n_r <= self.config.n_t {
            h.matmul(&h.adjoint())
        } else {
            h.adjoint().matmul(h)
        }
    }

    /// Capacity by Cholesky factorisation of I + η̄ G.
    pub fn capacity_by_det(&self, h: &CMat) -> Result<f64> {
        let mut a = self.gram(h).scale(Complex64::new(self.config.eta_bar, 0.0));
        for i in 0..a.rows() {
            a[(i, i)] += 1.0;
        }
        cholesky_log_det(&a)
    }

    /// Capacity from the eigenvalues of G.
    pub fn capacity_by_eigen(&self, h: &CMat) -> Result<f64> {
        let ev = hermitian_eigenvalues(&self.gram(h))?;
        Ok(ev.iter().map(|&m| libm::log1p(self.config.eta_bar * m.max(0.0))).sum())
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Result<f64> {
        let h = self.draw_channel(rng);
        self.capacity_by_eigen(&h)
    }

    /// Capacities of one shard.
    pub fn shard(&self, spec: &SimulationSpec, s: u64) -> Result<Vec<f64>> {
        let mut rng = shard_rng(spec.seed, s);
        (0..spec.shard_len(s)).map(|_| self.sample(&mut rng)).collect()
    }
}

pub fn shard_rng(seed: u64, shard: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Box-Muller standard complex normals (each part has variance 1/2).
#[derive(Default)]
struct GaussianPairs;

impl GaussianPairs {
    fn next<R: RngCore>(&mut self, rng: &mut R) -> Complex64 {
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0);
        let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        let r = libm::sqrt(-libm::log(u1));
        Complex64::from_polar(r, 2.0 * core::f64::consts::PI * u2)
    }
}

/// ln det of a Hermitian positive definite matrix.
pub fn cholesky_log_det(a: &CMat) -> Result<f64> {
    let n = a.rows();
    let mut l = CMat::zeros(n, n);
    let mut acc = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: d });
        }
        let djj = libm::sqrt(d);
        l[(j, j)] = Complex64::new(djj, 0.0);
        acc += libm::log(d);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(acc)
}

/// All trials, shard by shard.
pub fn sample_capacity(config: &ChannelConfig, pair: &CorrelationPair, spec: &SimulationSpec) -> Result<Vec<f64>> {
    let sampler = ChannelSampler::new(config, pair)?;
    let mut out = Vec::with_capacity(spec.trials as usize);
    for s in 0..spec.shard_count() {
        out.extend(sampler.shard(spec, s)?);
    }
    Ok(out)
}

/// Running central moments up to order four; shards merge exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentAccumulator {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let t1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += t1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += t1;
    }

    pub fn merge(&self, o: &MomentAccumulator) -> MomentAccumulator {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3 + o.m3 + d * d2 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        MomentAccumulator { n: self.n + o.n, mean: self.mean + d * nb / n, m2, m3, m4 }
    }

    pub fn from_samples(xs: &[f64]) -> MomentAccumulator {
        let mut a = MomentAccumulator::default();
        for &x in xs {
            a.push(x);
        }
        a
    }

    /// Statistics without a histogram. Skewness needs three samples and a
    /// nonzero spread, kurtosis four; otherwise they are `None`.
    pub fn stats(&self) -> Result<EmpiricalStats> {
        if self.n < 2 {
            return Err(Error::Domain("need at least two samples"));
        }
        let n = self.n as f64;
        let mu2 = self.m2 / n;
        let mu3 = self.m3 / n;
        let mu4 = self.m4 / n;
        let variance = self.m2 / (n - 1.0);
        let spread = mu2 > 0.0;
        let se_var2 = (mu4 - mu2 * mu2 * (n - 3.0) / (n - 1.0)) / n;
        Ok(EmpiricalStats {
            n: self.n,
            mean: self.mean,
            variance,
            skewness: (self.n >= 3 && spread).then(|| mu3 / libm::pow(mu2, 1.5)),
            kurtosis_excess: (self.n >= 4 && spread).then(|| mu4 / (mu2 * mu2) - 3.0),
            se_mean: libm::sqrt(variance / n),
            se_variance: libm::sqrt(se_var2.max(0.0)),
            se_skewness: libm::sqrt(6.0 / n),
            se_kurtosis: libm::sqrt(24.0 / n),
            histogram: None,
            samples_retained: 0,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalStats {
    pub n: u64,
    pub mean: f64,
    /// Unbiased.
    pub variance: f64,
    pub skewness: Option<f64>,
    pub kurtosis_excess: Option<f64>,
    pub se_mean: f64,
    pub se_variance: f64,
    /// Normal-theory values √(6/n), √(24/n).
    pub se_skewness: f64,
    pub se_kurtosis: f64,
    pub histogram: Option<Histogram>,
    pub samples_retained: u64,
}

pub const DEFAULT_BINS: usize = 64;

/// Moments plus a [`DEFAULT_BINS`]-bin histogram over the sample range.
pub fn empirical_statistics(samples: &[f64]) -> Result<EmpiricalStats> {
    let mut st = MomentAccumulator::from_samples(samples).stats()?;
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // widen so the maximum falls inside the last bin
    let pad = ((hi - lo) * 1e-9).max(1e-12);
    st.histogram = Some(histogram(samples, lo, hi + pad, DEFAULT_BINS)?);
    st.samples_retained = samples.len() as u64;
    Ok(st)
}

/// (1/N) Σ e^{jωC}.
pub fn empirical_cf(samples: &[f64], omegas: &[f64]) -> Vec<Complex64> {
    let n = samples.len().max(1) as f64;
    omegas
        .iter()
        .map(|&w| samples.iter().map(|&c| Complex64::from_polar(1.0, w * c)).sum::<Complex64>() / n)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Counts normalised to a density over all samples.
    pub density: Vec<f64>,
    pub below: u64,
    pub above: u64,
}

pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    if !(lo < hi) || bins == 0 {
        return Err(Error::Domain("histogram needs lo < hi and at least one bin"));
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let (mut below, mut above) = (0, 0);
    for &x in samples {
        if x < lo {
            below += 1;
        } else if x >= hi {
            above += 1;
        } else {
            counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    let n = samples.len().max(1) as f64;
    Ok(Histogram {
        edges: (0..=bins).map(|i| lo + i as f64 * w).collect(),
        density: counts.iter().map(|&c| c as f64 / (n * w)).collect(),
        counts,
        below,
        above,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonReport {
    pub z_mean: f64,
    pub z_variance: f64,
    pub z_skewness: Option<f64>,
    pub z_kurtosis: Option<f64>,
    /// sup |F_N - F| against the grid CDF, if a grid was supplied.
    pub ks_distance: Option<f64>,
}

impl ComparisonReport {
    /// Mean and variance within `k` standard errors.
    pub fn within(&self, k: f64) -> bool {
        self.z_mean.abs() <= k && self.z_variance.abs() <= k
    }
}

pub fn compare_report(samples: &[f64], analytic: &CumulantSet, grid: Option<&DistributionGrid>) -> Result<ComparisonReport> {
    let st = empirical_statistics(samples)?;
    let var = analytic.variance().ok_or(Error::Domain("analytic cumulants need order two"))?;
    let z = |emp: f64, th: f64, se: f64| (emp - th) / se;
    let ks_distance = match grid {
        Some(g) => {
            let mut sorted = samples.to_vec();
            sorted.sort_by(|a, b| a.total_cmp(b));
            Some(ks_distance(&sorted, g))
        }
        None => None,
    };
    Ok(ComparisonReport {
        z_mean: z(st.mean, analytic.mean(), st.se_mean),
        z_variance: z(st.variance, var, st.se_variance),
        z_skewness: analytic.skewness.zip(st.skewness).map(|(a, e)| z(e, a, st.se_skewness)),
        z_kurtosis: analytic.kurtosis_excess.zip(st.kurtosis_excess).map(|(a, e)| z(e, a, st.se_kurtosis)),
        ks_distance,
    })
}

/// Kolmogorov-Smirnov sup distance between sorted samples and the grid CDF
/// (linearly interpolated).
pub fn ks_distance(sorted: &[f64], grid: &DistributionGrid) -> f64 {
    let n = sorted.len() as f64;
    let x = &grid.capacity_axis;
    let f = &grid.cdf;
    let mut j = 0;
    let mut d = 0.0f64;
    for (i, &s) in sorted.iter().enumerate() {
        let fs = if s <= x[0] {
            0.0
        } else if s >= x[x.len() - 1] {
            1.0
        } else {
            while x[j + 1] < s {
                j += 1;
            }
            let t = (s - x[j]) / (x[j + 1] - x[j]);
            f[j] + t * (f[j + 1] - f[j])
        };
        d = d.max((fs - i as f64 / n).abs()).max(((i + 1) as f64 / n - fs).abs());
    }
    d
}

/// Largest deviation of the sample covariance of vec(H) from Ψ_Tᵀ ⊗ Ψ_R.
pub fn kronecker_covariance_check(sampler: &ChannelSampler, pair: &CorrelationPair, trials: u64, seed: u64) -> f64 {
    let (nr, nt) = (sampler.config.n_r, sampler.config.n_t);
    let dim = nr * nt;
    let mut cov = CMat::zeros(dim, dim);
    let mut rng = shard_rng(seed, 0);
    for _ in 0..trials {
        let h = sampler.draw_channel(&mut rng);
        // column-major vec
        let v: Vec<Complex64> = (0..dim).map(|k| h[(k % nr, k / nr)]).collect();
        for a in 0..dim {
            for b in 0..dim {
                cov[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    let inv = 1.0 / trials as f64;
    let expected = CMat::from_fn(dim, dim, |a, b| pair.psi_t[(b / nr, a / nr)] * pair.psi_r[(a % nr, b % nr)]);
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            worst = worst.max((cov[(a, b)] * inv - expected[(a, b)]).norm());
        }
    }
    worst
}
