//! PDF, CDF and quantiles of the capacity by inverting its characteristic function.
//!
//! The density is treated as supported on a window `[c_min, c_max]` of width
//! `L`, so it has a Fourier series with harmonics `ω_k = 2πk/L` whose
//! coefficients are CF samples. The PDF and CDF on an `N`-point grid come from
//! one FFT each. Point evaluations of the CDF use the Gil-Pelaez integral,
//! discretized by the trapezoid rule with step `π/L` (exact up to mass more
//! than `2L` away).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cf::CapacityCf;
use crate::error::{Error, Result};
use crate::fft::fft_forward;

/// Anything that can report `φ(jω) = E[e^{jωC}]`.
pub trait CharacteristicFunction: Sync {
    fn phi(&self, omega: f64) -> Result<Complex64>;
}

impl CharacteristicFunction for CapacityCf {
    fn phi(&self, omega: f64) -> Result<Complex64> {
        self.evaluate(omega)
    }
}

/// CF of a normal distribution.
#[derive(Clone, Copy, Debug)]
pub struct GaussianCf {
    pub mean: f64,
    pub variance: f64,
}

impl CharacteristicFunction for GaussianCf {
    fn phi(&self, omega: f64) -> Result<Complex64> {
        Ok(Complex64::new(-0.5 * self.variance * omega * omega, omega * self.mean).exp())
    }
}

/// Evaluates a CF on many frequencies; implementations may run in parallel.
pub trait Evaluator {
    fn evaluate(&self, cf: &dyn CharacteristicFunction, omegas: &[f64]) -> Result<Vec<Complex64>>;
}

/// Plain loop.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Evaluator for Sequential {
    fn evaluate(&self, cf: &dyn CharacteristicFunction, omegas: &[f64]) -> Result<Vec<Complex64>> {
        omegas.iter().map(|&w| cf.phi(w)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InversionMethod {
    FftGrid,
    GilPelaez,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InversionSpec {
    /// CF truncation; `None` picks the first frequency where |φ| < `decay_tol`.
    pub omega_max: Option<f64>,
    /// Grid intervals; a power of two, at least 256.
    pub n_points: usize,
    pub c_min: f64,
    pub c_max: f64,
    /// CDF column: Fourier series (`FftGrid`) or pointwise Gil-Pelaez.
    pub method: InversionMethod,
    /// Largest |φ| tolerated at the truncation frequency.
    pub truncation_tol: f64,
    pub decay_tol: f64,
    /// Largest probability mass tolerated outside the window.
    pub max_tail_mass: f64,
}

impl InversionSpec {
    /// Window κ₁ ± 8√κ₂, 4096 points, adaptive truncation. The window is not
    /// clipped at zero: a density that does not vanish at 0 would otherwise
    /// sit on the periodic seam.
    pub fn auto(kappa1: f64, kappa2: f64) -> InversionSpec {
        let sd = libm::sqrt(kappa2.max(0.0));
        InversionSpec {
            omega_max: None,
            n_points: 4096,
            c_min: kappa1 - 8.0 * sd,
            c_max: kappa1 + 8.0 * sd,
            method: InversionMethod::FftGrid,
            truncation_tol: 1e-6,
            decay_tol: 1e-8,
            max_tail_mass: 0.005,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_min < self.c_max) || !self.c_min.is_finite() || !self.c_max.is_finite() {
            return Err(Error::Domain("inversion window needs c_min < c_max"));
        }
        if self.n_points < 256 || !self.n_points.is_power_of_two() {
            return Err(Error::Domain("n_points must be a power of two, at least 256"));
        }
        if let Some(w) = self.omega_max {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain("omega_max must be positive"));
            }
        }
        Ok(())
    }
}

/// Mean and variance by central differences of ln φ at ±δ.
pub fn estimate_mean_variance(cf: &dyn CharacteristicFunction, delta: f64) -> Result<(f64, f64)> {
    let p = cf.phi(delta)?;
    let m = cf.phi(-delta)?;
    let mean = (p / m).ln().im / (2.0 * delta);
    let var = -(p * m).ln().re / (delta * delta);
    Ok((mean, var))
}

/// CF samples `φ(k h)` with `h = π / L`.
#[derive(Clone, Debug)]
struct Samples {
    h: f64,
    values: Vec<Complex64>,
    kappa1: f64,
}

impl Samples {
    /// Gil-Pelaez CDF, trapezoid rule with step h; the ω = 0 node uses the
    /// limit Im[φ(ω)e^{-jωx}]/ω → κ₁ - x.
    fn cdf(&self, x: f64) -> f64 {
        let h = self.h;
        let step = Complex64::from_polar(1.0, -h * x);
        let mut rot = step;
        let mut s = 0.5 * (self.kappa1 - x);
        for (k, v) in self.values.iter().enumerate().skip(1) {
            s += (v * rot).im / (k as f64 * h);
            rot *= step;
            if k % 64 == 0 {
                rot = Complex64::from_polar(1.0, -h * x * (k + 1) as f64);
            }
        }
        0.5 - h / core::f64::consts::PI * s
    }
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DistributionGrid {
    pub capacity_axis: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Spec as applied, with the truncation frequency filled in.
    pub spec: InversionSpec,
    /// Probability mass outside the window.
    pub tail_mass: f64,
    /// Most negative pre-clip PDF value relative to the PDF peak.
    pub ripple: f64,
    /// Largest downward step removed from the CDF column.
    pub cdf_monotone_fix: f64,
    /// |φ| at the truncation frequency.
    pub truncation_modulus: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    samples: Samples,
}

impl DistributionGrid {
    /// CDF at any point (Gil-Pelaez); independent of the grid size.
    pub fn cdf_at(&self, x: f64) -> f64 {
        self.samples.cdf(x)
    }

    pub fn outage_capacity(&self, q: f64) -> Result<f64> {
        outage_capacity(self, q)
    }
}

/// Invert a CF onto a capacity grid.
pub fn invert_cf(cf: &dyn CharacteristicFunction, spec: &InversionSpec, eval: &dyn Evaluator) -> Result<DistributionGrid> {
    spec.validate()?;
    let n = spec.n_points;
    let c0 = spec.c_min;
    let width = spec.c_max - spec.c_min;
    let h = core::f64::consts::PI / width;
    let d_omega = 2.0 * h;
    let k_cap = n - 1;

    let omega_cut = match spec.omega_max {
        Some(w) => w,
        None => {
            let cap = k_cap as f64 * d_omega;
            let mut w = d_omega;
            loop {
                if w >= cap {
                    break cap;
                }
                match cf.phi(w) {
                    Ok(v) if v.norm() < spec.decay_tol => break w,
                    Ok(_) => {}
                    // the CF cannot be evaluated this far out; keep what worked
                    Err(Error::NoConvergence(_)) if w > d_omega => break 0.5 * w,
                    Err(e) => return Err(e),
                }
                w *= 2.0;
            }
        }
    };
    let k_max = (libm::ceil(omega_cut / d_omega) as usize).clamp(1, k_cap);
    let omegas: Vec<f64> = (0..=2 * k_max).map(|k| k as f64 * h).collect();
    let mut values = eval.evaluate(cf, &omegas)?;
    values[0] = Complex64::new(1.0, 0.0);
    let last = values[2 * k_max].norm();
    if last > spec.truncation_tol {
        return Err(Error::Truncation { omega: omegas[2 * k_max], modulus: last });
    }
    let delta = 1e-4;
    let kappa1 = cf.phi(delta)?.arg() / delta;
    let samples = Samples { h, values, kappa1 };

    // PDF: f_m = Re Σ a_k e^{-2πikm/N} / L
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    a[0] = Complex64::new(1.0, 0.0);
    let mut b_sum = Complex64::new(0.0, 0.0);
    for k in 1..=k_max {
        let w = k as f64 * d_omega;
        let coef = samples.values[2 * k] * Complex64::from_polar(2.0, -w * c0);
        a[k] = coef;
        // ∫_{c0}^{x} e^{-jωt} dt = (e^{-jωx} - e^{-jωc0}) / (-jω)
        let bk = coef / Complex64::new(0.0, -w * width);
        b[k] = bk;
        b_sum += bk;
    }
    fft_forward(&mut a);
    fft_forward(&mut b);
    let dx = width / n as f64;
    let capacity_axis: Vec<f64> = (0..=n).map(|m| c0 + m as f64 * dx).collect();
    let mut pdf: Vec<f64> = (0..=n).map(|m| a[m % n].re / width).collect();
    let peak = pdf.iter().cloned().fold(0.0, f64::max);
    let min = pdf.iter().cloned().fold(0.0, f64::min);
    let ripple = if peak > 0.0 { -min / peak } else { 0.0 };
    for v in &mut pdf {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mut cdf: Vec<f64> = match spec.method {
        InversionMethod::FftGrid => (0..=n)
            .map(|m| if m == n { 1.0 } else { m as f64 / n as f64 + (b[m] - b_sum).re })
            .collect(),
        InversionMethod::GilPelaez => capacity_axis.iter().map(|&x| samples.cdf(x)).collect(),
    };
    let mut fix = 0.0f64;
    let mut run = f64::NEG_INFINITY;
    for v in &mut cdf {
        *v = v.clamp(0.0, 1.0);
        if *v < run {
            fix = fix.max(run - *v);
            *v = run;
        }
        run = *v;
    }
    let tail_mass = samples.cdf(spec.c_min).max(0.0) + (1.0 - samples.cdf(spec.c_max)).max(0.0);
    if tail_mass > spec.max_tail_mass {
        return Err(Error::Bracketing { mass_outside: tail_mass });
    }
    let mut applied = *spec;
    applied.omega_max = Some(k_max as f64 * d_omega);
    Ok(DistributionGrid {
        capacity_axis,
        pdf,
        cdf,
        spec: applied,
        tail_mass,
        ripple,
        cdf_monotone_fix: fix,
        truncation_modulus: last,
        samples,
    })
}

/// `inf{x : F(x) ≥ q}`: bracketed on the grid CDF, then bisected on the
/// Gil-Pelaez CDF to 1e-7 nats/s/Hz.
pub fn outage_capacity(grid: &DistributionGrid, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("outage probability must lie in (0, 1)"));
    }
    let n = grid.cdf.len();
    let lo_cdf = grid.cdf_at(grid.capacity_axis[0]);
    let hi_cdf = grid.cdf_at(grid.capacity_axis[n - 1]);
    if q <= lo_cdf || q >= hi_cdf {
        return Err(Error::Range { q });
    }
    let idx = grid.cdf.iter().position(|&c| c >= q).unwrap_or(n - 1).max(1);
    let mut lo = grid.capacity_axis[idx - 1];
    let mut hi = grid.capacity_axis[idx];
    // widen until the pointwise CDF brackets q
    let step = hi - lo;
    while grid.cdf_at(lo) > q && lo > grid.capacity_axis[0] {
        lo = (lo - step).max(grid.capacity_axis[0]);
    }
    while grid.cdf_at(hi) < q && hi < grid.capacity_axis[n - 1] {
        hi = (hi + step).min(grid.capacity_axis[n - 1]);
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if grid.cdf_at(mid) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Trapezoidal mean and variance of the grid PDF.
pub fn moments_from_grid(grid: &DistributionGrid) -> (f64, f64) {
    let x = &grid.capacity_axis;
    let f = &grid.pdf;
    let trap = |g: &dyn Fn(usize) -> f64| -> f64 { (1..x.len()).map(|i| 0.5 * (g(i) + g(i - 1)) * (x[i] - x[i - 1])).sum() };
    let mass = trap(&|i| f[i]);
    let mean = trap(&|i| x[i] * f[i]) / mass;
    let var = trap(&|i| (x[i] - mean) * (x[i] - mean) * f[i]) / mass;
    (mean, var)
}

/// Trapezoidal ∫ pdf over the grid.
pub fn grid_mass(grid: &DistributionGrid) -> f64 {
    let x = &grid.capacity_axis;
    (1..x.len()).map(|i| 0.5 * (grid.pdf[i] + grid.pdf[i - 1]) * (x[i] - x[i - 1])).sum()
}
