//! Command bodies. Each returns the text the binary prints.

use std::path::Path;

use mimo_capacity::cf::CapacityCf;
use mimo_capacity::cumulants::{cumulants_high_snr, cumulants_of, CumulantSet};
use mimo_capacity::distribution::{invert_cf, DistributionGrid, InversionMethod, InversionSpec};
use mimo_capacity::model::{ValidationOptions, Warning};
use mimo_capacity::montecarlo::{compare_report, empirical_statistics, ComparisonReport, EmpiricalStats, SimulationSpec};
use serde::Serialize;

use crate::corrmat::write_corrmat;
use crate::error::{CliError, Result};
use crate::par::{sample_capacity, Rayon};
use crate::scenario::{CorrelationSource, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputOpts {
    pub format: Format,
    /// Report capacities in bits/s/Hz instead of nats/s/Hz.
    pub bits: bool,
}

impl OutputOpts {
    /// Multiplier from nats to the output unit.
    pub fn unit(&self) -> f64 {
        if self.bits {
            std::f64::consts::LOG2_E
        } else {
            1.0
        }
    }

    pub fn unit_name(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn json_of<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn emit<T: Serialize>(rows: &[T], out: &OutputOpts) -> Result<String> {
    match out.format {
        Format::Csv => csv_of(rows),
        Format::Json => json_of(&rows),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w:?}");
    }
}

// ---------------------------------------------------------------- stats

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub engine: &'static str,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis_excess: f64,
}

impl StatsRow {
    /// κ_n scales with the n-th power of the unit; shape statistics do not.
    pub fn from_set(engine: &'static str, c: &CumulantSet, unit: f64) -> StatsRow {
        let k = |i: usize| c.kappa[i] * unit.powi(i as i32 + 1);
        StatsRow {
            engine,
            kappa1: k(0),
            kappa2: k(1),
            kappa3: k(2),
            kappa4: k(3),
            mean: c.raw_moments[0] * unit,
            variance: c.central_moments[1] * unit * unit,
            skewness: c.skewness.unwrap_or(f64::NAN),
            kurtosis_excess: c.kurtosis_excess.unwrap_or(f64::NAN),
        }
    }
}

/// Exact cumulants (κ₁..κ₄) and, with `high_snr`, the asymptotic ones.
pub fn stats_rows(sc: &Scenario, high_snr: bool, unit: f64) -> Result<Vec<StatsRow>> {
    let cf = sc.exact_cf()?;
    report_warnings(&cf.warnings);
    let exact = cumulants_of(&cf, 4)?;
    let mut rows = vec![StatsRow::from_set("exact", &exact, unit)];
    if high_snr {
        rows.push(StatsRow::from_set("high_snr", &cumulants_high_snr(&sc.config, &sc.pair, 4)?, unit));
    }
    Ok(rows)
}

pub fn cmd_stats(sc: &Scenario, high_snr: bool, out: &OutputOpts) -> Result<String> {
    report_warnings(&sc.pair.warnings);
    emit(&stats_rows(sc, high_snr, out.unit())?, out)
}

// ---------------------------------------------------------------- dist

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DistOptions {
    pub points: Option<usize>,
    pub omega_max: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub gil_pelaez: bool,
}

/// Inversion settings: window from the exact κ₁, κ₂ unless overridden.
///
/// With a single antenna on both sides the density jumps at zero and its CF
/// decays only like 1/ω, so the default truncation is fixed at 256/√κ₂ and
/// the modulus there is allowed up to 1e-2.
pub fn inversion_spec(cf: &CapacityCf, opts: &DistOptions) -> Result<InversionSpec> {
    let k = cumulants_of(cf, 2)?;
    let (k1, k2) = (k.kappa[0], k.kappa[1]);
    let mut spec = InversionSpec::auto(k1, k2);
    if cf.bundle.n_l == 1 {
        spec.omega_max = Some(256.0 / k2.sqrt());
        spec.truncation_tol = 1e-2;
    }
    if let Some(n) = opts.points {
        spec.n_points = n;
    }
    if opts.omega_max.is_some() {
        spec.omega_max = opts.omega_max;
    }
    if let Some(v) = opts.c_min {
        spec.c_min = v;
    }
    if let Some(v) = opts.c_max {
        spec.c_max = v;
    }
    if opts.gil_pelaez {
        spec.method = InversionMethod::GilPelaez;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn distribution(sc: &Scenario, opts: &DistOptions) -> Result<DistributionGrid> {
    let cf = sc.exact_cf()?;
    report_warnings(&cf.warnings);
    let spec = inversion_spec(&cf, opts)?;
    Ok(invert_cf(&cf, &spec, &Rayon)?)
}

#[derive(Serialize)]
struct GridRow {
    capacity: f64,
    pdf: f64,
    cdf: f64,
}

#[derive(Serialize)]
struct OutageRow {
    q: f64,
    outage_capacity: f64,
    unit: &'static str,
}

pub fn grid_csv(grid: &DistributionGrid, out: &OutputOpts) -> Result<String> {
    let u = out.unit();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([format!("capacity_{}", out.unit_name()).as_str(), "pdf", "cdf"])?;
    for ((x, p), c) in grid.capacity_axis.iter().zip(&grid.pdf).zip(&grid.cdf) {
        w.write_record([(x * u).to_string(), (p / u).to_string(), c.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Grid as CSV (or JSON), or the outage capacity when `outage` is given.
pub fn cmd_dist(sc: &Scenario, opts: &DistOptions, outage: Option<f64>, out: &OutputOpts) -> Result<String> {
    if let Some(q) = outage {
        if !(q > 0.0 && q < 1.0) {
            return Err(CliError::Usage(format!("--outage {q} must lie strictly between 0 and 1")));
        }
    }
    report_warnings(&sc.pair.warnings);
    let grid = distribution(sc, opts)?;
    match outage {
        Some(q) => {
            let row = OutageRow { q, outage_capacity: grid.outage_capacity(q)? * out.unit(), unit: out.unit_name() };
            emit(&[row], out)
        }
        None => match out.format {
            Format::Csv => grid_csv(&grid, out),
            Format::Json => {
                let u = out.unit();
                let rows: Vec<GridRow> = grid
                    .capacity_axis
                    .iter()
                    .zip(&grid.pdf)
                    .zip(&grid.cdf)
                    .map(|((x, p), c)| GridRow { capacity: x * u, pdf: p / u, cdf: *c })
                    .collect();
                json_of(&rows)
            }
        },
    }
}

// ---------------------------------------------------------------- sim

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_db: f64,
    pub correlation: String,
    pub seed: u64,
    pub trials: u64,
    pub unit: &'static str,
    pub stats: EmpiricalStats,
    pub compare: Option<ComparisonReport>,
}

fn scale_stats(mut s: EmpiricalStats, u: f64) -> EmpiricalStats {
    s.mean *= u;
    s.se_mean *= u;
    s.variance *= u * u;
    s.se_variance *= u * u;
    if let Some(h) = s.histogram.as_mut() {
        h.edges.iter_mut().for_each(|e| *e *= u);
        h.density.iter_mut().for_each(|d| *d /= u);
    }
    s
}

pub fn simulate(sc: &Scenario, trials: u64, seed: u64, compare: bool, unit: f64, unit_name: &'static str) -> Result<(SimReport, Vec<f64>)> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let spec = SimulationSpec::new(trials, seed);
    let samples = sample_capacity(&sc.config, &sc.pair, &spec)?;
    let stats = empirical_statistics(&samples)?;
    let compare = if compare {
        let cf = sc.exact_cf()?;
        let cum = cumulants_of(&cf, 4)?;
        let grid = invert_cf(&cf, &inversion_spec(&cf, &DistOptions::default())?, &Rayon)?;
        Some(compare_report(&samples, &cum, Some(&grid))?)
    } else {
        None
    };
    let report = SimReport {
        n_t: sc.config.n_t,
        n_r: sc.config.n_r,
        snr_db: sc.config.snr_db,
        correlation: sc.source.label(),
        seed,
        trials,
        unit: unit_name,
        stats: scale_stats(stats, unit),
        compare,
    };
    Ok((report, samples))
}

pub fn samples_csv(samples: &[f64], out: &OutputOpts) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trial", format!("capacity_{}", out.unit_name()).as_str()])?;
    for (i, c) in samples.iter().enumerate() {
        w.write_record([i.to_string(), (c * out.unit()).to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

#[derive(Serialize)]
struct SimCsvRow {
    correlation: String,
    seed: u64,
    trials: u64,
    mean: f64,
    variance: f64,
    skewness: Option<f64>,
    kurtosis_excess: Option<f64>,
    se_mean: f64,
    se_variance: f64,
    z_mean: Option<f64>,
    z_variance: Option<f64>,
    z_skewness: Option<f64>,
    z_kurtosis: Option<f64>,
    ks_distance: Option<f64>,
}

pub fn sim_output(reports: &[SimReport], out: &OutputOpts) -> Result<String> {
    match out.format {
        Format::Json if reports.len() == 1 => json_of(&reports[0]),
        Format::Json => json_of(&reports),
        Format::Csv => {
            let rows: Vec<SimCsvRow> = reports
                .iter()
                .map(|r| SimCsvRow {
                    correlation: r.correlation.clone(),
                    seed: r.seed,
                    trials: r.trials,
                    mean: r.stats.mean,
                    variance: r.stats.variance,
                    skewness: r.stats.skewness,
                    kurtosis_excess: r.stats.kurtosis_excess,
                    se_mean: r.stats.se_mean,
                    se_variance: r.stats.se_variance,
                    z_mean: r.compare.map(|c| c.z_mean),
                    z_variance: r.compare.map(|c| c.z_variance),
                    z_skewness: r.compare.and_then(|c| c.z_skewness),
                    z_kurtosis: r.compare.and_then(|c| c.z_kurtosis),
                    ks_distance: r.compare.and_then(|c| c.ks_distance),
                })
                .collect();
            csv_of(&rows)
        }
    }
}

// ---------------------------------------------------------------- sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Snr,
    Rho,
    Antennas,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr_db",
            SweepAxis::Rho => "rho",
            SweepAxis::Antennas => "antennas",
        }
    }
}

/// What a sweep varies around.
#[derive(Clone, Debug)]
pub struct SweepBase {
    pub n_t: Option<usize>,
    pub n_r: Option<usize>,
    pub snr_db: f64,
    pub source: CorrelationSource,
}

#[derive(Serialize)]
struct SweepRow {
    axis: &'static str,
    value: f64,
    engine: &'static str,
    statistic: &'static str,
    estimate: f64,
}

pub fn sweep_scenario(base: &SweepBase, axis: SweepAxis, v: f64, opts: &ValidationOptions) -> Result<Scenario> {
    match axis {
        SweepAxis::Snr => Scenario::build(base.n_t, base.n_r, v, base.source.clone(), opts),
        SweepAxis::Rho => Scenario::build(base.n_t, base.n_r, base.snr_db, CorrelationSource::Exponential { rho_t: v, rho_r: v }, opts),
        SweepAxis::Antennas => {
            if v < 1.0 || v.fract() != 0.0 {
                return Err(CliError::Usage(format!("antenna count {v} is not a positive integer")));
            }
            if matches!(base.source, CorrelationSource::File { .. }) {
                return Err(CliError::Usage("an antennas sweep cannot use a correlation file".into()));
            }
            let n = v as usize;
            Scenario::build(Some(n), Some(n), base.snr_db, base.source.clone(), opts)
        }
    }
}

/// Long format: one row per point, engine and statistic.
pub fn cmd_sweep(base: &SweepBase, axis: SweepAxis, values: &[f64], high_snr: bool, opts: &ValidationOptions, out: &OutputOpts) -> Result<String> {
    if values.is_empty() {
        return Err(CliError::Usage("a sweep needs at least one point".into()));
    }
    let mut rows = Vec::new();
    for &v in values {
        let sc = sweep_scenario(base, axis, v, opts)?;
        for r in stats_rows(&sc, high_snr, out.unit())? {
            let stats = [
                ("kappa1", r.kappa1),
                ("kappa2", r.kappa2),
                ("kappa3", r.kappa3),
                ("kappa4", r.kappa4),
                ("mean", r.mean),
                ("variance", r.variance),
                ("skewness", r.skewness),
                ("kurtosis_excess", r.kurtosis_excess),
            ];
            for (statistic, estimate) in stats {
                rows.push(SweepRow { axis: axis.name(), value: v, engine: r.engine, statistic, estimate });
            }
        }
    }
    emit(&rows, out)
}

// ---------------------------------------------------------------- validate-corr

#[derive(Clone, Debug, Serialize)]
pub struct CorrReport {
    pub n_t: usize,
    pub n_r: usize,
    pub transmit_spectrum: Vec<f64>,
    pub receive_spectrum: Vec<f64>,
    pub min_rel_gap_small: f64,
    pub min_rel_gap_large: f64,
    pub degenerate: bool,
    pub regularized: bool,
    pub epsilon_used: f64,
    pub warnings: Vec<Warning>,
}

pub fn corr_report(sc: &Scenario, gap_threshold: f64) -> CorrReport {
    let p = &sc.pair;
    CorrReport {
        n_t: sc.config.n_t,
        n_r: sc.config.n_r,
        transmit_spectrum: p.transmit_spectrum().to_vec(),
        receive_spectrum: p.receive_spectrum().to_vec(),
        min_rel_gap_small: p.report.min_rel_gap_small,
        min_rel_gap_large: p.report.min_rel_gap_large,
        degenerate: p.report.regularized || p.is_degenerate(gap_threshold),
        regularized: p.report.regularized,
        epsilon_used: p.report.epsilon_used,
        warnings: p.warnings.clone(),
    }
}

/// Validation report; `write` stores the matrices in CORRMAT form.
pub fn cmd_validate_corr(sc: &Scenario, gap_threshold: f64, write: Option<&Path>) -> Result<String> {
    if let Some(path) = write {
        write_file(path, &write_corrmat(&sc.pair.psi_t, &sc.pair.psi_r))?;
    }
    json_of(&corr_report(sc, gap_threshold))
}
