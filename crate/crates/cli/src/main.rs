use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mimo_capacity::model::ValidationOptions;
use mimocap::commands::*;
use mimocap::scenario::{parse_range, CorrelationSource, Scenario};
use mimocap::{CliError, Result};

/// Capacity statistics of doubly correlated MIMO Rayleigh channels.
/// Capacities are in nats/s/Hz unless --bits is given.
#[derive(Parser, Debug)]
#[command(name = "mimocap", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Transmit antennas.
    #[arg(long, global = true)]
    nt: Option<usize>,
    /// Receive antennas.
    #[arg(long, global = true)]
    nr: Option<usize>,
    /// Average SNR in dB.
    #[arg(long = "snr-db", global = true, default_value_t = 15.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Uncorrelated antennas (the default).
    #[arg(long, global = true, conflicts_with_all = ["exp", "corr_file"])]
    iid: bool,
    /// Exponential correlation with coefficients RHO_T and RHO_R.
    #[arg(long, global = true, num_args = 2, value_names = ["RHO_T", "RHO_R"], conflicts_with = "corr_file")]
    exp: Option<Vec<f64>>,
    /// Correlation matrices in CORRMAT v1 format.
    #[arg(long = "corr-file", global = true, value_name = "PATH")]
    corr_file: Option<PathBuf>,
    /// Monte Carlo seed; a time-derived seed is used and reported when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    #[arg(long, global = true)]
    csv: bool,
    /// Report capacities in bits/s/Hz.
    #[arg(long, global = true)]
    bits: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cumulants, mean, variance, skewness and excess kurtosis.
    Stats {
        /// Add the high-SNR asymptotic statistics.
        #[arg(long = "high-snr")]
        high_snr: bool,
    },
    /// PDF/CDF grid by CF inversion, or an outage capacity.
    Dist {
        /// Print the q-outage capacity instead of the grid.
        #[arg(long, value_name = "Q")]
        outage: Option<f64>,
        /// Grid size (power of two, at least 256).
        #[arg(long)]
        points: Option<usize>,
        /// CF truncation frequency.
        #[arg(long = "omega-max")]
        omega_max: Option<f64>,
        #[arg(long = "c-min", allow_negative_numbers = true)]
        c_min: Option<f64>,
        #[arg(long = "c-max")]
        c_max: Option<f64>,
        /// CDF column by Gil-Pelaez quadrature instead of the Fourier series.
        #[arg(long = "gil-pelaez")]
        gil_pelaez: bool,
        /// Write the grid here instead of standard output.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Monte Carlo simulation.
    Sim {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Add z-scores and KS distance against the exact results.
        #[arg(long)]
        compare: bool,
        /// Repeat for exponential correlation rho = rho_T = rho_R over start:stop:count.
        #[arg(long = "sweep-rho", value_name = "RANGE")]
        sweep_rho: Option<String>,
        /// Export samples as CSV `trial,capacity_nats`.
        #[arg(long, value_name = "PATH")]
        samples: Option<PathBuf>,
    },
    /// Statistics along an SNR, correlation or antenna-count axis (long CSV).
    Sweep {
        #[arg(value_enum)]
        axis: Axis,
        /// start:stop[:count]; antennas default to every integer.
        range: String,
        #[arg(long = "high-snr")]
        high_snr: bool,
    },
    /// Check correlation matrices and report their spectra.
    ValidateCorr {
        /// Exit with status 3 if a spectrum is degenerate.
        #[arg(long)]
        strict: bool,
        /// Save the matrices in CORRMAT v1 format.
        #[arg(long, value_name = "PATH")]
        write: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Axis {
    Snr,
    Rho,
    Antennas,
}

impl Global {
    fn source(&self) -> Result<CorrelationSource> {
        if let Some(v) = &self.exp {
            return Ok(CorrelationSource::Exponential { rho_t: v[0], rho_r: v[1] });
        }
        if let Some(p) = &self.corr_file {
            return Ok(CorrelationSource::File { path: p.clone() });
        }
        Ok(CorrelationSource::Iid)
    }

    fn out(&self, default: Format) -> OutputOpts {
        let format = if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            default
        };
        OutputOpts { format, bits: self.bits }
    }

    fn scenario(&self, opts: &ValidationOptions) -> Result<Scenario> {
        Scenario::build(self.nt, self.nr, self.snr_db, self.source()?, opts)
    }
}

fn time_seed() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0)
}

fn run(cli: Cli) -> Result<String> {
    let g = &cli.global;
    let opts = ValidationOptions::default();
    match cli.command {
        Command::Stats { high_snr } => cmd_stats(&g.scenario(&opts)?, high_snr, &g.out(Format::Csv)),
        Command::Dist { outage, points, omega_max, c_min, c_max, gil_pelaez, output } => {
            let d = DistOptions { points, omega_max, c_min, c_max, gil_pelaez };
            let text = cmd_dist(&g.scenario(&opts)?, &d, outage, &g.out(Format::Csv))?;
            match output {
                Some(p) if outage.is_none() => {
                    write_file(&p, &text)?;
                    Ok(String::new())
                }
                _ => Ok(text),
            }
        }
        Command::Sim { trials, compare, sweep_rho, samples } => {
            let out = g.out(Format::Json);
            let seed = g.seed.unwrap_or_else(time_seed);
            let scenarios = match sweep_rho {
                Some(r) => parse_range(&r, None)?
                    .into_iter()
                    .map(|rho| Scenario::build(g.nt, g.nr, g.snr_db, CorrelationSource::Exponential { rho_t: rho, rho_r: rho }, &opts))
                    .collect::<Result<Vec<_>>>()?,
                None => vec![g.scenario(&opts)?],
            };
            if samples.is_some() && scenarios.len() > 1 {
                return Err(CliError::Usage("--samples cannot be combined with --sweep-rho".into()));
            }
            let mut reports = Vec::new();
            for sc in &scenarios {
                let (rep, xs) = simulate(sc, trials, seed, compare, out.unit(), out.unit_name())?;
                if let Some(p) = &samples {
                    write_file(p, &samples_csv(&xs, &out)?)?;
                }
                reports.push(rep);
            }
            sim_output(&reports, &out)
        }
        Command::Sweep { axis, range, high_snr } => {
            let axis = match axis {
                Axis::Snr => SweepAxis::Snr,
                Axis::Rho => SweepAxis::Rho,
                Axis::Antennas => SweepAxis::Antennas,
            };
            let default_count = if axis == SweepAxis::Antennas {
                let parts: Vec<&str> = range.split(':').collect();
                match (parts.first().and_then(|s| s.parse::<usize>().ok()), parts.get(1).and_then(|s| s.parse::<usize>().ok())) {
                    (Some(a), Some(b)) if b >= a => Some(b - a + 1),
                    _ => None,
                }
            } else {
                None
            };
            let values = parse_range(&range, default_count)?;
            let base = SweepBase { n_t: g.nt, n_r: g.nr, snr_db: g.snr_db, source: g.source()? };
            cmd_sweep(&base, axis, &values, high_snr, &opts, &g.out(Format::Csv))
        }
        Command::ValidateCorr { strict, write } => {
            let vopts = ValidationOptions { auto_regularize: false, ..opts };
            let sc = g.scenario(&vopts)?;
            let text = cmd_validate_corr(&sc, vopts.gap_threshold, write.as_deref())?;
            if strict && sc.pair.is_degenerate(vopts.gap_threshold) {
                print!("{text}");
                return Err(CliError::Engine(mimo_capacity::Error::Degenerate {
                    condition: 1.0 / sc.pair.report.min_rel_gap_small.min(sc.pair.report.min_rel_gap_large),
                }));
            }
            Ok(text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
