use std::path::{Path, PathBuf};

use mimo_capacity::cf::CapacityCf;
use mimo_capacity::linalg::CMat;
use mimo_capacity::model::{exponential_pair, identity_pair, validate_and_decompose_with, ChannelConfig, CorrelationPair, ValidationOptions};
use serde::Serialize;

use crate::corrmat::parse_corrmat;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationSource {
    Iid,
    Exponential { rho_t: f64, rho_r: f64 },
    File { path: PathBuf },
}

impl CorrelationSource {
    pub fn label(&self) -> String {
        match self {
            CorrelationSource::Iid => "iid".into(),
            CorrelationSource::Exponential { rho_t, rho_r } => format!("exp({rho_t},{rho_r})"),
            CorrelationSource::File { path } => format!("file({})", path.display()),
        }
    }
}

/// A fully resolved channel: sizes, SNR and validated correlations.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ChannelConfig,
    pub source: CorrelationSource,
    pub pair: CorrelationPair,
}

pub fn read_corr_file(path: &Path) -> Result<(CMat, CMat)> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_corrmat(&text).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

impl Scenario {
    /// `n_t`/`n_r` may be omitted for a file source, whose header fixes them.
    pub fn build(n_t: Option<usize>, n_r: Option<usize>, snr_db: f64, source: CorrelationSource, opts: &ValidationOptions) -> Result<Scenario> {
        let file = match &source {
            CorrelationSource::File { path } => Some(read_corr_file(path)?),
            _ => None,
        };
        let size = |given: Option<usize>, from_file: Option<usize>, flag: &str| -> Result<usize> {
            match (given, from_file) {
                (Some(g), Some(f)) if g != f => Err(CliError::Usage(format!("{flag} {g} disagrees with the correlation file ({f})"))),
                (Some(g), _) => Ok(g),
                (None, Some(f)) => Ok(f),
                (None, None) => Err(CliError::Usage(format!("{flag} is required"))),
            }
        };
        let n_t = size(n_t, file.as_ref().map(|f| f.0.rows()), "--nt")?;
        let n_r = size(n_r, file.as_ref().map(|f| f.1.rows()), "--nr")?;
        if n_t == 0 || n_r == 0 {
            return Err(CliError::Usage("antenna counts must be positive".into()));
        }
        let config = ChannelConfig::new(n_t, n_r, snr_db)?;
        let pair = match (&source, file) {
            (CorrelationSource::Iid, _) => identity_pair(&config)?,
            (CorrelationSource::Exponential { rho_t, rho_r }, _) => exponential_pair(&config, *rho_t, *rho_r, opts)?,
            (CorrelationSource::File { .. }, Some((t, r))) => validate_and_decompose_with(&t, &r, &config, opts)?,
            (CorrelationSource::File { .. }, None) => unreachable!("file source always reads a file"),
        };
        Ok(Scenario { config, source, pair })
    }

    /// Both correlation matrices are exactly the identity.
    pub fn is_iid(&self) -> bool {
        let id = |m: &CMat| m.max_abs_diff(&CMat::identity(m.rows())) == 0.0;
        id(&self.pair.psi_t) && id(&self.pair.psi_r)
    }

    /// The exact CF: the i.i.d. form for identity correlations, otherwise the
    /// correlated form.
    pub fn exact_cf(&self) -> Result<CapacityCf> {
        Ok(if self.is_iid() { CapacityCf::iid(&self.config)? } else { CapacityCf::correlated(&self.config, &self.pair)? })
    }
}

/// `start:stop[:count]`; `count` defaults to `default_count`.
pub fn parse_range(s: &str, default_count: Option<usize>) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("bad range `{s}`, expected start:stop[:count]"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count = match parts.get(2) {
        Some(c) => c.parse::<usize>().map_err(|_| bad())?,
        None => default_count.ok_or_else(bad)?,
    };
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Usage(format!("range `{s}` needs at least one finite point")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect())
}
