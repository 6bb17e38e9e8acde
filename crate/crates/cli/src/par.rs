//! Thread-parallel CF evaluation and Monte Carlo shards.

use mimo_capacity::distribution::{CharacteristicFunction, Evaluator};
use mimo_capacity::model::{ChannelConfig, CorrelationPair};
use mimo_capacity::montecarlo::{ChannelSampler, SimulationSpec};
use mimo_capacity::Result;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default)]
pub struct Rayon;

impl Evaluator for Rayon {
    fn evaluate(&self, cf: &dyn CharacteristicFunction, omegas: &[f64]) -> Result<Vec<Complex64>> {
        omegas.par_iter().map(|&w| cf.phi(w)).collect()
    }
}

/// Same samples, in the same order, as the sequential `sample_capacity`.
pub fn sample_capacity(config: &ChannelConfig, pair: &CorrelationPair, spec: &SimulationSpec) -> Result<Vec<f64>> {
    let sampler = ChannelSampler::new(config, pair)?;
    let shards: Vec<Vec<f64>> = (0..spec.shard_count()).into_par_iter().map(|s| sampler.shard(spec, s)).collect::<Result<_>>()?;
    Ok(shards.concat())
}
