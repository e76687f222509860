//! Monte Carlo estimators over random lattices.
//!
//! Every estimator draws lattice `i` from `stream.sample_rng(i)`, evaluates
//! its per-lattice statistic on the rayon pool, and reduces the results in
//! index order. The answer is therefore the same for any number of threads.

mod counts;
mod gamma;
mod width;

pub use counts::{cap_avoidance_probability, expected_lattice_count};
pub use gamma::gamma_polytope;
pub use width::{
    area_difference, reference_mean_width, width_difference_cap_integral, width_difference_direct,
    DEFAULT_N_T,
};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSample, SeededStream};
use crate::geometry::Dim;

/// A Monte Carlo value with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Event counters, such as lattices that missed the body entirely.
    #[serde(default)]
    pub flags: BTreeMap<String, u64>,
}

impl Estimate {
    /// Mean and standard error of `samples`, summed in order.
    pub fn from_samples(samples: &[f64], seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("an estimate needs at least 2 samples, got {n}")));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        Ok(Estimate { value: mean, std_error: sd / (n as f64).sqrt(), n_samples: n, seed, flags: BTreeMap::new() })
    }

    /// A value known in closed form.
    pub fn exact(value: f64, seed: u64) -> Self {
        Estimate { value, std_error: 0.0, n_samples: 0, seed, flags: BTreeMap::new() }
    }

    pub fn with_flags(mut self, flags: BTreeMap<String, u64>) -> Self {
        self.flags = flags;
        self
    }

    pub fn flag(&self, name: &str) -> u64 {
        self.flags.get(name).copied().unwrap_or(0)
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn combined_se(&self, other: &Estimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }

    /// Whether `|a - b| <= k * combined_se`.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.combined_se(other)
    }
}

/// Per-lattice outcome: a sample value plus the names of flags it raised.
pub(crate) struct Outcome {
    pub value: f64,
    pub flags: Vec<(&'static str, u64)>,
}

impl From<f64> for Outcome {
    fn from(value: f64) -> Self {
        Outcome { value, flags: Vec::new() }
    }
}

/// Evaluates `f` on `n` lattices in parallel and reduces in index order.
pub(crate) fn over_lattices<F>(dim: Dim, n: usize, stream: &SeededStream, f: F) -> Result<Estimate>
where
    F: Fn(&LatticeSample) -> Result<Outcome> + Sync,
{
    let outcomes: Vec<Outcome> = (0..n as u64)
        .into_par_iter()
        .map(|i| f(&LatticeSample::sample(dim, &mut stream.sample_rng(i))))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let mut flags = BTreeMap::new();
    for (name, k) in outcomes.iter().flat_map(|o| o.flags.iter()) {
        *flags.entry(name.to_string()).or_insert(0) += k;
    }
    Ok(Estimate::from_samples(&values, stream.seed())?.with_flags(flags))
}
