//! MCMC samplers for HHDP Gaussian mixtures: a blocked conditional Gibbs
//! sampler built on finite Dirichlet approximations (with a nested-DP
//! baseline mode), and a marginal restaurant-franchise sampler for two
//! populations.

pub mod blocked;
pub mod marginal;

pub use blocked::{run_blocked_gibbs, BlockedSampler};
pub use marginal::{run_marginal_gibbs, MarginalSampler};

use crate::error::{Error, Result};
use crate::inference::ModelKind;

/// Per-population observation vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupedData {
    values: Vec<Vec<f64>>,
}

impl GroupedData {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::data("need at least one population"));
        }
        for (j, pop) in values.iter().enumerate() {
            if let Some(bad) = pop.iter().find(|v| !v.is_finite()) {
                return Err(Error::data(format!(
                    "non-finite observation {bad} in population {}",
                    j + 1
                )));
            }
        }
        Ok(GroupedData { values })
    }

    pub fn n_pops(&self) -> usize {
        self.values.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.values.iter().map(|v| v.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    pub fn pop(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn populations(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn iter_pooled(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    /// Pooled mean and sample variance (n − 1 denominator), used for
    /// data-driven base-measure defaults.
    pub fn pooled_mean_var(&self) -> Result<(f64, f64)> {
        let n = self.total_len();
        if n < 2 {
            return Err(Error::data(
                "need at least two observations to derive data-driven hyperparameters",
            ));
        }
        let mean = self.iter_pooled().sum::<f64>() / n as f64;
        let var = self
            .iter_pooled()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n as f64 - 1.0);
        Ok((mean, var))
    }
}

/// Settings for a single sampler chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsConfig {
    pub model: ModelKind,
    /// Truncation of the distributional layer.
    pub k: usize,
    /// Truncation of the observational layer.
    pub l: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Chain index; doubles as the RNG stream id.
    pub chain: usize,
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 {
            return Err(Error::config("truncation levels K and L must be positive"));
        }
        if self.iterations == 0 || self.iterations <= self.burn_in {
            return Err(Error::config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thinning interval must be at least 1"));
        }
        Ok(())
    }
}
