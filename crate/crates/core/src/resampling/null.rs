use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replicate_rng, DEFAULT_REPLICATES};
use crate::error::{DisparityError, Result};
use crate::index::{renyi_index, GroupedDistribution, IndexParams, IndexValue};
use crate::inference::{registry_moments, RegistryRates};
use crate::numeric::compensated_sum;

/// Null simulation settings. Under the null every group shares, in each age
/// stratum, the population-share-weighted mean of the observed group rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullSimConfig {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for NullSimConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
        }
    }
}

impl NullSimConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self { replicates, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullTestResult {
    pub observed: IndexValue,
    /// Null replicate values in replicate order.
    pub null_values: Vec<f64>,
    /// `(1 + #{null ≥ observed}) / (B + 1)`.
    pub p_value: f64,
}

/// Poisson simulation of RI under independence of rate and SES group.
/// `dist` supplies the group shares; its outcomes are replaced by the
/// age-adjusted registry means.
pub fn poisson_null_test(
    rates: &RegistryRates,
    dist: &GroupedDistribution,
    params: &IndexParams,
    cfg: &NullSimConfig,
) -> Result<NullTestResult> {
    if cfg.replicates < 2 {
        return Err(DisparityError::InvalidInput(format!(
            "need at least 2 replicates, got {}",
            cfg.replicates
        )));
    }
    if rates.n_groups() != dist.len() {
        return Err(DisparityError::InvalidInput(format!(
            "{} registry groups for {} distribution groups",
            rates.n_groups(),
            dist.len()
        )));
    }
    params.validate()?;
    let (means, _) = registry_moments(rates);
    let observed_dist = dist.with_means(&means)?;
    let observed = renyi_index(&observed_dist, params)?;

    let shares = dist.shares();
    let n_age = rates.age_weights().len();
    let pooled: Vec<f64> = (0..n_age)
        .map(|k| compensated_sum(shares.iter().zip(rates.rates()).map(|(p, u)| p * u[k])))
        .collect();
    if pooled.iter().all(|&u| u == 0.0) {
        return Err(DisparityError::DegenerateReference(
            "pooled null rate is zero".into(),
        ));
    }
    let expected: Vec<Vec<Option<Poisson<f64>>>> = rates
        .denominators()
        .iter()
        .map(|n| {
            n.iter()
                .zip(&pooled)
                .map(|(n, u)| {
                    let lambda = u * n;
                    if lambda > 0.0 {
                        Poisson::new(lambda).ok()
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let null_values: Vec<f64> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = replicate_rng(cfg.seed, b);
            let draws: Vec<Vec<f64>> = expected
                .iter()
                .zip(rates.denominators())
                .map(|(dists, n)| {
                    dists
                        .iter()
                        .zip(n)
                        .map(|(d, n)| d.as_ref().map_or(0.0, |d| d.sample(&mut rng)) / n)
                        .collect()
                })
                .collect();
            let (ystar, _) = registry_moments(&rates.with_rates(draws)?);
            if ystar.iter().all(|&y| y == 0.0) {
                return Ok(0.0);
            }
            Ok(renyi_index(&dist.with_means(&ystar)?, params)?.value)
        })
        .collect::<Result<_>>()?;

    let exceed = null_values.iter().filter(|&&v| v >= observed.value).count();
    let p_value = (1 + exceed) as f64 / (cfg.replicates + 1) as f64;
    Ok(NullTestResult {
        observed,
        null_values,
        p_value,
    })
}
