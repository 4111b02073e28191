use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replicate_rng, BootstrapConfig, IntervalKind};
use crate::error::{DisparityError, Result};
use crate::index::{IndexParams, IndexValue};
use crate::inference::{
    renyi_from_totals, survey_totals, ClusterTotals, IndexEstimate, InferenceMethod, Interval,
    SurveyMicrodata, TotalsDecomposition,
};
use crate::numeric::{quantile_sorted, sample_sd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub estimate: IndexEstimate,
    /// Replicate RI values in replicate order.
    pub replicates: Vec<f64>,
    /// Replicates in which at least one group drew no observations and was
    /// left out of that replicate's index.
    pub replicates_with_dropped_groups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDifference {
    /// Point difference `RI(A) − RI(B)`.
    pub difference: f64,
    pub std_error: f64,
    pub interval: Interval,
    /// Two-sided, from the share of replicate differences on either side of 0.
    pub p_value: f64,
    pub replicates: Vec<f64>,
}

struct Prepared {
    point: IndexValue,
    clusters: ClusterTotals,
}

fn prepare(data: &SurveyMicrodata, params: &IndexParams, cfg: &BootstrapConfig) -> Result<Prepared> {
    cfg.validate()?;
    params.validate()?;
    data.check_design()?;
    let (data, _) = data.without_empty_groups()?;
    let point = renyi_from_totals(&survey_totals(&data)?, params)?;
    Ok(Prepared {
        point,
        clusters: data.cluster_totals(),
    })
}

/// One rescaled-bootstrap replicate: `C_s − 1` clusters drawn with
/// replacement in each stratum, weights multiplied by `C_s/(C_s − 1)` times
/// the draw multiplicity. Returns the RI and whether a group was dropped.
fn replicate<R: Rng>(
    clusters: &ClusterTotals,
    params: &IndexParams,
    rng: &mut R,
) -> Result<(f64, bool)> {
    let m = clusters.groups;
    let mut u0 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut mult = Vec::new();
    for stratum in &clusters.strata {
        let c = stratum.len();
        mult.clear();
        mult.resize(c, 0u32);
        for _ in 0..c - 1 {
            mult[rng.random_range(0..c)] += 1;
        }
        let factor = c as f64 / (c - 1) as f64;
        for (g, &k) in stratum.iter().zip(&mult) {
            if k == 0 {
                continue;
            }
            let w = factor * k as f64;
            for j in 0..m {
                u0[j] += w * g.u0[j];
                u1[j] += w * g.u1[j];
            }
        }
    }
    let keep: Vec<usize> = (0..m).filter(|&j| u0[j] > 0.0).collect();
    let dropped = keep.len() < m;
    let tot = TotalsDecomposition::from_group_totals(
        keep.iter().map(|&j| u0[j]).collect(),
        keep.iter().map(|&j| u1[j]).collect(),
    )?;
    Ok((renyi_from_totals(&tot, params)?.value, dropped))
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

fn interval(point: f64, replicates: &[f64], se: f64, cfg: &BootstrapConfig) -> Interval {
    match cfg.interval {
        IntervalKind::Percentile => {
            let s = sorted(replicates);
            let tail = (1.0 - cfg.level) / 2.0;
            Interval {
                lo: quantile_sorted(&s, tail),
                hi: quantile_sorted(&s, 1.0 - tail),
                level: cfg.level,
            }
        }
        IntervalKind::Normal => Interval::normal(point, se, cfg.level),
    }
}

/// Rescaled bootstrap of the rank-dependent RI for a stratified cluster
/// sample.
pub fn rescaled_bootstrap(
    data: &SurveyMicrodata,
    params: &IndexParams,
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    let prep = prepare(data, params, cfg)?;
    let draws: Vec<(f64, bool)> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| replicate(&prep.clusters, params, &mut replicate_rng(cfg.seed, b)))
        .collect::<Result<_>>()?;
    let replicates: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let dropped = draws.iter().filter(|d| d.1).count();
    if dropped > 0 {
        log::warn!("{dropped} bootstrap replicates left out a group with no sampled observations");
    }
    let se = sample_sd(&replicates);
    let interval = interval(prep.point.value, &replicates, se, cfg);
    Ok(BootstrapResult {
        estimate: IndexEstimate {
            value: prep.point,
            std_error: se,
            interval,
            method: InferenceMethod::Bootstrap,
        },
        replicates,
        replicates_with_dropped_groups: dropped,
    })
}

/// Bootstrap distribution of `RI(A) − RI(B)` for independent samples.
/// Replicate `r` uses stream `2r` for A and `2r + 1` for B.
pub fn bootstrap_difference(
    data_a: &SurveyMicrodata,
    data_b: &SurveyMicrodata,
    params: &IndexParams,
    cfg: &BootstrapConfig,
) -> Result<BootstrapDifference> {
    let a = prepare(data_a, params, cfg)?;
    let b = prepare(data_b, params, cfg)?;
    let difference = a.point.value - b.point.value;
    if !difference.is_finite() {
        return Err(DisparityError::DomainError(
            "difference of infinite index values".into(),
        ));
    }
    let replicates: Vec<f64> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let (va, _) = replicate(&a.clusters, params, &mut replicate_rng(cfg.seed, 2 * r))?;
            let (vb, _) = replicate(&b.clusters, params, &mut replicate_rng(cfg.seed, 2 * r + 1))?;
            Ok(va - vb)
        })
        .collect::<Result<_>>()?;
    let se = sample_sd(&replicates);
    let n = replicates.len() as f64;
    let below = replicates.iter().filter(|&&d| d <= 0.0).count() as f64;
    let above = replicates.iter().filter(|&&d| d >= 0.0).count() as f64;
    let p_value = (2.0 * below.min(above) / n).min(1.0);
    Ok(BootstrapDifference {
        difference,
        std_error: se,
        interval: interval(difference, &replicates, se, cfg),
        p_value,
        replicates,
    })
}
