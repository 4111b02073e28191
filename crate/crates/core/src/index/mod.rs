//! Grouped-data index families: rank weights, the Rényi index and its
//! relatives, concentration and achievement indices.

mod achievement;
mod distribution;
mod params;
mod rank;
mod regression;
mod renyi;
mod transform;
mod value;

pub use achievement::{
    achievement_from_concentration, achievement_limit_alpha_inf, achievement_limit_nu_inf,
    achievement_my, achievement_wagstaff, best_group, concentration_classical,
    concentration_extended, concentration_two_param, renyi_from_achievement,
};
pub(crate) use achievement::equally_distributed_equivalent;
pub use distribution::{GroupRecord, GroupedDistribution};
pub(crate) use params::is_unit_alpha;
pub use params::{Aversion, IndexParams, Reference, UNIT_ALPHA_TOLERANCE};
pub use rank::{
    distribution_weights, rank_positions, rank_weight, ranks_from_shares, ses_weights, RankWeights,
};
pub use regression::{
    convenient_regression_slope, regression_path, weighted_least_squares, RegressionFit,
};
pub use renyi::{
    atkinson_ratio, atkinson_standardize, ge_index, ge_standardized, relative_disparities,
    renyi_index, renyi_limit_alpha_inf, ri_ge_convert, Conversion,
};
pub use transform::{inverse_transform, power_transform};
pub use value::{IndexKind, IndexValue};

use crate::error::{DisparityError, Result};

/// Evaluates one index kind, routing infinite parameters to the closed-form
/// limits. Kinds that do not depend on α (or ν) ignore it.
pub fn evaluate(
    dist: &GroupedDistribution,
    kind: IndexKind,
    alpha: Aversion,
    nu: Aversion,
    reference: Reference,
) -> Result<IndexValue> {
    if alpha.is_infinite() && nu.is_infinite() {
        return Err(DisparityError::InvalidInput(
            "alpha and nu cannot both be infinite: the limits do not commute".into(),
        ));
    }
    let mut value = match (alpha, nu) {
        (Aversion::Infinite, Aversion::Finite(nu)) => alpha_limit(dist, kind, nu, reference)?,
        (Aversion::Finite(alpha), Aversion::Infinite) => nu_limit(dist, kind, alpha)?,
        (Aversion::Finite(alpha), Aversion::Finite(nu)) => {
            finite(dist, kind, &IndexParams::new(alpha, nu, reference)?)?
        }
        (Aversion::Infinite, Aversion::Infinite) => unreachable!(),
    };
    value.params.reference = reference;
    Ok(value)
}

fn finite(dist: &GroupedDistribution, kind: IndexKind, params: &IndexParams) -> Result<IndexValue> {
    let mut v = match kind {
        IndexKind::RI => renyi_index(dist, params)?,
        IndexKind::GE => ge_index(dist, params)?,
        IndexKind::GeStandardized => ge_standardized(dist, params)?,
        IndexKind::Atkinson => atkinson_standardize(&renyi_index(dist, params)?)?,
        IndexKind::AtkinsonRatio => atkinson_ratio(dist, params)?,
        IndexKind::ConcentrationClassical => concentration_classical(dist)?,
        IndexKind::ConcentrationExtended => concentration_extended(dist, params.nu)?,
        IndexKind::ConcentrationTwoParam => concentration_two_param(dist, params)?,
        IndexKind::AchievementWagstaff => achievement_wagstaff(dist, params.nu)?,
        IndexKind::AchievementMY => achievement_my(dist, params)?,
        IndexKind::SlopeRegression => {
            let fit = regression_path(dist, params)?;
            IndexValue::new(IndexKind::SlopeRegression, fit.slope, *params)
        }
    };
    v.params.alpha = params.alpha;
    v.params.nu = params.nu;
    Ok(v)
}

fn alpha_limit(
    dist: &GroupedDistribution,
    kind: IndexKind,
    nu: f64,
    reference: Reference,
) -> Result<IndexValue> {
    IndexParams::new(0.0, nu, reference)?;
    let inf = f64::INFINITY;
    let all_equal = {
        let means = dist.means();
        means.iter().all(|&y| y == means[0])
    };
    let value = match kind {
        IndexKind::RI => renyi_limit_alpha_inf(dist, nu)?.value,
        IndexKind::Atkinson => {
            atkinson_standardize(&renyi_limit_alpha_inf(dist, nu)?)?.value
        }
        IndexKind::AtkinsonRatio => {
            if all_equal {
                0.0
            } else {
                1.0
            }
        }
        // GE grows without bound in α unless every disparity is 1.
        IndexKind::GE => {
            if all_equal {
                0.0
            } else {
                inf
            }
        }
        IndexKind::GeStandardized => {
            if all_equal {
                0.0
            } else {
                1.0
            }
        }
        IndexKind::AchievementMY => achievement_limit_alpha_inf(dist, nu).value,
        IndexKind::ConcentrationTwoParam => {
            1.0 - achievement_limit_alpha_inf(dist, nu).value / dist.population_mean()
        }
        IndexKind::ConcentrationClassical => concentration_classical(dist)?.value,
        IndexKind::ConcentrationExtended => concentration_extended(dist, nu)?.value,
        IndexKind::AchievementWagstaff => achievement_wagstaff(dist, nu)?.value,
        IndexKind::SlopeRegression => {
            return Err(DisparityError::InvalidInput(
                "the regression slope has no alpha -> infinity limit".into(),
            ))
        }
    };
    Ok(IndexValue::limit(kind, value, inf, nu))
}

fn nu_limit(dist: &GroupedDistribution, kind: IndexKind, alpha: f64) -> Result<IndexValue> {
    IndexParams::with(alpha, 1.0)?;
    let lowest = dist.groups()[0].mean_outcome;
    let value = match kind {
        IndexKind::AchievementMY => achievement_limit_nu_inf(dist, alpha).value,
        IndexKind::AchievementWagstaff => lowest,
        IndexKind::ConcentrationTwoParam | IndexKind::ConcentrationExtended => {
            1.0 - lowest / dist.population_mean()
        }
        IndexKind::ConcentrationClassical => concentration_classical(dist)?.value,
        other => {
            return Err(DisparityError::InvalidInput(format!(
                "{other} has no closed-form nu -> infinity limit"
            )))
        }
    };
    let alpha = if kind == IndexKind::ConcentrationExtended || kind == IndexKind::AchievementWagstaff {
        0.0
    } else {
        alpha
    };
    Ok(IndexValue::limit(kind, value, alpha, f64::INFINITY))
}

#[cfg(test)]
pub(crate) mod fixtures_for_tests {
    use super::{GroupRecord, GroupedDistribution};

    /// The three hypothetical four-group populations, outcomes in percent.
    pub(crate) fn hypothetical(n: usize) -> GroupedDistribution {
        let (shares, means): ([f64; 4], [f64; 4]) = match n {
            1 => ([0.05, 0.15, 0.60, 0.20], [30.0, 20.0, 15.0, 5.0]),
            2 => ([0.05, 0.15, 0.60, 0.20], [30.0, 20.0, 5.0, 15.0]),
            3 => ([0.20, 0.20, 0.40, 0.20], [30.0, 20.0, 15.0, 5.0]),
            _ => panic!("no population {n}"),
        };
        let labels = ["Poor", "Near poor", "Middle income", "High income"];
        let groups = labels
            .iter()
            .zip(shares.iter().zip(means))
            .map(|(l, (&p, y))| GroupRecord::new(*l, p, y))
            .collect();
        GroupedDistribution::new(groups, "percent").unwrap()
    }
}
