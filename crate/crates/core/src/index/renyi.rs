//! The rank-dependent Rényi index and the indices derived from it
//! (generalized entropy, Atkinson standardizations).

use super::distribution::GroupedDistribution;
use super::params::{is_unit_alpha, IndexParams, Reference};
use super::rank::{distribution_weights, RankWeights};
use super::value::{IndexKind, IndexValue};
use crate::error::{DisparityError, Result};
use crate::numeric::compensated_sum;

/// Normalized relative disparities `r̄_j = r_j / Σ_k p̄_k^(ν) r_k`.
pub fn relative_disparities(
    dist: &GroupedDistribution,
    params: &IndexParams,
    weights: &RankWeights,
) -> Result<Vec<f64>> {
    params.validate()?;
    let shares = dist.shares();
    let means = dist.means();
    let ses = weights.ses_shares(&shares);
    let reference = match params.reference {
        Reference::PopulationMean => dist.population_mean(),
        Reference::SesWeightedMean => compensated_sum(ses.iter().zip(&means).map(|(p, y)| p * y)),
        Reference::BestGroupRate => dist.min_outcome(),
        Reference::FixedTarget(t) => t,
    };
    if !(reference > 0.0) {
        return Err(DisparityError::DegenerateReference(format!(
            "{} reference value is {reference}",
            params.reference
        )));
    }
    let r: Vec<f64> = means.iter().map(|y| y / reference).collect();
    let norm = compensated_sum(ses.iter().zip(&r).map(|(p, r)| p * r));
    if !(norm > 0.0) {
        return Err(DisparityError::DegenerateReference(
            "SES-weighted mean of relative disparities is zero".into(),
        ));
    }
    Ok(r.iter().map(|x| x / norm).collect())
}

/// `Σ p̄_j (r̄_j^{1−α} − 1)`, accurate when the sum is small.
fn shifted_power_mean(ses: &[f64], rbar: &[f64], alpha: f64) -> f64 {
    compensated_sum(ses.iter().zip(rbar).map(|(&p, &r)| {
        if r == 0.0 {
            if alpha < 1.0 {
                -p
            } else {
                f64::INFINITY
            }
        } else {
            p * ((1.0 - alpha) * r.ln()).exp_m1()
        }
    }))
}

/// `−Σ p̄_j ln r̄_j`, the common α = 1 value of RI and GE.
fn log_divergence(ses: &[f64], rbar: &[f64]) -> f64 {
    if rbar.contains(&0.0) {
        return f64::INFINITY;
    }
    -compensated_sum(ses.iter().zip(rbar).map(|(p, r)| p * r.ln()))
}

fn ses_and_disparities(
    dist: &GroupedDistribution,
    params: &IndexParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    let weights = distribution_weights(dist, params.nu)?;
    let rbar = relative_disparities(dist, params, &weights)?;
    Ok((weights.ses_shares(&dist.shares()), rbar))
}

/// Rank-dependent Rényi index. Zero outcomes give `+∞` when α ≥ 1.
pub fn renyi_index(dist: &GroupedDistribution, params: &IndexParams) -> Result<IndexValue> {
    let (ses, rbar) = ses_and_disparities(dist, params)?;
    let value = if params.unit_alpha() {
        log_divergence(&ses, &rbar)
    } else {
        let s = shifted_power_mean(&ses, &rbar, params.alpha);
        if s.is_infinite() {
            f64::INFINITY
        } else {
            -s.ln_1p() / (1.0 - params.alpha)
        }
    };
    Ok(IndexValue::new(IndexKind::RI, value.max(0.0), *params))
}

/// `RI_∞^(ν) = −ln(min_k r̄_k)`.
pub fn renyi_limit_alpha_inf(dist: &GroupedDistribution, nu: f64) -> Result<IndexValue> {
    let params = IndexParams::with(0.0, nu)?;
    let (_, rbar) = ses_and_disparities(dist, &params)?;
    let min = rbar.iter().copied().fold(f64::INFINITY, f64::min);
    let value = if min == 0.0 {
        f64::INFINITY
    } else {
        (-min.ln()).max(0.0)
    };
    Ok(IndexValue::limit(IndexKind::RI, value, f64::INFINITY, nu))
}

/// `A = 1 − e^{−RI}`.
pub fn atkinson_standardize(ri: &IndexValue) -> Result<IndexValue> {
    if ri.kind != IndexKind::RI {
        return Err(DisparityError::InvalidInput(format!(
            "Atkinson standardization expects an RI value, got {}",
            ri.kind
        )));
    }
    let a = -(-ri.value).exp_m1();
    Ok(IndexValue::new(IndexKind::Atkinson, a, ri.params))
}

/// `A_α^(ν) / A_∞^(ν)`; defined as 0 when every group is equal.
pub fn atkinson_ratio(dist: &GroupedDistribution, params: &IndexParams) -> Result<IndexValue> {
    let a = atkinson_standardize(&renyi_index(dist, params)?)?.value;
    let a_inf = atkinson_standardize(&renyi_limit_alpha_inf(dist, params.nu)?)?.value;
    let value = if a_inf == 0.0 {
        0.0
    } else {
        (a / a_inf).clamp(0.0, 1.0)
    };
    Ok(IndexValue::new(IndexKind::AtkinsonRatio, value, *params))
}

/// Rank-dependent reference-invariant generalized entropy index.
pub fn ge_index(dist: &GroupedDistribution, params: &IndexParams) -> Result<IndexValue> {
    let (ses, rbar) = ses_and_disparities(dist, params)?;
    let value = if params.unit_alpha() {
        log_divergence(&ses, &rbar)
    } else {
        let s = shifted_power_mean(&ses, &rbar, params.alpha);
        if s.is_infinite() {
            f64::INFINITY
        } else {
            -s / (1.0 - params.alpha)
        }
    };
    Ok(IndexValue::new(IndexKind::GE, value.max(0.0), *params))
}

/// `1 − e^{−GE}`.
pub fn ge_standardized(dist: &GroupedDistribution, params: &IndexParams) -> Result<IndexValue> {
    let ge = ge_index(dist, params)?;
    Ok(IndexValue::new(
        IndexKind::GeStandardized,
        -(-ge.value).exp_m1(),
        *params,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    RiToGe,
    GeToRi,
}

/// Converts between RI and GE at the value's α via
/// `RI = −ln[1 − (1−α)GE]/(1−α)`. At α = 1 the two coincide.
pub fn ri_ge_convert(value: &IndexValue, direction: Conversion) -> Result<IndexValue> {
    let alpha = value.params.alpha;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(DisparityError::InvalidInput(format!(
            "conversion needs a finite alpha, got {alpha}"
        )));
    }
    let expected = match direction {
        Conversion::RiToGe => IndexKind::RI,
        Conversion::GeToRi => IndexKind::GE,
    };
    if value.kind != expected {
        return Err(DisparityError::InvalidInput(format!(
            "expected a {expected} value, got {}",
            value.kind
        )));
    }
    let k = 1.0 - alpha;
    let (kind, converted) = match direction {
        Conversion::RiToGe => {
            let ge = if is_unit_alpha(alpha) {
                value.value
            } else if value.value.is_infinite() {
                if k > 0.0 {
                    1.0 / k
                } else {
                    f64::INFINITY
                }
            } else {
                -(-k * value.value).exp_m1() / k
            };
            (IndexKind::GE, ge)
        }
        Conversion::GeToRi => {
            let ri = if is_unit_alpha(alpha) {
                value.value
            } else {
                let arg = -k * value.value;
                if !(arg > -1.0) {
                    return Err(DisparityError::DomainError(format!(
                        "GE = {} is not attainable at alpha = {alpha}",
                        value.value
                    )));
                }
                -arg.ln_1p() / k
            };
            (IndexKind::RI, ri)
        }
    };
    Ok(IndexValue::new(kind, converted, value.params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::fixtures_for_tests::hypothetical;

    fn p(alpha: f64, nu: f64) -> IndexParams {
        IndexParams::with(alpha, nu).unwrap()
    }

    #[test]
    fn hypothetical_relative_disparities() {
        let d = hypothetical(1);
        let w = distribution_weights(&d, 1.0).unwrap();
        let r = relative_disparities(&d, &p(2.0, 1.0), &w).unwrap();
        let expected = [30.0 / 14.5, 20.0 / 14.5, 15.0 / 14.5, 5.0 / 14.5];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_outcomes_give_unit_disparities_and_zero_indices() {
        let d = GroupedDistribution::from_shares(&[0.2, 0.5, 0.3], &[4.0, 4.0, 4.0]).unwrap();
        for reference in [
            Reference::PopulationMean,
            Reference::BestGroupRate,
            Reference::FixedTarget(9.0),
        ] {
            let params = IndexParams::new(2.0, 3.0, reference).unwrap();
            let w = distribution_weights(&d, 3.0).unwrap();
            let r = relative_disparities(&d, &params, &w).unwrap();
            assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-14));
            assert!(renyi_index(&d, &params).unwrap().value.abs() < 1e-14);
            assert!(ge_index(&d, &params).unwrap().value.abs() < 1e-14);
        }
        assert_eq!(renyi_limit_alpha_inf(&d, 2.0).unwrap().value, 0.0);
        assert_eq!(atkinson_ratio(&d, &p(2.0, 2.0)).unwrap().value, 0.0);
    }

    #[test]
    fn hypothetical_anchor_values() {
        let ri1 = renyi_index(&hypothetical(1), &p(2.0, 1.0)).unwrap().value;
        let ri3 = renyi_index(&hypothetical(3), &p(4.0, 1.0)).unwrap().value;
        let ge1 = ge_index(&hypothetical(1), &p(2.0, 1.0)).unwrap().value;
        let ge3 = ge_index(&hypothetical(3), &p(4.0, 1.0)).unwrap().value;
        assert!((ri1 - 0.257).abs() <= 5e-4, "{ri1}");
        assert!((ri3 - 0.717).abs() <= 5e-4, "{ri3}");
        assert!((ge1 - 0.293).abs() <= 5e-4, "{ge1}");
        assert!((ge3 - 2.534).abs() <= 5e-4, "{ge3}");
    }

    #[test]
    fn limit_alpha_inf_hypothetical() {
        let v = renyi_limit_alpha_inf(&hypothetical(1), 1.0).unwrap().value;
        assert!((v - (-(5.0f64 / 14.5).ln())).abs() < 1e-12);
        assert!((v - 1.065).abs() < 5e-4);
        let at8 = renyi_index(&hypothetical(1), &p(8.0, 1.0)).unwrap().value;
        assert!(at8 < v);
    }

    #[test]
    fn zero_outcome_branches() {
        let d = GroupedDistribution::from_shares(&[0.3, 0.7], &[2.0, 0.0]).unwrap();
        assert!(renyi_index(&d, &p(1.0, 1.0)).unwrap().value.is_infinite());
        assert!(renyi_index(&d, &p(2.0, 2.0)).unwrap().value.is_infinite());
        assert!(ge_index(&d, &p(3.0, 1.0)).unwrap().value.is_infinite());
        assert!(renyi_index(&d, &p(0.5, 1.0)).unwrap().value.is_finite());
        assert!(renyi_limit_alpha_inf(&d, 1.0).unwrap().value.is_infinite());
        let best = IndexParams::new(2.0, 1.0, Reference::BestGroupRate).unwrap();
        assert!(matches!(
            renyi_index(&d, &best),
            Err(DisparityError::DegenerateReference(_))
        ));
    }

    #[test]
    fn atkinson_values() {
        let v = IndexValue::new(IndexKind::RI, 0.257, p(2.0, 1.0));
        let a = atkinson_standardize(&v).unwrap().value;
        assert!((a - (1.0 - (-0.257f64).exp())).abs() < 1e-15);
        assert!((a - 0.2266).abs() < 1e-4);
        let zero = IndexValue::new(IndexKind::RI, 0.0, p(2.0, 1.0));
        assert_eq!(atkinson_standardize(&zero).unwrap().value, 0.0);
        let ge = IndexValue::new(IndexKind::GE, 0.3, p(2.0, 1.0));
        assert!(atkinson_standardize(&ge).is_err());
    }

    #[test]
    fn atkinson_ratio_tends_to_one() {
        let d = hypothetical(2);
        let r = atkinson_ratio(&d, &p(200.0, 2.0)).unwrap().value;
        assert!(r > 0.99 && r <= 1.0, "{r}");
    }

    #[test]
    fn conversion_worked_pair() {
        let ge = IndexValue::new(IndexKind::GE, 0.293, p(2.0, 1.0));
        let ri = ri_ge_convert(&ge, Conversion::GeToRi).unwrap().value;
        assert!((ri - 1.293f64.ln()).abs() < 1e-15);
        assert!((ri - 0.257).abs() < 5e-4);
        let zero = IndexValue::new(IndexKind::GE, 0.0, p(3.0, 1.0));
        assert_eq!(ri_ge_convert(&zero, Conversion::GeToRi).unwrap().value, 0.0);
        let bad = IndexValue::new(IndexKind::GE, 2.5, p(0.5, 1.0));
        assert!(matches!(
            ri_ge_convert(&bad, Conversion::GeToRi),
            Err(DisparityError::DomainError(_))
        ));
    }

    #[test]
    fn ge_one_equals_ri_one() {
        let d = hypothetical(3);
        let ri = renyi_index(&d, &p(1.0, 2.5)).unwrap().value;
        let ge = ge_index(&d, &p(1.0, 2.5)).unwrap().value;
        assert_eq!(ri, ge);
    }
}
