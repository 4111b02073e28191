//! Social-evaluation (achievement) indices and the concentration family.

use super::distribution::GroupedDistribution;
use super::params::{is_unit_alpha, IndexParams, Reference};
use super::rank::{distribution_weights, ranks_from_shares};
use super::value::{IndexKind, IndexValue};
use crate::error::{DisparityError, Result};
use crate::numeric::compensated_sum;

/// Equally-distributed equivalent outcome `H*(ν, α) = f_α^{-1}(S*(ν, α))`
/// for SES-weighted shares `ses` (summing to one).
pub(crate) fn equally_distributed_equivalent(ses: &[f64], means: &[f64], alpha: f64) -> Result<f64> {
    if alpha >= 1.0 - super::params::UNIT_ALPHA_TOLERANCE && means.contains(&0.0) {
        return Err(DisparityError::DomainError(format!(
            "achievement undefined with a zero outcome at alpha = {alpha}"
        )));
    }
    if is_unit_alpha(alpha) {
        let s = compensated_sum(ses.iter().zip(means).map(|(p, y)| p * y.ln()));
        Ok(s.exp())
    } else if alpha == 0.0 {
        Ok(compensated_sum(ses.iter().zip(means).map(|(p, y)| p * y)))
    } else {
        let k = 1.0 - alpha;
        let s = compensated_sum(ses.iter().zip(means).map(|(p, y)| p * y.powf(k)));
        Ok(s.powf(1.0 / k))
    }
}

fn ses_shares(dist: &GroupedDistribution, nu: f64) -> Result<Vec<f64>> {
    Ok(distribution_weights(dist, nu)?.ses_shares(&dist.shares()))
}

/// Makdissi–Yazbeck health achievement `H*(ν, α)`.
pub fn achievement_my(dist: &GroupedDistribution, params: &IndexParams) -> Result<IndexValue> {
    params.validate()?;
    let ses = ses_shares(dist, params.nu)?;
    let h = equally_distributed_equivalent(&ses, &dist.means(), params.alpha)?;
    Ok(IndexValue::new(IndexKind::AchievementMY, h, *params))
}

/// Index and label of the group holding the least adverse outcome; ties go
/// to the lowest index.
pub fn best_group(dist: &GroupedDistribution) -> (usize, &str) {
    let mut best = 0;
    for (j, g) in dist.groups().iter().enumerate() {
        if g.mean_outcome < dist.groups()[best].mean_outcome {
            best = j;
        }
    }
    (best, dist.groups()[best].label.as_str())
}

/// `H*(ν, ∞) = min_k ȳ_k`.
pub fn achievement_limit_alpha_inf(dist: &GroupedDistribution, nu: f64) -> IndexValue {
    IndexValue::limit(
        IndexKind::AchievementMY,
        dist.min_outcome(),
        f64::INFINITY,
        nu,
    )
}

/// `H*(∞, α) = ȳ` of the lowest-ranked group.
pub fn achievement_limit_nu_inf(dist: &GroupedDistribution, alpha: f64) -> IndexValue {
    IndexValue::limit(
        IndexKind::AchievementMY,
        dist.groups()[0].mean_outcome,
        alpha,
        f64::INFINITY,
    )
}

/// `RI = −ln[H*(ν, α) / H*(ν, 0)]`, an evaluation route independent of the
/// relative-disparity form.
pub fn renyi_from_achievement(
    dist: &GroupedDistribution,
    params: &IndexParams,
) -> Result<IndexValue> {
    params.validate()?;
    let ses = ses_shares(dist, params.nu)?;
    let means = dist.means();
    let h_alpha = equally_distributed_equivalent(&ses, &means, params.alpha)?;
    let h_zero = equally_distributed_equivalent(&ses, &means, 0.0)?;
    let value = -(h_alpha / h_zero).ln();
    Ok(IndexValue::new(IndexKind::RI, value.max(0.0), *params))
}

/// `Σ (1 − R_j)^{ν−1} p_j x_j / W(ν)` with `W(ν) = Σ (1 − R_j)^{ν−1} p_j`, so the
/// weights average to one and `C(ν, 0) = C(ν)`.
fn wagstaff_weighted_sum(dist: &GroupedDistribution, nu: f64, x: &[f64]) -> Result<f64> {
    if !(nu.is_finite() && nu >= 1.0) {
        return Err(DisparityError::InvalidInput(format!(
            "nu must be finite and >= 1, got {nu}"
        )));
    }
    let shares = dist.shares();
    let ranks = ranks_from_shares(&shares)?;
    let kernel: Vec<f64> = ranks
        .iter()
        .map(|&r| if nu == 1.0 { 1.0 } else { (1.0 - r).powf(nu - 1.0) })
        .collect();
    let w = compensated_sum(kernel.iter().zip(&shares).map(|(k, p)| k * p));
    let s = compensated_sum(
        kernel
            .iter()
            .zip(&shares)
            .zip(x)
            .map(|((k, p), x)| k * p * x),
    );
    Ok(s / w)
}

/// Wagstaff extended concentration index `C(ν)`.
pub fn concentration_extended(dist: &GroupedDistribution, nu: f64) -> Result<IndexValue> {
    let mean = dist.population_mean();
    if !(mean > 0.0) {
        return Err(DisparityError::DegenerateReference(
            "population mean outcome is zero".into(),
        ));
    }
    let r: Vec<f64> = dist.means().iter().map(|y| y / mean).collect();
    let c = 1.0 - wagstaff_weighted_sum(dist, nu, &r)?;
    Ok(IndexValue::new(
        IndexKind::ConcentrationExtended,
        c,
        IndexParams {
            alpha: 0.0,
            nu,
            reference: Reference::PopulationMean,
        },
    ))
}

/// Classical concentration index `C = C(2)`.
pub fn concentration_classical(dist: &GroupedDistribution) -> Result<IndexValue> {
    let mut c = concentration_extended(dist, 2.0)?;
    c.kind = IndexKind::ConcentrationClassical;
    Ok(c)
}

/// Wagstaff health achievement `H(ν)`.
pub fn achievement_wagstaff(dist: &GroupedDistribution, nu: f64) -> Result<IndexValue> {
    let h = wagstaff_weighted_sum(dist, nu, &dist.means())?;
    Ok(IndexValue::new(
        IndexKind::AchievementWagstaff,
        h,
        IndexParams {
            alpha: 0.0,
            nu,
            reference: Reference::PopulationMean,
        },
    ))
}

/// `H(ν) = [1 − C(ν)] · ȳ··`.
pub fn achievement_from_concentration(mean: f64, concentration: f64) -> f64 {
    (1.0 - concentration) * mean
}

/// Makdissi–Yazbeck two-parameter concentration `C(ν, α) = 1 − H*(ν, α)/ȳ··`.
pub fn concentration_two_param(
    dist: &GroupedDistribution,
    params: &IndexParams,
) -> Result<IndexValue> {
    let h = achievement_my(dist, params)?.value;
    let mean = dist.population_mean();
    Ok(IndexValue::new(
        IndexKind::ConcentrationTwoParam,
        1.0 - h / mean,
        *params,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::fixtures_for_tests::hypothetical;
    use crate::index::renyi::renyi_index;

    fn p(alpha: f64, nu: f64) -> IndexParams {
        IndexParams::with(alpha, nu).unwrap()
    }

    #[test]
    fn population_mean_and_limits() {
        let d = hypothetical(1);
        assert!((achievement_my(&d, &p(0.0, 1.0)).unwrap().value - 14.5).abs() < 1e-12);
        assert_eq!(achievement_limit_alpha_inf(&d, 2.0).value, 5.0);
        assert_eq!(achievement_limit_nu_inf(&d, 2.0).value, 30.0);
        assert_eq!(best_group(&d), (3, "High income"));
    }

    #[test]
    fn large_finite_parameters_approach_limits() {
        let d = hypothetical(1);
        let h = achievement_my(&d, &p(300.0, 1.0)).unwrap().value;
        assert!((h - 5.0).abs() < 0.1, "{h}");
        let h = achievement_my(&d, &p(0.0, 400.0)).unwrap().value;
        assert!((h - 30.0).abs() < 0.5, "{h}");
    }

    #[test]
    fn best_group_ties_pick_lowest_index() {
        let d = GroupedDistribution::from_shares(&[0.2, 0.3, 0.5], &[3.0, 1.0, 1.0]).unwrap();
        assert_eq!(best_group(&d).0, 1);
    }

    #[test]
    fn zero_outcome_domain_error() {
        let d = GroupedDistribution::from_shares(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(matches!(
            achievement_my(&d, &p(1.0, 1.0)),
            Err(DisparityError::DomainError(_))
        ));
        assert!(achievement_my(&d, &p(0.5, 1.0)).is_ok());
    }

    #[test]
    fn renyi_routes_agree() {
        let d = hypothetical(2);
        let a = renyi_from_achievement(&d, &p(4.0, 2.0)).unwrap().value;
        let b = renyi_index(&d, &p(4.0, 2.0)).unwrap().value;
        assert!((a - b).abs() <= 1e-10 * b);
        assert_eq!(renyi_from_achievement(&d, &p(0.0, 3.0)).unwrap().value, 0.0);
        let a = renyi_from_achievement(&hypothetical(1), &p(2.0, 1.0)).unwrap().value;
        assert!((a - 0.257).abs() < 5e-4);
    }

    #[test]
    fn concentration_basics() {
        let d = hypothetical(1);
        assert!(concentration_extended(&d, 1.0).unwrap().value.abs() < 1e-15);
        let c = concentration_classical(&d).unwrap().value;
        assert!(c < 0.0 && c > -1.0, "{c}");
        let eq = GroupedDistribution::from_shares(&[0.1, 0.6, 0.3], &[2.0, 2.0, 2.0]).unwrap();
        for nu in [1.0, 2.0, 3.5] {
            assert!(concentration_extended(&eq, nu).unwrap().value.abs() < 1e-14);
            for alpha in [0.0, 1.0, 3.0] {
                assert!(concentration_two_param(&eq, &p(alpha, nu)).unwrap().value.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn worked_example_achievement() {
        assert!((achievement_from_concentration(9.0, 0.04) - 8.64).abs() < 1e-12);
        assert!((achievement_from_concentration(6.4, -0.35) - 8.64).abs() < 1e-12);
    }

    #[test]
    fn wagstaff_matches_ses_weighted_mean() {
        let d = hypothetical(1);
        assert!((achievement_wagstaff(&d, 1.0).unwrap().value - 14.5).abs() < 1e-12);
        let h = achievement_wagstaff(&d, 3.0).unwrap().value;
        let hs = achievement_my(&d, &p(0.0, 3.0)).unwrap().value;
        assert!((h - hs).abs() < 1e-12 * h);
    }

    #[test]
    fn two_param_reduces_to_extended() {
        let d = hypothetical(3);
        for nu in [1.0, 2.0, 3.0] {
            let a = concentration_two_param(&d, &p(0.0, nu)).unwrap().value;
            let b = concentration_extended(&d, nu).unwrap().value;
            assert!((a - b).abs() < 1e-12);
        }
    }
}
