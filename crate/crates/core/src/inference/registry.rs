use serde::{Deserialize, Serialize};

use super::{IndexEstimate, InferenceMethod, DEFAULT_LEVEL};
use crate::error::{DisparityError, Result};
use crate::index::{
    distribution_weights, equally_distributed_equivalent, renyi_index, GroupedDistribution,
    IndexParams,
};
use crate::numeric::compensated_sum;

/// Age-stratified crude rates per group. `rates[j][k]` is the crude rate of
/// group `j` in age stratum `k` with person-count denominator
/// `denominators[j][k]`, both on the same scale (for example cases per
/// 100,000 and person-years in units of 100,000).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryRates {
    age_weights: Vec<f64>,
    rates: Vec<Vec<f64>>,
    denominators: Vec<Vec<f64>>,
}

impl RegistryRates {
    /// Age weights are normalized to sum to one.
    pub fn new(
        age_weights: Vec<f64>,
        rates: Vec<Vec<f64>>,
        denominators: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = age_weights.len();
        if k == 0 || rates.is_empty() {
            return Err(DisparityError::InvalidInput(
                "registry rates need at least one group and one age stratum".into(),
            ));
        }
        if age_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(DisparityError::InvalidInput(
                "age weights must be nonnegative".into(),
            ));
        }
        let total = compensated_sum(age_weights.iter().copied());
        if !(total > 0.0) {
            return Err(DisparityError::InvalidInput("age weights sum to zero".into()));
        }
        if (total - 1.0).abs() > 1e-12 {
            log::warn!("age weights sum to {total}; normalizing");
        }
        if rates.len() != denominators.len() {
            return Err(DisparityError::InvalidInput(
                "rates and denominators disagree on the number of groups".into(),
            ));
        }
        for (j, (r, n)) in rates.iter().zip(&denominators).enumerate() {
            if r.len() != k || n.len() != k {
                return Err(DisparityError::InvalidInput(format!(
                    "group {j}: expected {k} age strata"
                )));
            }
            if r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(DisparityError::InvalidInput(format!(
                    "group {j}: rates must be nonnegative"
                )));
            }
            if n.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(DisparityError::InvalidInput(format!(
                    "group {j}: denominators must be positive"
                )));
            }
        }
        Ok(Self {
            age_weights: age_weights.iter().map(|w| w / total).collect(),
            rates,
            denominators,
        })
    }

    /// One pseudo age stratum per group, recovered from a published rate and
    /// its standard error: effective count `(ȳ/SE)²`, denominator `ȳ/SE²`.
    pub fn from_mean_se(means: &[f64], std_errors: &[f64]) -> Result<Self> {
        if means.len() != std_errors.len() {
            return Err(DisparityError::InvalidInput(
                "means and standard errors must align".into(),
            ));
        }
        let mut rates = Vec::with_capacity(means.len());
        let mut denominators = Vec::with_capacity(means.len());
        for (j, (&y, &se)) in means.iter().zip(std_errors).enumerate() {
            if !(y > 0.0 && se > 0.0 && y.is_finite() && se.is_finite()) {
                return Err(DisparityError::InvalidInput(format!(
                    "group {j}: effective counts need a positive rate and standard error"
                )));
            }
            rates.push(vec![y]);
            denominators.push(vec![y / (se * se)]);
        }
        Self::new(vec![1.0], rates, denominators)
    }

    pub fn n_groups(&self) -> usize {
        self.rates.len()
    }

    pub fn age_weights(&self) -> &[f64] {
        &self.age_weights
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn denominators(&self) -> &[Vec<f64>] {
        &self.denominators
    }

    /// Expected case counts `rate × denominator` per group and age stratum.
    pub fn expected_counts(&self) -> Vec<Vec<f64>> {
        self.rates
            .iter()
            .zip(&self.denominators)
            .map(|(r, n)| r.iter().zip(n).map(|(r, n)| r * n).collect())
            .collect()
    }

    /// Same denominators and weights with new rates.
    pub fn with_rates(&self, rates: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.age_weights.clone(), rates, self.denominators.clone())
    }
}

/// Age-adjusted means `Σ_k ω_k ū_kj` and Poisson variances `Σ_k ω_k² ū_kj / n_kj`.
pub fn registry_moments(rates: &RegistryRates) -> (Vec<f64>, Vec<f64>) {
    let w = &rates.age_weights;
    rates
        .rates
        .iter()
        .zip(&rates.denominators)
        .map(|(u, n)| {
            let mean = compensated_sum(w.iter().zip(u).map(|(w, u)| w * u));
            let var = compensated_sum(w.iter().zip(u).zip(n).map(|((w, u), n)| w * w * u / n));
            (mean, var)
        })
        .unzip()
}

/// `∂RI/∂ȳ_j = w̄_ν(R_j) p_j [1/H*(ν,0) − 1/(ȳ_j^α H*(ν,α)^{1−α})]` with the
/// group shares held fixed.
pub fn renyi_gradient(dist: &GroupedDistribution, params: &IndexParams) -> Result<Vec<f64>> {
    params.validate()?;
    let means = dist.means();
    if means.iter().any(|&y| y <= 0.0) {
        return Err(DisparityError::DomainError(
            "the gradient needs every group outcome to be positive".into(),
        ));
    }
    let ses = distribution_weights(dist, params.nu)?.ses_shares(&dist.shares());
    let h0 = equally_distributed_equivalent(&ses, &means, 0.0)?;
    let ha = equally_distributed_equivalent(&ses, &means, params.alpha)?;
    Ok(ses
        .iter()
        .zip(&means)
        .map(|(q, &y)| q * (1.0 / h0 - 1.0 / (ha * (y / ha).powf(params.alpha))))
        .collect())
}

/// `Var[RI] = Σ_j (∂RI/∂ȳ_j)² Var[ȳ_j]`.
pub fn delta_method_variance(
    dist: &GroupedDistribution,
    variances: &[f64],
    params: &IndexParams,
) -> Result<IndexEstimate> {
    if variances.len() != dist.len() {
        return Err(DisparityError::InvalidInput(format!(
            "expected {} variances, got {}",
            dist.len(),
            variances.len()
        )));
    }
    if variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(DisparityError::InvalidInput(
            "variances must be finite and nonnegative".into(),
        ));
    }
    let value = renyi_index(dist, params)?;
    let grad = renyi_gradient(dist, params)?;
    let var = compensated_sum(grad.iter().zip(variances).map(|(g, v)| g * g * v));
    Ok(IndexEstimate::normal(
        value,
        var.sqrt(),
        DEFAULT_LEVEL,
        InferenceMethod::DeltaMethod,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::fixtures_for_tests::hypothetical;

    #[test]
    fn single_stratum_is_crude_poisson() {
        let r = RegistryRates::new(vec![1.0], vec![vec![12.0]], vec![vec![3.0]]).unwrap();
        let (m, v) = registry_moments(&r);
        assert_eq!(m, vec![12.0]);
        assert_eq!(v, vec![4.0]);
    }

    #[test]
    fn symmetric_strata() {
        let r = RegistryRates::new(vec![0.5, 0.5], vec![vec![6.0, 6.0]], vec![vec![10.0, 10.0]])
            .unwrap();
        let (m, v) = registry_moments(&r);
        assert!((m[0] - 6.0).abs() < 1e-15);
        assert!((v[0] - 6.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn three_age_groups_brute_force() {
        let w = vec![0.2, 0.5, 0.3];
        let u = vec![vec![1.0, 4.0, 9.0], vec![2.0, 3.0, 5.0]];
        let n = vec![vec![10.0, 20.0, 30.0], vec![5.0, 8.0, 12.0]];
        let r = RegistryRates::new(w, u, n).unwrap();
        let (m, v) = registry_moments(&r);
        assert!((m[0] - (0.2 + 2.0 + 2.7)).abs() < 1e-12);
        assert!((m[1] - (0.4 + 1.5 + 1.5)).abs() < 1e-12);
        let v0 = 0.04 * 1.0 / 10.0 + 0.25 * 4.0 / 20.0 + 0.09 * 9.0 / 30.0;
        let v1 = 0.04 * 2.0 / 5.0 + 0.25 * 3.0 / 8.0 + 0.09 * 5.0 / 12.0;
        assert!((v[0] - v0).abs() < 1e-14 && (v[1] - v1).abs() < 1e-14);
    }

    #[test]
    fn bad_denominator_rejected() {
        assert!(RegistryRates::new(vec![1.0], vec![vec![1.0]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn count_recovery() {
        let r = RegistryRates::from_mean_se(&[9.6], &[0.484]).unwrap();
        let c = r.expected_counts()[0][0];
        assert!((c - (9.6f64 / 0.484).powi(2)).abs() < 1e-9);
        let (_, v) = registry_moments(&r);
        assert!((v[0] - 0.484f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn euler_relation() {
        for n in 1..=3 {
            let d = hypothetical(n);
            for (alpha, nu) in [(2.0, 1.0), (1.0, 3.0), (0.5, 2.0)] {
                let g = renyi_gradient(&d, &IndexParams::with(alpha, nu).unwrap()).unwrap();
                let s: f64 = g.iter().zip(d.means()).map(|(g, y)| g * y).sum();
                assert!(s.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_variances_zero_se() {
        let d = hypothetical(1);
        let e = delta_method_variance(&d, &[0.0; 4], &IndexParams::with(2.0, 3.0).unwrap())
            .unwrap();
        assert_eq!(e.std_error, 0.0);
    }
}
