use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{DisparityError, Result};
use crate::index::GroupedDistribution;
use crate::inference::{SurveyMicrodata, SurveyRecord};

/// Stratified two-stage design for synthetic binary-outcome microdata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub strata: usize,
    pub clusters_per_stratum: usize,
    pub obs_per_cluster: usize,
    /// Standard deviation of the stratum effect on the logit scale.
    pub stratum_sd: f64,
    /// Standard deviation of the cluster effect on the logit scale.
    pub cluster_sd: f64,
    /// Base weights are drawn uniformly from `1000 · (1 ± weight_spread)`.
    pub weight_spread: f64,
    /// Post-stratify weights within group × outcome cells so the weighted
    /// shares and prevalences equal the margins exactly.
    pub calibrate: bool,
}

impl Default for DesignSpec {
    /// About the size of a two-year national health examination survey
    /// subsample: 15 strata of 2 clusters with 100 observations each.
    fn default() -> Self {
        Self {
            strata: 15,
            clusters_per_stratum: 2,
            obs_per_cluster: 100,
            stratum_sd: 0.15,
            cluster_sd: 0.15,
            weight_spread: 0.5,
            calibrate: true,
        }
    }
}

impl DesignSpec {
    fn validate(&self) -> Result<()> {
        if self.strata == 0 || self.clusters_per_stratum < 2 || self.obs_per_cluster == 0 {
            return Err(DisparityError::InvalidInput(
                "design needs at least one stratum, two clusters per stratum and one observation per cluster".into(),
            ));
        }
        for (name, v) in [("stratum_sd", self.stratum_sd), ("cluster_sd", self.cluster_sd)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DisparityError::InvalidInput(format!("{name} must be nonnegative")));
            }
        }
        if !(self.weight_spread >= 0.0 && self.weight_spread < 1.0) {
            return Err(DisparityError::InvalidInput("weight_spread must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Binary-outcome microdata whose group shares and prevalences follow
/// `margins`. Outcomes are read as proportions, or as percentages when the
/// units label is `percent`.
pub fn synthesize_microdata(
    margins: &GroupedDistribution,
    spec: &DesignSpec,
    seed: u64,
) -> Result<SurveyMicrodata> {
    spec.validate()?;
    let to_prop = if margins.units().eq_ignore_ascii_case("percent") {
        0.01
    } else {
        1.0
    };
    let prev: Vec<f64> = margins.means().iter().map(|y| y * to_prop).collect();
    if prev.iter().any(|&p| p > 1.0) {
        return Err(DisparityError::InvalidInput(
            "binary outcome margins must lie in [0, 1] (or [0, 100] percent)".into(),
        ));
    }
    let shares = margins.shares();
    let m = shares.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picker = WeightedIndex::new(&shares).map_err(|e| DisparityError::InvalidInput(e.to_string()))?;
    let stratum_fx = Normal::new(0.0, spec.stratum_sd).map_err(|e| DisparityError::InvalidInput(e.to_string()))?;
    let cluster_fx = Normal::new(0.0, spec.cluster_sd).map_err(|e| DisparityError::InvalidInput(e.to_string()))?;

    let mut records = Vec::with_capacity(spec.strata * spec.clusters_per_stratum * spec.obs_per_cluster);
    for s in 0..spec.strata {
        let a = stratum_fx.sample(&mut rng);
        for c in 0..spec.clusters_per_stratum {
            let b = cluster_fx.sample(&mut rng);
            for _ in 0..spec.obs_per_cluster {
                let group = picker.sample(&mut rng);
                let weight = 1000.0 * (1.0 + spec.weight_spread * (2.0 * rng.random::<f64>() - 1.0));
                let p = prev[group];
                let pi = if p == 0.0 || p == 1.0 { p } else { logistic(logit(p) + a + b) };
                let u: f64 = rng.random();
                records.push(SurveyRecord {
                    stratum: (s + 1).to_string(),
                    cluster: (c + 1).to_string(),
                    weight,
                    y: if u < pi { 1.0 } else { 0.0 },
                    group,
                });
            }
        }
    }

    if spec.calibrate {
        calibrate(&mut records, &shares, &prev, m)?;
    }
    SurveyMicrodata::new(records, margins.labels().iter().map(|s| s.to_string()).collect())
}

/// Rescales weights within each group × outcome cell to hit the target cell
/// totals. An empty cell with a positive target borrows one observation of
/// the same group by flipping its outcome.
fn calibrate(records: &mut [SurveyRecord], shares: &[f64], prev: &[f64], m: usize) -> Result<()> {
    let total: f64 = records.iter().map(|r| r.weight).sum();
    for j in 0..m {
        let members: Vec<usize> = (0..records.len()).filter(|&i| records[i].group == j).collect();
        if members.is_empty() {
            return Err(DisparityError::InvalidInput(format!(
                "group {} drew no observations; enlarge the design",
                j + 1
            )));
        }
        for outcome in [0.0, 1.0] {
            let target_share = if outcome == 1.0 { prev[j] } else { 1.0 - prev[j] };
            let has = members.iter().any(|&i| records[i].y == outcome);
            if target_share > 0.0 && !has {
                let donors = members.iter().filter(|&&i| records[i].y != outcome).count();
                if donors < 2 {
                    return Err(DisparityError::InvalidInput(format!(
                        "group {} is too small to carry both outcomes",
                        j + 1
                    )));
                }
                records[members[0]].y = outcome;
            }
        }
        for outcome in [0.0, 1.0] {
            let target = total * shares[j] * if outcome == 1.0 { prev[j] } else { 1.0 - prev[j] };
            let cell: Vec<usize> = members.iter().copied().filter(|&i| records[i].y == outcome).collect();
            let current: f64 = cell.iter().map(|&i| records[i].weight).sum();
            if cell.is_empty() {
                continue;
            }
            if target == 0.0 {
                return Err(DisparityError::InvalidInput(format!(
                    "group {} has outcomes incompatible with a degenerate margin",
                    j + 1
                )));
            }
            for i in cell {
                records[i].weight *= target / current;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::survey_totals;

    fn margins(prev: &[f64]) -> GroupedDistribution {
        GroupedDistribution::from_shares(&[0.232, 0.235, 0.274, 0.088, 0.171], prev)
            .unwrap()
            .with_units("percent")
    }

    #[test]
    fn calibrated_margins_exact() {
        let d = synthesize_microdata(&margins(&[21.6, 17.4, 15.7, 14.2, 11.5]), &DesignSpec::default(), 1).unwrap();
        let t = survey_totals(&d).unwrap();
        let target = [0.216, 0.174, 0.157, 0.142, 0.115];
        for j in 0..5 {
            assert!((t.u1[j] / t.u0[j] - target[j]).abs() < 1e-12);
        }
        let shares = margins(&[1.0; 5]).shares();
        for j in 0..5 {
            assert!((t.u0[j] / t.u0_total - shares[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_prevalence_group() {
        let d = synthesize_microdata(&margins(&[20.0, 0.0, 15.0, 10.0, 5.0]), &DesignSpec::default(), 3).unwrap();
        assert!(d.records().iter().filter(|r| r.group == 1).all(|r| r.y == 0.0));
    }

    #[test]
    fn deterministic() {
        let m = margins(&[21.6, 17.4, 15.7, 14.2, 11.5]);
        let a = synthesize_microdata(&m, &DesignSpec::default(), 9).unwrap();
        let b = synthesize_microdata(&m, &DesignSpec::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nhanes_margins_and_standard_errors() {
        for name in ["nhanes-2001-2004", "nhanes-2005-2008", "nhanes-2009-2010"] {
            let t = crate::io::load_fixture(name).unwrap();
            let d = synthesize_microdata(&t.dist, &DesignSpec::default(), 11).unwrap();
            let se = crate::inference::group_mean_std_errors(&d).unwrap();
            let published = t.std_errors.unwrap();
            for j in 0..se.len() {
                let ratio = 100.0 * se[j] / published[j];
                eprintln!("{name} group {j}: linearized {:.3} published {:.3}", 100.0 * se[j], published[j]);
                assert!((0.5..=2.0).contains(&ratio), "{name} group {j}: ratio {ratio}");
            }
        }
    }

    #[test]
    fn infeasible_margin() {
        let m = GroupedDistribution::from_shares(&[0.5, 0.5], &[1.5, 0.2]).unwrap();
        assert!(matches!(
            synthesize_microdata(&m, &DesignSpec::default(), 0),
            Err(DisparityError::InvalidInput(_))
        ));
    }
}
