use serde::{Deserialize, Serialize};

use crate::error::{DisparityError, Result};
use crate::numeric::compensated_sum;

/// Tolerance on the agreement between supplied counts and shares.
const COUNT_SHARE_TOLERANCE: f64 = 1e-6;

/// One socioeconomic group: its population share and average adverse outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub label: String,
    pub share: f64,
    pub mean_outcome: f64,
    pub count: Option<u64>,
}

impl GroupRecord {
    pub fn new(label: impl Into<String>, share: f64, mean_outcome: f64) -> Self {
        Self {
            label: label.into(),
            share,
            mean_outcome,
            count: None,
        }
    }

    pub fn with_count(mut self, count: u64) -> Self {
        self.count = Some(count);
        self
    }
}

/// Groups ordered from lowest to highest SES, shares normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedDistribution {
    groups: Vec<GroupRecord>,
    units: String,
    raw_share_total: f64,
}

impl GroupedDistribution {
    /// Validates the groups and normalizes their shares.
    pub fn new(groups: Vec<GroupRecord>, units: impl Into<String>) -> Result<Self> {
        if groups.is_empty() {
            return Err(DisparityError::InvalidInput("no groups".into()));
        }
        for (j, g) in groups.iter().enumerate() {
            if !(g.share.is_finite() && g.share > 0.0) {
                return Err(DisparityError::InvalidInput(format!(
                    "group {} ({}) has non-positive share {}",
                    j + 1,
                    g.label,
                    g.share
                )));
            }
            if !(g.mean_outcome.is_finite() && g.mean_outcome >= 0.0) {
                return Err(DisparityError::InvalidInput(format!(
                    "group {} ({}) has invalid mean outcome {}",
                    j + 1,
                    g.label,
                    g.mean_outcome
                )));
            }
        }
        if groups.iter().all(|g| g.mean_outcome == 0.0) {
            return Err(DisparityError::InvalidInput(
                "all group outcomes are zero".into(),
            ));
        }
        let raw_share_total = compensated_sum(groups.iter().map(|g| g.share));
        let mut groups = groups;
        for g in groups.iter_mut() {
            g.share /= raw_share_total;
        }
        if groups.iter().all(|g| g.count.is_some()) {
            let total: u64 = groups.iter().map(|g| g.count.unwrap_or(0)).sum();
            if total == 0 {
                return Err(DisparityError::InvalidInput("group counts sum to zero".into()));
            }
            for g in &groups {
                let implied = g.count.unwrap_or(0) as f64 / total as f64;
                if (implied - g.share).abs() > COUNT_SHARE_TOLERANCE {
                    return Err(DisparityError::InvalidInput(format!(
                        "group {} count implies share {implied}, record says {}",
                        g.label, g.share
                    )));
                }
            }
        } else if groups.iter().any(|g| g.count == Some(0)) {
            return Err(DisparityError::InvalidInput("zero group count".into()));
        }
        Ok(Self {
            groups,
            units: units.into(),
            raw_share_total,
        })
    }

    /// Unlabelled groups `g1..gM` from parallel share and outcome slices.
    pub fn from_shares(shares: &[f64], means: &[f64]) -> Result<Self> {
        if shares.len() != means.len() {
            return Err(DisparityError::InvalidInput(format!(
                "{} shares but {} outcomes",
                shares.len(),
                means.len()
            )));
        }
        let groups = shares
            .iter()
            .zip(means)
            .enumerate()
            .map(|(j, (&p, &y))| GroupRecord::new(format!("g{}", j + 1), p, y))
            .collect();
        Self::new(groups, "")
    }

    pub fn groups(&self) -> &[GroupRecord] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    /// Sum of the shares as supplied, before normalization.
    pub fn raw_share_total(&self) -> f64 {
        self.raw_share_total
    }

    pub fn shares(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.share).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.mean_outcome).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.groups.iter().map(|g| g.label.as_str()).collect()
    }

    /// Population average outcome `Σ p_j ȳ_j`.
    pub fn population_mean(&self) -> f64 {
        compensated_sum(self.groups.iter().map(|g| g.share * g.mean_outcome))
    }

    pub fn min_outcome(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.mean_outcome)
            .fold(f64::INFINITY, f64::min)
    }

    /// Same groups and shares with replaced outcomes.
    pub fn with_means(&self, means: &[f64]) -> Result<Self> {
        if means.len() != self.len() {
            return Err(DisparityError::InvalidInput(format!(
                "expected {} outcomes, got {}",
                self.len(),
                means.len()
            )));
        }
        let groups = self
            .groups
            .iter()
            .zip(means)
            .map(|(g, &y)| GroupRecord {
                mean_outcome: y,
                ..g.clone()
            })
            .collect();
        Self::new(groups, self.units.clone())
    }

    /// Multiplies every outcome by `factor`, e.g. percent to proportion.
    pub fn scaled(&self, factor: f64, units: impl Into<String>) -> Result<Self> {
        let means: Vec<f64> = self.means().iter().map(|y| y * factor).collect();
        let mut out = self.with_means(&means)?;
        out.units = units.into();
        Ok(out)
    }

    pub fn with_units(mut self, units: impl Into<String>) -> Self {
        self.units = units.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shares_are_normalized() {
        let d = GroupedDistribution::from_shares(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(d.shares(), vec![0.25, 0.75]);
        assert_eq!(d.raw_share_total(), 4.0);
        assert!((d.population_mean() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_groups() {
        assert!(GroupedDistribution::from_shares(&[], &[]).is_err());
        assert!(GroupedDistribution::from_shares(&[0.5, 0.0], &[1.0, 1.0]).is_err());
        assert!(GroupedDistribution::from_shares(&[0.5, 0.5], &[1.0, -1.0]).is_err());
        assert!(GroupedDistribution::from_shares(&[0.5, 0.5], &[0.0, 0.0]).is_err());
        assert!(GroupedDistribution::from_shares(&[0.5, 0.5], &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn counts_must_agree_with_shares() {
        let ok = vec![
            GroupRecord::new("a", 0.25, 1.0).with_count(25),
            GroupRecord::new("b", 0.75, 1.0).with_count(75),
        ];
        assert!(GroupedDistribution::new(ok, "").is_ok());
        let bad = vec![
            GroupRecord::new("a", 0.5, 1.0).with_count(25),
            GroupRecord::new("b", 0.5, 1.0).with_count(75),
        ];
        assert!(GroupedDistribution::new(bad, "").is_err());
    }
}
