use serde::{Deserialize, Serialize};

use super::distribution::GroupedDistribution;
use crate::error::{DisparityError, Result};
use crate::numeric::compensated_sum;

/// SES rank weights `w_ν(R_j) = ν(1 − R_j)^{ν−1}` and their moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankWeights {
    pub ranks: Vec<f64>,
    pub weights: Vec<f64>,
    /// `W_1(ν) = Σ w_ν(R_j) p_j`
    pub normalizer_w1: f64,
    /// `W_2(ν) = Σ w_ν(R_j)² p_j`
    pub second_moment_w2: f64,
    pub nu: f64,
}

impl RankWeights {
    /// Standardized weights `w̄_ν(R_j) = w_ν(R_j) / W_1(ν)`.
    pub fn standardized(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w / self.normalizer_w1)
            .collect()
    }

    /// SES-weighted shares `p̄_j^(ν) = w̄_ν(R_j) p_j`, summing to one.
    pub fn ses_shares(&self, shares: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(shares)
            .map(|(w, p)| w * p / self.normalizer_w1)
            .collect()
    }

    /// Weighted variance of the standardized weights, `W_2/W_1² − 1`.
    pub fn standardized_variance(&self) -> f64 {
        self.second_moment_w2 / (self.normalizer_w1 * self.normalizer_w1) - 1.0
    }
}

/// Midpoint ranks: `R_1 = p_1/2`, `R_{j+1} = p_{j+1}/2 + Σ_{k≤j} p_k`.
pub fn ranks_from_shares(shares: &[f64]) -> Result<Vec<f64>> {
    if shares.is_empty() {
        return Err(DisparityError::InvalidInput("empty group list".into()));
    }
    if shares.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(DisparityError::InvalidInput(
            "shares must be positive and finite".into(),
        ));
    }
    let total = compensated_sum(shares.iter().copied());
    let mut below = Vec::with_capacity(shares.len());
    let mut ranks = Vec::with_capacity(shares.len());
    for &p in shares {
        let cum = compensated_sum(below.iter().copied());
        ranks.push((cum + p / 2.0) / total);
        below.push(p);
    }
    Ok(ranks)
}

pub fn rank_positions(dist: &GroupedDistribution) -> Result<Vec<f64>> {
    ranks_from_shares(&dist.shares())
}

pub fn ses_weights(ranks: &[f64], nu: f64, shares: &[f64]) -> Result<RankWeights> {
    if !(nu.is_finite() && nu >= 1.0) {
        return Err(DisparityError::InvalidInput(format!(
            "nu must be finite and >= 1, got {nu}"
        )));
    }
    if ranks.len() != shares.len() || ranks.is_empty() {
        return Err(DisparityError::InvalidInput(
            "ranks and shares must be non-empty and of equal length".into(),
        ));
    }
    if ranks.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(DisparityError::InvalidInput(
            "ranks must lie strictly inside (0, 1)".into(),
        ));
    }
    let weights: Vec<f64> = ranks.iter().map(|&r| rank_weight(r, nu)).collect();
    let w1 = compensated_sum(weights.iter().zip(shares).map(|(w, p)| w * p));
    let w2 = compensated_sum(weights.iter().zip(shares).map(|(w, p)| w * w * p));
    Ok(RankWeights {
        ranks: ranks.to_vec(),
        weights,
        normalizer_w1: w1,
        second_moment_w2: w2,
        nu,
    })
}

/// `w_ν(R) = ν(1 − R)^{ν−1}`; exactly 1 when ν = 1.
pub fn rank_weight(rank: f64, nu: f64) -> f64 {
    if nu == 1.0 {
        1.0
    } else {
        nu * (1.0 - rank).powf(nu - 1.0)
    }
}

/// Ranks and weights for a distribution in one call.
pub fn distribution_weights(dist: &GroupedDistribution, nu: f64) -> Result<RankWeights> {
    let shares = dist.shares();
    let ranks = ranks_from_shares(&shares)?;
    ses_weights(&ranks, nu, &shares)
}
