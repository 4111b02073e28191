//! Weighted least-squares form of the rank-dependent RI: the power-transformed
//! outcomes regressed on the standardized SES weights.

use super::distribution::GroupedDistribution;
use super::params::{is_unit_alpha, IndexParams, UNIT_ALPHA_TOLERANCE};
use super::rank::distribution_weights;
use super::transform::{box_cox, box_cox_inverse, inverse_transform, power_transform};
use crate::error::{DisparityError, Result};
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    /// `b(ν, α)`
    pub slope: f64,
    /// `a(ν, α) = S*(1, α) − b(ν, α)` on the `f_α` scale.
    pub intercept: f64,
    /// `W_2/W_1² − 1`, the weighted variance of the regressor.
    pub regressor_variance: f64,
    /// RI rebuilt from the fitted slopes and intercepts.
    pub ri: f64,
}

/// Slope and intercept of the weighted least-squares line of `y` on `x`.
pub fn weighted_least_squares(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() != w.len() || x.len() < 2 {
        return Err(DisparityError::InvalidInput(
            "regression needs at least two aligned points".into(),
        ));
    }
    let sw = compensated_sum(w.iter().copied());
    let mx = compensated_sum(x.iter().zip(w).map(|(x, w)| x * w)) / sw;
    let my = compensated_sum(y.iter().zip(w).map(|(y, w)| y * w)) / sw;
    let sxx = compensated_sum(x.iter().zip(w).map(|(x, w)| w * (x - mx) * (x - mx)));
    let sxy = compensated_sum(
        x.iter()
            .zip(y)
            .zip(w)
            .map(|((x, y), w)| w * (x - mx) * (y - my)),
    );
    if !(sxx > 0.0) {
        return Err(DisparityError::DegenerateRegression(
            "regressor has zero weighted variance".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

struct Moments {
    standardized: Vec<f64>,
    shares: Vec<f64>,
    variance: f64,
}

fn moments(dist: &GroupedDistribution, nu: f64) -> Result<Moments> {
    if dist.len() < 2 {
        return Err(DisparityError::DegenerateRegression(
            "regression needs at least two groups".into(),
        ));
    }
    if nu == 1.0 {
        return Err(DisparityError::DegenerateRegression(
            "nu = 1 gives constant SES weights".into(),
        ));
    }
    let w = distribution_weights(dist, nu)?;
    let variance = w.standardized_variance();
    if !(variance > 0.0) {
        return Err(DisparityError::DegenerateRegression(
            "standardized SES weights have zero variance".into(),
        ));
    }
    Ok(Moments {
        standardized: w.standardized(),
        shares: dist.shares(),
        variance,
    })
}

/// Slope `(S*(ν) − S*(1)) / (W_2/W_1² − 1)` and intercept `S*(1) − slope` for
/// already-transformed outcomes `f`.
fn fit(m: &Moments, f: &[f64]) -> (f64, f64) {
    let s_nu = compensated_sum(
        m.standardized
            .iter()
            .zip(&m.shares)
            .zip(f)
            .map(|((w, p), f)| w * p * f),
    );
    let s_one = compensated_sum(m.shares.iter().zip(f).map(|(p, f)| p * f));
    let slope = (s_nu - s_one) / m.variance;
    (slope, s_one - slope)
}

/// Slope `b(ν, α)`, intercept `a(ν, α)` (both on the `f_α` scale of the
/// supplied outcomes), and RI rebuilt as
/// `−ln{f_α^{-1}[a(ν,α) + k·b(ν,α)] / [a(ν,0) + k·b(ν,0)]}` with `k = W_2/W_1²`.
pub fn regression_path(dist: &GroupedDistribution, params: &IndexParams) -> Result<RegressionFit> {
    params.validate()?;
    let m = moments(dist, params.nu)?;
    let alpha = params.alpha;
    let means = dist.means();
    if alpha >= 1.0 - UNIT_ALPHA_TOLERANCE && means.contains(&0.0) {
        return Err(DisparityError::DomainError(
            "power transform undefined for a zero outcome".into(),
        ));
    }
    let k = m.variance + 1.0;

    // Fit on outcomes scaled to a unit population mean and map back after.
    // Near α = 1 the Box–Cox form avoids the 1/(1−α) offset.
    let scale = dist.population_mean();
    let z: Vec<f64> = means.iter().map(|y| y / scale).collect();
    let box_cox_scale = (1.0 - alpha).abs() < 0.5;
    let transformed: Vec<f64> = if box_cox_scale {
        z.iter().map(|&y| box_cox(y, alpha)).collect()
    } else {
        z.iter()
            .map(|&y| power_transform(y, alpha))
            .collect::<Result<_>>()?
    };
    let (slope, intercept) = fit(&m, &transformed);
    let (slope0, intercept0) = fit(&m, &z);

    let level = intercept + k * slope;
    let achieved = if box_cox_scale {
        box_cox_inverse(level, alpha)
    } else {
        inverse_transform(level, alpha)?
    };
    let reference = intercept0 + k * slope0;
    let ri = (-(achieved / reference).ln()).max(0.0);

    let (slope, intercept) = if is_unit_alpha(alpha) {
        (slope, intercept + scale.ln())
    } else {
        let shift = if box_cox_scale { 1.0 / (1.0 - alpha) } else { 0.0 };
        let factor = scale.powf(1.0 - alpha);
        (slope * factor, (intercept + shift) * factor)
    };
    Ok(RegressionFit {
        slope,
        intercept,
        regressor_variance: m.variance,
        ri,
    })
}

/// Slope of the weighted regression of
/// `(W_2/W_1² − 1) f_α(ȳ_j) + S*(1, α) w̄_ν(R_j)` on `w̄_ν(R_j)`; it equals
/// `S*(ν, α)`.
pub fn convenient_regression_slope(
    dist: &GroupedDistribution,
    params: &IndexParams,
) -> Result<f64> {
    params.validate()?;
    let m = moments(dist, params.nu)?;
    let f: Vec<f64> = dist
        .means()
        .iter()
        .map(|&y| power_transform(y, params.alpha))
        .collect::<Result<_>>()?;
    let s_one = compensated_sum(m.shares.iter().zip(&f).map(|(p, f)| p * f));
    let response: Vec<f64> = f
        .iter()
        .zip(&m.standardized)
        .map(|(f, w)| m.variance * f + s_one * w)
        .collect();
    Ok(weighted_least_squares(&m.standardized, &response, &m.shares)?.0)
}
