use super::params::is_unit_alpha;
use crate::error::{DisparityError, Result};

/// Generalized logarithm `f_α(r) = r^{1−α}/(1−α)`, or `ln r` at α = 1.
pub fn power_transform(r: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(DisparityError::InvalidInput(format!("bad alpha {alpha}")));
    }
    if r.is_nan() || r < 0.0 || (r == 0.0 && alpha >= 1.0) {
        return Err(DisparityError::DomainError(format!(
            "power transform undefined at r = {r} for alpha = {alpha}"
        )));
    }
    if is_unit_alpha(alpha) {
        Ok(r.ln())
    } else {
        Ok(r.powf(1.0 - alpha) / (1.0 - alpha))
    }
}

/// Inverse `f_α^{-1}(s) = [(1−α)s]^{1/(1−α)}`, or `e^s` at α = 1.
pub fn inverse_transform(s: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(DisparityError::InvalidInput(format!("bad alpha {alpha}")));
    }
    if is_unit_alpha(alpha) {
        if s.is_nan() {
            return Err(DisparityError::DomainError("inverse of NaN".into()));
        }
        return Ok(s.exp());
    }
    let base = (1.0 - alpha) * s;
    if !(base > 0.0) || !base.is_finite() {
        return Err(DisparityError::DomainError(format!(
            "inverse transform needs (1 - alpha) * s > 0, got {base}"
        )));
    }
    Ok(base.powf(1.0 / (1.0 - alpha)))
}

/// Box–Cox form `(r^{1−α} − 1)/(1−α)`, equal to `f_α(r) − 1/(1−α)`;
/// evaluated through `expm1` so it stays accurate as α → 1.
pub(crate) fn box_cox(r: f64, alpha: f64) -> f64 {
    let ln_r = r.ln();
    if is_unit_alpha(alpha) {
        ln_r
    } else {
        ((1.0 - alpha) * ln_r).exp_m1() / (1.0 - alpha)
    }
}

/// Inverse of [`box_cox`].
pub(crate) fn box_cox_inverse(t: f64, alpha: f64) -> f64 {
    if is_unit_alpha(alpha) {
        t.exp()
    } else {
        ((1.0 - alpha) * t).ln_1p() / (1.0 - alpha)
    }
    .exp()
}
