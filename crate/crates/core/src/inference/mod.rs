//! Analytic standard errors: Taylor linearization over stratified cluster
//! survey totals and the Poisson delta method for age-adjusted rates.

mod registry;
mod survey;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{DisparityError, Result};
use crate::index::IndexValue;

pub use registry::{delta_method_variance, registry_moments, renyi_gradient, RegistryRates};
pub use survey::{
    group_mean_std_errors, linearized_variance, renyi_from_totals, survey_totals, totals_partials, RenyiTerms,
    SurveyMicrodata, SurveyRecord, TotalsDecomposition, TotalsPartials,
};
pub(crate) use survey::ClusterTotals;

pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InferenceMethod {
    Linearization,
    DeltaMethod,
    Bootstrap,
    NullSimulation,
}

impl InferenceMethod {
    pub fn name(self) -> &'static str {
        match self {
            InferenceMethod::Linearization => "linearization",
            InferenceMethod::DeltaMethod => "delta",
            InferenceMethod::Bootstrap => "bootstrap",
            InferenceMethod::NullSimulation => "null-simulation",
        }
    }
}

impl fmt::Display for InferenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InferenceMethod {
    type Err = DisparityError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linearization" | "linearized" | "taylor" => Ok(InferenceMethod::Linearization),
            "delta" | "delta-method" => Ok(InferenceMethod::DeltaMethod),
            "bootstrap" => Ok(InferenceMethod::Bootstrap),
            "null" | "null-simulation" => Ok(InferenceMethod::NullSimulation),
            other => Err(DisparityError::InvalidInput(format!(
                "unknown inference method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl Interval {
    /// `value ± z_{(1+level)/2} · se`.
    pub fn normal(value: f64, se: f64, level: f64) -> Self {
        if se == 0.0 || !value.is_finite() {
            return Self {
                lo: value,
                hi: value,
                level,
            };
        }
        let z = standard_normal().inverse_cdf(0.5 + level / 2.0);
        Self {
            lo: value - z * se,
            hi: value + z * se,
            level,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A point value with its standard error and interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: IndexValue,
    pub std_error: f64,
    pub interval: Interval,
    pub method: InferenceMethod,
}

impl IndexEstimate {
    pub fn normal(value: IndexValue, std_error: f64, level: f64, method: InferenceMethod) -> Self {
        Self {
            value,
            std_error,
            interval: Interval::normal(value.value, std_error, level),
            method,
        }
    }

    /// The same estimate with its normal interval recomputed at `level`.
    pub fn at_level(self, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(DisparityError::InvalidInput(format!(
                "confidence level must lie in (0, 1), got {level}"
            )));
        }
        Ok(Self::normal(self.value, self.std_error, level, self.method))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTest {
    pub difference: f64,
    pub std_error: f64,
    /// Normal interval for the difference at the first estimate's level.
    pub interval: Interval,
    pub z: f64,
    pub p_value: f64,
}

/// Two-sided z-test of `v1 − v2` assuming independent estimates.
pub fn difference_test(est1: &IndexEstimate, est2: &IndexEstimate) -> Result<DifferenceTest> {
    let (v1, v2) = (est1.value.value, est2.value.value);
    if !(v1.is_finite() && v2.is_finite()) {
        return Err(DisparityError::DomainError(
            "difference test needs finite index values".into(),
        ));
    }
    let se = est1.std_error.hypot(est2.std_error);
    if !(se > 0.0) || !se.is_finite() {
        return Err(DisparityError::DegenerateTest(format!(
            "combined standard error is {se}"
        )));
    }
    let difference = v1 - v2;
    let z = difference / se;
    Ok(DifferenceTest {
        difference,
        std_error: se,
        interval: Interval::normal(difference, se, est1.interval.level),
        z,
        p_value: two_sided_p(z),
    })
}

pub(crate) fn two_sided_p(z: f64) -> f64 {
    (2.0 * standard_normal().sf(z.abs())).min(1.0)
}

fn standard_normal() -> Normal {
    Normal::standard()
}
