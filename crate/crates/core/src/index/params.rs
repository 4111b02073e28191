use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DisparityError, Result};

/// `|α − 1|` below this selects the logarithmic branch.
pub const UNIT_ALPHA_TOLERANCE: f64 = 1e-9;

pub(crate) fn is_unit_alpha(alpha: f64) -> bool {
    (alpha - 1.0).abs() < UNIT_ALPHA_TOLERANCE
}

/// Reference against which relative disparities are formed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Reference {
    #[default]
    PopulationMean,
    SesWeightedMean,
    BestGroupRate,
    FixedTarget(f64),
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::PopulationMean => write!(f, "population-mean"),
            Reference::SesWeightedMean => write!(f, "ses-weighted-mean"),
            Reference::BestGroupRate => write!(f, "best-group"),
            Reference::FixedTarget(t) => write!(f, "target:{t}"),
        }
    }
}

impl FromStr for Reference {
    type Err = DisparityError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "population-mean" | "mean" | "population" => Ok(Reference::PopulationMean),
            "ses-weighted-mean" | "ses-weighted" | "ses" => Ok(Reference::SesWeightedMean),
            "best-group" | "best" | "min" => Ok(Reference::BestGroupRate),
            _ => match s.strip_prefix("target:") {
                Some(v) => {
                    let t: f64 = v.parse().map_err(|_| {
                        DisparityError::InvalidInput(format!("bad target value '{v}'"))
                    })?;
                    if !(t.is_finite() && t > 0.0) {
                        return Err(DisparityError::InvalidInput(format!(
                            "target must be positive, got {t}"
                        )));
                    }
                    Ok(Reference::FixedTarget(t))
                }
                None => Err(DisparityError::InvalidInput(format!(
                    "unknown reference '{s}'"
                ))),
            },
        }
    }
}

/// Pure health inequality aversion α, socioeconomic aversion ν, and the
/// disparity reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexParams {
    pub alpha: f64,
    pub nu: f64,
    pub reference: Reference,
}

impl IndexParams {
    pub fn new(alpha: f64, nu: f64, reference: Reference) -> Result<Self> {
        let p = Self {
            alpha,
            nu,
            reference,
        };
        p.validate()?;
        Ok(p)
    }

    /// Population-mean reference.
    pub fn with(alpha: f64, nu: f64) -> Result<Self> {
        Self::new(alpha, nu, Reference::PopulationMean)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(DisparityError::InvalidInput(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.nu.is_finite() && self.nu >= 1.0) {
            return Err(DisparityError::InvalidInput(format!(
                "nu must be finite and >= 1, got {}",
                self.nu
            )));
        }
        if let Reference::FixedTarget(t) = self.reference {
            if !(t.is_finite() && t > 0.0) {
                return Err(DisparityError::InvalidInput(format!(
                    "fixed target must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_nu(self, nu: f64) -> Self {
        Self { nu, ..self }
    }

    pub(crate) fn unit_alpha(&self) -> bool {
        is_unit_alpha(self.alpha)
    }
}

/// An aversion parameter that may sit at its closed-form infinite limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Aversion {
    Finite(f64),
    Infinite,
}

impl Aversion {
    pub fn as_f64(self) -> f64 {
        match self {
            Aversion::Finite(v) => v,
            Aversion::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Aversion::Infinite)
    }
}

impl fmt::Display for Aversion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aversion::Finite(v) => write!(f, "{v}"),
            Aversion::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Aversion {
    type Err = DisparityError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "+inf") {
            return Ok(Aversion::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| DisparityError::InvalidInput(format!("not a number: '{s}'")))?;
        if !v.is_finite() {
            return Err(DisparityError::InvalidInput(format!("not finite: '{s}'")));
        }
        Ok(Aversion::Finite(v))
    }
}
