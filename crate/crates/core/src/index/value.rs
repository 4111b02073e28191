use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::params::{IndexParams, Reference};
use crate::error::DisparityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexKind {
    /// Rank-dependent Rényi index `RI_α^(ν)`.
    RI,
    /// Rank-dependent reference-invariant generalized entropy `GE_α^(ν)`.
    GE,
    /// `1 − e^{−GE}`, the GE index mapped onto [0, 1] like the Atkinson form.
    GeStandardized,
    /// `A_α^(ν) = 1 − e^{−RI}`.
    Atkinson,
    /// `A_α^(ν) / A_∞^(ν)`.
    AtkinsonRatio,
    ConcentrationClassical,
    ConcentrationExtended,
    /// Makdissi–Yazbeck `C(ν, α)`.
    ConcentrationTwoParam,
    /// Wagstaff `H(ν)`.
    AchievementWagstaff,
    /// Makdissi–Yazbeck `H*(ν, α)`.
    AchievementMY,
    /// Weighted least-squares slope `b(ν, α)`.
    SlopeRegression,
}

impl IndexKind {
    pub const ALL: [IndexKind; 11] = [
        IndexKind::RI,
        IndexKind::GE,
        IndexKind::GeStandardized,
        IndexKind::Atkinson,
        IndexKind::AtkinsonRatio,
        IndexKind::ConcentrationClassical,
        IndexKind::ConcentrationExtended,
        IndexKind::ConcentrationTwoParam,
        IndexKind::AchievementWagstaff,
        IndexKind::AchievementMY,
        IndexKind::SlopeRegression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::RI => "ri",
            IndexKind::GE => "ge",
            IndexKind::GeStandardized => "ge-std",
            IndexKind::Atkinson => "atkinson",
            IndexKind::AtkinsonRatio => "atkinson-ratio",
            IndexKind::ConcentrationClassical => "concentration-classical",
            IndexKind::ConcentrationExtended => "concentration-extended",
            IndexKind::ConcentrationTwoParam => "concentration",
            IndexKind::AchievementWagstaff => "wagstaff",
            IndexKind::AchievementMY => "achievement",
            IndexKind::SlopeRegression => "slope",
        }
    }

    /// Outputs in outcome units rather than unit-free.
    pub fn carries_units(self) -> bool {
        matches!(self, IndexKind::AchievementWagstaff | IndexKind::AchievementMY)
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexKind {
    type Err = DisparityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        IndexKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == key)
            .or(match key.as_str() {
                "renyi" => Some(IndexKind::RI),
                "c" | "c2" => Some(IndexKind::ConcentrationTwoParam),
                "h" | "h-star" => Some(IndexKind::AchievementMY),
                _ => None,
            })
            .ok_or_else(|| DisparityError::InvalidInput(format!("unknown index kind '{s}'")))
    }
}

/// One evaluated index. `params.alpha` / `params.nu` are `+∞` for the
/// closed-form limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    pub kind: IndexKind,
    pub value: f64,
    pub params: IndexParams,
}

impl IndexValue {
    pub(crate) fn new(kind: IndexKind, value: f64, params: IndexParams) -> Self {
        Self {
            kind,
            value,
            params,
        }
    }

    pub(crate) fn limit(kind: IndexKind, value: f64, alpha: f64, nu: f64) -> Self {
        Self::new(
            kind,
            value,
            IndexParams {
                alpha,
                nu,
                reference: Reference::PopulationMean,
            },
        )
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}
