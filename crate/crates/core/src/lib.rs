//! Rank-dependent Rényi health-disparity indices.
//!
//! The crate evaluates the rank-dependent Rényi index (RI) together with the
//! competing index families built on the same grouped data: generalized
//! entropy, Atkinson, the Wagstaff and Makdissi–Yazbeck concentration and
//! achievement indices, and a weighted least-squares slope form. Design-based
//! standard errors are available for stratified cluster surveys (Taylor
//! linearization over weighted totals) and for age-adjusted registry rates
//! (Poisson delta method), alongside a rescaled survey bootstrap and a
//! Poisson null simulation.
//!
//! Groups are always ordered from lowest to highest socioeconomic status.

pub mod error;
pub mod index;
pub mod inference;
pub mod io;
mod numeric;
pub mod resampling;
pub mod sweep;

pub use error::{DisparityError, Result};
pub use index::{
    Aversion, GroupRecord, GroupedDistribution, IndexKind, IndexParams, IndexValue, RankWeights,
    Reference,
};
pub use inference::{IndexEstimate, InferenceMethod, Interval};
