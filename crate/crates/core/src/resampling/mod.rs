//! Rescaled survey bootstrap and Poisson null simulation. Every replicate
//! draws from its own ChaCha stream keyed by (seed, replicate index), so
//! results do not depend on thread scheduling.

mod bootstrap;
mod null;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DisparityError, Result};
use crate::inference::DEFAULT_LEVEL;

pub use bootstrap::{bootstrap_difference, rescaled_bootstrap, BootstrapDifference, BootstrapResult};
pub use null::{poisson_null_test, NullSimConfig, NullTestResult};

pub const DEFAULT_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IntervalKind {
    #[default]
    Percentile,
    Normal,
}

impl fmt::Display for IntervalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalKind::Percentile => "percentile",
            IntervalKind::Normal => "normal",
        })
    }
}

impl FromStr for IntervalKind {
    type Err = DisparityError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "percentile" => Ok(IntervalKind::Percentile),
            "normal" => Ok(IntervalKind::Normal),
            other => Err(DisparityError::InvalidInput(format!(
                "unknown interval kind '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub interval: IntervalKind,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            interval: IntervalKind::Percentile,
            level: DEFAULT_LEVEL,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(DisparityError::InvalidInput(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(DisparityError::InvalidInput(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Generator for replicate `stream` under `seed`.
pub(crate) fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
