//! Parameter-grid evaluation producing plot-ready rows.

use crate::error::{DisparityError, Result};
use crate::index::{evaluate, Aversion, GroupedDistribution, IndexKind, Reference};
use crate::io::ResultRow;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub kinds: Vec<IndexKind>,
    pub alphas: Vec<Aversion>,
    pub nus: Vec<Aversion>,
    pub reference: Reference,
}

/// `lo, lo + step, ...` up to and including `hi` (within rounding).
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(DisparityError::InvalidInput(format!("bad grid {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

impl SweepGrid {
    pub fn new(kinds: Vec<IndexKind>, alphas: Vec<Aversion>, nus: Vec<Aversion>) -> Self {
        Self {
            kinds,
            alphas,
            nus,
            reference: Reference::PopulationMean,
        }
    }

    /// RI, standardized GE and the two-parameter concentration index over
    /// α ∈ [0, 8] in steps of 0.25 for ν ∈ {1, 2, 3}.
    pub fn aversion_panels() -> Self {
        let alphas = linear_grid(0.0, 8.0, 0.25).expect("static grid");
        Self::new(
            vec![IndexKind::RI, IndexKind::GeStandardized, IndexKind::ConcentrationTwoParam],
            alphas.into_iter().map(Aversion::Finite).collect(),
            [1.0, 2.0, 3.0].into_iter().map(Aversion::Finite).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() || self.alphas.is_empty() || self.nus.is_empty() {
            return Err(DisparityError::InvalidInput(
                "sweep needs at least one index kind, alpha and nu".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.kinds.len() * self.alphas.len() * self.nus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Evaluates every (dataset, kind, ν, α) combination, in that nesting order.
pub fn sweep(datasets: &[(&str, &GroupedDistribution)], grid: &SweepGrid) -> Result<Vec<ResultRow>> {
    grid.validate()?;
    let mut rows = Vec::with_capacity(datasets.len() * grid.len());
    for (name, dist) in datasets {
        for &kind in &grid.kinds {
            for &nu in &grid.nus {
                for &alpha in &grid.alphas {
                    let v = evaluate(dist, kind, alpha, nu, grid.reference)?;
                    rows.push(ResultRow::point(*name, &v));
                }
            }
        }
    }
    Ok(rows)
}
