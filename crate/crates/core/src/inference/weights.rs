//! Closed-form weights of the two-period step-model estimator.
//!
//! Under the step model fitted to all arms, the treatment-2 estimate is a
//! weighted sum of the six cell means, `θ̂₂ = Σ w_{k,s} ȳ_{k,s}`. The weight on
//! the non-concurrent control mean is `-ϱ`, where
//!
//! ```text
//! ϱ = (1/n₀₂) / (1/n₀₁ + 1/n₀₂ + 1/n₁₁ + 1/n₁₂)
//! ```

use std::fmt;

use serde::Serialize;

use crate::datagen::{CellSummary, TrialDataset};
use crate::{Error, Result};

/// Weights `w_{k,s}` for arms 0..=2 (rows) and periods 1..=2 (columns).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightMatrix {
    pub weights: [[f64; 2]; 3],
    pub rho: f64,
}

impl WeightMatrix {
    /// `Σ w_{k,s} m_{k,s}` for a table of cell means.
    pub fn apply(&self, means: &[[f64; 2]; 3]) -> f64 {
        self.weights
            .iter()
            .zip(means)
            .flat_map(|(w, m)| w.iter().zip(m).filter(|(w, _)| **w != 0.0).map(|(w, m)| w * m))
            .sum()
    }

    /// Variance of the weighted sum when each observation has variance
    /// `sigma2` and cell `(k, s)` holds `counts[k][s]` observations.
    pub fn variance(&self, counts: &[[usize; 2]; 3], sigma2: f64) -> f64 {
        self.weights
            .iter()
            .zip(counts)
            .flat_map(|(w, n)| {
                w.iter()
                    .zip(n)
                    .filter(|(w, _)| **w != 0.0)
                    .map(|(w, &n)| w * w / n as f64)
            })
            .sum::<f64>()
            * sigma2
    }
}

impl fmt::Display for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rho = {:.4}", self.rho)?;
        writeln!(f, "{:>4} {:>9} {:>9}", "k\\s", "1", "2")?;
        for (k, row) in self.weights.iter().enumerate() {
            // `+ 0.0` turns -0.0 into 0.0.
            writeln!(f, "{:>4} {:>9.4} {:>9.4}", k, row[0] + 0.0, row[1] + 0.0)?;
        }
        Ok(())
    }
}

/// Weight matrix for cell sizes `n01, n02, n11, n12` (arm, period).
pub fn ncc_weights(n01: usize, n02: usize, n11: usize, n12: usize) -> Result<WeightMatrix> {
    if [n01, n02, n11, n12].contains(&0) {
        return Err(Error::ZeroCount);
    }
    let inv = |n: usize| 1.0 / n as f64;
    let rho = inv(n02) / (inv(n01) + inv(n02) + inv(n11) + inv(n12));
    Ok(WeightMatrix {
        weights: [[-rho, rho - 1.0], [rho, -rho], [0.0, 1.0]],
        rho,
    })
}

/// Cell summaries of arms 0..=2 in periods 1..=2; errors if any cell the
/// estimator needs is empty.
pub fn two_period_cells(dataset: &TrialDataset) -> Result<[[CellSummary; 2]; 3]> {
    let cells = dataset.cell_summaries();
    let mut out = [[CellSummary::default(); 2]; 3];
    for (arm, row) in out.iter_mut().enumerate() {
        for (period, cell) in row.iter_mut().enumerate() {
            *cell = cells.get(arm).and_then(|r| r.get(period)).copied().unwrap_or_default();
            let needed = !(arm == 2 && period == 0);
            if needed && cell.count == 0 {
                return Err(Error::EmptyCell { arm, period });
            }
        }
    }
    Ok(out)
}

/// Weights for the realized cell sizes of a two-period dataset.
pub fn dataset_weights(dataset: &TrialDataset) -> Result<WeightMatrix> {
    let c = two_period_cells(dataset)?;
    ncc_weights(c[0][0].count, c[0][1].count, c[1][0].count, c[1][1].count)
}

/// Model-based estimate of the period-2 control response,
/// `(1 − ϱ) ȳ₀₂ + ϱ [ȳ₀₁ + (ȳ₁₂ − ȳ₁₁)]`.
pub fn estimate_control_response(dataset: &TrialDataset) -> Result<f64> {
    let c = two_period_cells(dataset)?;
    let w = ncc_weights(c[0][0].count, c[0][1].count, c[1][0].count, c[1][1].count)?;
    Ok(control_response_from_means(
        w.rho,
        [[c[0][0].mean, c[0][1].mean], [c[1][0].mean, c[1][1].mean]],
    ))
}

/// Same estimate from cell means `[[ȳ₀₁, ȳ₀₂], [ȳ₁₁, ȳ₁₂]]`.
pub fn control_response_from_means(rho: f64, means: [[f64; 2]; 2]) -> f64 {
    let [[y01, y02], [y11, y12]] = means;
    (1.0 - rho) * y02 + rho * (y01 + (y12 - y11))
}

/// `Σ w_{k,s} ȳ_{k,s}` with weights from the realized cell sizes.
pub fn weighted_sum_estimate(dataset: &TrialDataset) -> Result<f64> {
    let c = two_period_cells(dataset)?;
    let w = ncc_weights(c[0][0].count, c[0][1].count, c[1][0].count, c[1][1].count)?;
    let means = c.map(|row| row.map(|cell| cell.mean));
    Ok(w.apply(&means))
}
