//! Analysis models for the late-entering arm and their one-sided tests.
//!
//! Every model targets `θ₂`, the effect of arm 2 against control:
//!
//! | kind            | rows                          | time adjustment                 |
//! |-----------------|-------------------------------|---------------------------------|
//! | `alltc_step`    | all arms                      | period indicators               |
//! | `alltci_step`   | all arms                      | period + arm-1 × period         |
//! | `tc_step`       | control and arm 2             | period indicators               |
//! | `alltc_linear`  | all arms                      | patient index                   |
//! | `alltci_linear` | all arms                      | patient index + arm-1 × index   |
//! | `tc_linear`     | control and arm 2             | patient index                   |
//! | `pooled`        | control and arm 2             | none                            |
//! | `separate`      | arm 2 and concurrent controls | none                            |
//!
//! Continuous outcomes use ordinary least squares and a t test; binary
//! outcomes use logistic regression and a Wald z test.

mod linalg;
mod linear;
mod logistic;
mod matrix;
mod weights;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use linalg::RANK_TOLERANCE;
pub use linear::{fit_linear, ResidualVariance};
pub use logistic::{fit_logistic, COEFFICIENT_TOLERANCE, MAX_ITERATIONS, SEPARATION_THRESHOLD};
pub use matrix::{build_design_matrix, ModelMatrix};
pub use weights::{
    control_response_from_means, dataset_weights, estimate_control_response, ncc_weights, two_period_cells,
    weighted_sum_estimate, WeightMatrix,
};

use crate::datagen::TrialDataset;
use crate::design::Endpoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    AlltcStep,
    AlltciStep,
    TcStep,
    AlltcLinear,
    AlltciLinear,
    TcLinear,
    Pooled,
    Separate,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        Self::AlltcStep,
        Self::AlltciStep,
        Self::TcStep,
        Self::AlltcLinear,
        Self::AlltciLinear,
        Self::TcLinear,
        Self::Pooled,
        Self::Separate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::AlltcStep => "alltc_step",
            Self::AlltciStep => "alltci_step",
            Self::TcStep => "tc_step",
            Self::AlltcLinear => "alltc_linear",
            Self::AlltciLinear => "alltci_linear",
            Self::TcLinear => "tc_linear",
            Self::Pooled => "pooled",
            Self::Separate => "separate",
        }
    }

    pub fn has_period_factor(self) -> bool {
        matches!(self, Self::AlltcStep | Self::AlltciStep | Self::TcStep)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    #[default]
    Homoscedastic,
    PerPeriod,
}

impl VarianceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Homoscedastic => "homoscedastic",
            Self::PerPeriod => "per_period",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnalysisModel {
    pub kind: ModelKind,
    #[serde(default)]
    pub variance_mode: VarianceMode,
}

impl AnalysisModel {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            variance_mode: VarianceMode::Homoscedastic,
        }
    }

    pub fn per_period(kind: ModelKind) -> Self {
        Self {
            kind,
            variance_mode: VarianceMode::PerPeriod,
        }
    }

    /// Checks that the model can be fitted to data of `endpoint`.
    pub fn check(&self, endpoint: Endpoint) -> Result<()> {
        if self.variance_mode == VarianceMode::PerPeriod
            && (endpoint == Endpoint::Binary || !self.kind.has_period_factor())
        {
            return Err(Error::UnsupportedVarianceMode(format!(
                "{} ({})",
                self.kind,
                endpoint.as_str()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for AnalysisModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variance_mode {
            VarianceMode::Homoscedastic => write!(f, "{}", self.kind),
            VarianceMode::PerPeriod => write!(f, "{}[per_period]", self.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub separation_suspected: bool,
    pub singular_design: bool,
    /// Residual sum of squares is numerically zero.
    pub degenerate_residual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<Coefficient>,
    /// Index of the tested coefficient.
    pub target: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub statistic: f64,
    /// P-value of the one-sided test of `θ ≤ 0` against `θ > 0`.
    pub one_sided_p: f64,
    /// Degrees of freedom of the t reference distribution; `None` for the
    /// normal reference.
    pub df: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        estimates: Vec<f64>,
        std_errors: Vec<f64>,
        target: usize,
        statistic: f64,
        one_sided_p: f64,
        df: Option<f64>,
        converged: bool,
        iterations: usize,
        diagnostics: Diagnostics,
    ) -> Self {
        let coefficients = estimates
            .iter()
            .zip(&std_errors)
            .enumerate()
            .map(|(i, (&estimate, &std_error))| Coefficient {
                name: format!("x{i}"),
                estimate,
                std_error,
            })
            .collect();
        Self {
            coefficients,
            target,
            estimate: estimates[target],
            std_error: std_errors[target],
            statistic,
            one_sided_p,
            df,
            converged,
            iterations,
            diagnostics,
        }
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    fn with_names(mut self, names: &[String]) -> Self {
        for (c, name) in self.coefficients.iter_mut().zip(names) {
            c.name.clone_from(name);
        }
        self
    }
}

/// Fits `model` to `dataset` with the endpoint's regression family.
pub fn fit_model(dataset: &TrialDataset, model: AnalysisModel) -> Result<FitResult> {
    model.check(dataset.endpoint)?;
    let mm = build_design_matrix(dataset, model.kind)?;
    let fit = match dataset.endpoint {
        Endpoint::Continuous => {
            let variance = match model.variance_mode {
                VarianceMode::Homoscedastic => ResidualVariance::Pooled,
                VarianceMode::PerPeriod => ResidualVariance::PerGroup(&mm.periods),
            };
            fit_linear(&mm.response, &mm.predictors, mm.target, variance)?
        }
        Endpoint::Binary => fit_logistic(&mm.response, &mm.predictors, mm.target)?,
    };
    Ok(fit.with_names(&mm.columns))
}

/// One-sided test of `H₀₂: θ₂ ≤ 0` at level `alpha`.
///
/// Returns whether `H₀₂` is rejected together with the fit. Fits that did
/// not converge never reject.
pub fn test_theta2(dataset: &TrialDataset, model: AnalysisModel, alpha: f64) -> Result<(bool, FitResult)> {
    let fit = fit_model(dataset, model)?;
    let reject = fit.converged && fit.one_sided_p < alpha;
    Ok((reject, fit))
}
