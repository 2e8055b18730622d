//! Replicate loops over scenario grids.
//!
//! Replicate `r` of grid point `i` draws its dataset from
//! `derive_seed(master_seed, [i, r])`, and every analysis model is applied to
//! that same dataset. Per-replicate results are collected in replicate order
//! and reduced sequentially, so summaries do not depend on the number of
//! workers.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::generate_unchecked;
use crate::design::{validate_design, validate_scenario, Scenario, TrialDesign, Violation, ViolationCode};
use crate::inference::{test_theta2, AnalysisModel};
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::H0 => "H0",
            Self::H1 => "H1",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One fully specified scenario of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub id: String,
    pub hypothesis: Hypothesis,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    pub design: TrialDesign,
    pub points: Vec<GridPoint>,
    pub models: Vec<AnalysisModel>,
    pub replicates: usize,
    pub master_seed: u64,
    /// One-sided significance level.
    pub alpha: f64,
}

impl ScenarioGrid {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = validate_design(&self.design);
        if self.replicates == 0 {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                "replicates must be at least 1",
            ));
        }
        if self.models.is_empty() {
            out.push(Violation::new(ViolationCode::InvalidGrid, "no analysis models"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                format!("alpha must be in (0, 1), got {}", self.alpha),
            ));
        }
        for point in &self.points {
            for v in validate_scenario(&point.scenario, &self.design) {
                out.push(Violation::new(v.code, format!("{}: {}", point.id, v.message)));
            }
            for model in &self.models {
                if let Err(e) = model.check(point.scenario.endpoint) {
                    out.push(Violation::new(ViolationCode::InvalidGrid, format!("{}: {e}", point.id)));
                }
            }
        }
        out
    }
}

/// Result of one analysis model on one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplicateOutcome {
    Fitted {
        estimate: f64,
        reject: bool,
    },
    /// Fitting failed or did not converge.
    Failed,
}

/// Aggregate operating characteristics of one model at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_reps: usize,
    pub reject_rate: f64,
    pub mc_se: f64,
    pub mean_est: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Standard deviation of the estimates across replicates.
    pub sd_est: f64,
    pub n_failures: usize,
}

/// Summary statistics of a replicate set. `rejections` has one flag per
/// replicate; `estimates` holds the estimates of the replicates that were
/// fitted successfully.
pub fn summarize(estimates: &[f64], rejections: &[bool], theta2_true: f64) -> Summary {
    let r = rejections.len();
    let reject_rate = rejections.iter().filter(|&&x| x).count() as f64 / r as f64;
    let m = estimates.len() as f64;
    let mean_est = estimates.iter().sum::<f64>() / m;
    let mse = estimates.iter().map(|e| (e - theta2_true).powi(2)).sum::<f64>() / m;
    let sd_est = if estimates.len() > 1 {
        (estimates.iter().map(|e| (e - mean_est).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    Summary {
        n_reps: r,
        reject_rate,
        mc_se: (reject_rate * (1.0 - reject_rate) / r as f64).sqrt(),
        mean_est,
        bias: mean_est - theta2_true,
        rmse: mse.sqrt(),
        sd_est,
        n_failures: r - estimates.len(),
    }
}

fn summarize_outcomes(outcomes: &[ReplicateOutcome], theta2_true: f64) -> Summary {
    let mut estimates = Vec::with_capacity(outcomes.len());
    let mut rejections = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match *outcome {
            ReplicateOutcome::Fitted { estimate, reject } => {
                estimates.push(estimate);
                rejections.push(reject);
            }
            ReplicateOutcome::Failed => rejections.push(false),
        }
    }
    summarize(&estimates, &rejections, theta2_true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: AnalysisModel,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub point: GridPoint,
    pub models: Vec<ModelSummary>,
}

impl ScenarioSummary {
    pub fn get(&self, model: AnalysisModel) -> Option<&Summary> {
        self.models.iter().find(|m| m.model == model).map(|m| &m.summary)
    }
}

/// Runs every replicate of grid point `index`; returns `outcomes[r][m]` for
/// replicate `r` and model `m`. Must be called inside the desired thread pool.
pub fn simulate_point(grid: &ScenarioGrid, index: usize) -> Vec<Vec<ReplicateOutcome>> {
    let point = &grid.points[index];
    (0..grid.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(grid.master_seed, &[index as u64, r as u64]);
            match generate_unchecked(&point.scenario, &grid.design, seed) {
                Ok(data) => grid
                    .models
                    .iter()
                    .map(|&model| match test_theta2(&data, model, grid.alpha) {
                        Ok((reject, fit)) if fit.converged && fit.estimate.is_finite() => ReplicateOutcome::Fitted {
                            estimate: fit.estimate,
                            reject,
                        },
                        _ => ReplicateOutcome::Failed,
                    })
                    .collect(),
                Err(_) => vec![ReplicateOutcome::Failed; grid.models.len()],
            }
        })
        .collect()
}

/// Runs the grid on `workers` threads (0 = one per available core).
pub fn run_grid(grid: &ScenarioGrid, workers: usize) -> Result<Vec<ScenarioSummary>> {
    let violations = grid.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        Ok((0..grid.points.len())
            .map(|i| {
                let outcomes = simulate_point(grid, i);
                let point = &grid.points[i];
                let models = grid
                    .models
                    .iter()
                    .enumerate()
                    .map(|(m, &model)| {
                        let column: Vec<ReplicateOutcome> = outcomes.iter().map(|row| row[m]).collect();
                        ModelSummary {
                            model,
                            summary: summarize_outcomes(&column, point.scenario.theta2()),
                        }
                    })
                    .collect();
                ScenarioSummary {
                    point: point.clone(),
                    models,
                }
            })
            .collect())
    })
}

pub const CSV_HEADER: &str = "scenario_id,endpoint,pattern,lambda0,lambda1,lambda2,theta1,theta2,hypothesis,model,variance_mode,n_reps,reject_rate,mc_se,mean_est,bias,rmse,n_failures";

/// Writes one row per (grid point, model).
pub fn write_csv<W: Write>(summaries: &[ScenarioSummary], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in summaries {
        let sc = &s.point.scenario;
        let lambda = |k: usize| sc.lambda.get(k).copied().unwrap_or(0.0);
        for m in &s.models {
            let v = &m.summary;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                csv_field(&s.point.id),
                sc.endpoint.as_str(),
                sc.trend.as_str(),
                lambda(0),
                lambda(1),
                lambda(2),
                sc.theta(1),
                sc.theta2(),
                s.point.hypothesis,
                m.model.kind,
                m.model.variance_mode.as_str(),
                v.n_reps,
                v.reject_rate,
                v.mc_se,
                v.mean_est,
                v.bias,
                v.rmse,
                v.n_failures
            )?;
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
