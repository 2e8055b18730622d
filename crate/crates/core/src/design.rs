//! Trial structure, scenario parameters and the true response surface.
//!
//! Arms are indexed `0..num_arms` with arm 0 the shared control. Periods are
//! indexed from 0 in code; user-facing output (CSV, config files) counts them
//! from 1. Patient indices `j` run from 1 to `N`, matching the time-trend
//! formulas.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::datagen::time_trend_value;
use crate::{Error, Result};

pub const CONTROL_ARM: usize = 0;
/// The late-entering arm whose effect is tested.
pub const TESTED_ARM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomizationKind {
    PermutedBlock,
    Simple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDesign {
    pub num_arms: usize,
    pub num_periods: usize,
    /// First period (0-based) in which each arm recruits.
    pub entry_period: Vec<usize>,
    /// Last period (0-based) in which each arm recruits.
    pub exit_period: Vec<usize>,
    /// Planned patients per arm (outer) and period (inner).
    pub cell_sizes: Vec<Vec<usize>>,
    /// Block length per period for permuted-block randomization.
    pub block_sizes: Vec<usize>,
    pub randomization: RandomizationKind,
}

impl TrialDesign {
    /// Builds a design from a cell-size table, taking each arm's entry and
    /// exit period from its first and last nonzero cell.
    pub fn from_cells(cell_sizes: Vec<Vec<usize>>, block_sizes: Vec<usize>, randomization: RandomizationKind) -> Self {
        let num_periods = cell_sizes.first().map_or(0, Vec::len);
        let span = |row: &Vec<usize>| {
            let first = row.iter().position(|&n| n > 0).unwrap_or(0);
            let last = row.iter().rposition(|&n| n > 0).unwrap_or(0);
            (first, last)
        };
        let (entry_period, exit_period) = cell_sizes.iter().map(span).unzip();
        Self {
            num_arms: cell_sizes.len(),
            num_periods,
            entry_period,
            exit_period,
            cell_sizes,
            block_sizes,
            randomization,
        }
    }

    /// Two periods, 125 patients per arm and period for control and arm 1,
    /// 250 for arm 2 in period 2, blocks of 4 and 12.
    pub fn canonical() -> Self {
        Self::from_cells(
            vec![vec![125, 125], vec![125, 125], vec![0, 250]],
            vec![4, 12],
            RandomizationKind::PermutedBlock,
        )
    }

    pub fn cell_size(&self, arm: usize, period: usize) -> usize {
        self.cell_sizes
            .get(arm)
            .and_then(|row| row.get(period))
            .copied()
            .unwrap_or(0)
    }

    /// `N_s`, the number of patients recruited in `period`.
    pub fn period_size(&self, period: usize) -> usize {
        self.cell_sizes
            .iter()
            .map(|row| row.get(period).copied().unwrap_or(0))
            .sum()
    }

    /// `N`, the total sample size.
    pub fn total_size(&self) -> usize {
        (0..self.num_periods).map(|s| self.period_size(s)).sum()
    }

    /// Last patient index (1-based, inclusive) of each period.
    pub fn period_ends(&self) -> Vec<usize> {
        (0..self.num_periods)
            .scan(0, |acc, s| {
                *acc += self.period_size(s);
                Some(*acc)
            })
            .collect()
    }

    /// Period (0-based) of patient `j` under deterministic entry.
    pub fn period_of(&self, j: usize) -> Option<usize> {
        if j == 0 {
            return None;
        }
        self.period_ends().iter().position(|&end| j <= end)
    }

    pub fn is_present(&self, arm: usize, period: usize) -> bool {
        arm < self.num_arms && self.entry_period[arm] <= period && period <= self.exit_period[arm]
    }

    /// Arms recruiting in `period`, in index order.
    pub fn arms_in_period(&self, period: usize) -> Vec<usize> {
        (0..self.num_arms).filter(|&k| self.is_present(k, period)).collect()
    }

    /// Allocation ratio within a period, reduced by the greatest common
    /// divisor of the present arms' cell sizes. Zero for absent arms.
    pub fn allocation_ratio(&self, period: usize) -> Vec<usize> {
        let sizes: Vec<usize> = (0..self.num_arms).map(|k| self.cell_size(k, period)).collect();
        let divisor = sizes.iter().copied().fold(0, gcd);
        if divisor == 0 {
            return sizes;
        }
        sizes.into_iter().map(|n| n / divisor).collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    TooFewArms,
    TooFewPeriods,
    ArmCountMismatch,
    PeriodCountMismatch,
    EntryAfterExit,
    PeriodOutOfRange,
    ArmPresentBeforeEntry,
    ArmPresentAfterExit,
    ArmMissingWhilePresent,
    EmptyPeriod,
    BlockCountMismatch,
    NonpositiveBlock,
    BlockNotDivisible,
    EffectCountMismatch,
    LambdaCountMismatch,
    NonpositiveSigma,
    NonfiniteParameter,
    PeakOutOfRange,
    ProbabilityOutOfRange,
    NonpositiveOddsRatio,
    InvalidGrid,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TooFewArms => "too_few_arms",
            Self::TooFewPeriods => "too_few_periods",
            Self::ArmCountMismatch => "arm_count_mismatch",
            Self::PeriodCountMismatch => "period_count_mismatch",
            Self::EntryAfterExit => "entry_after_exit",
            Self::PeriodOutOfRange => "period_out_of_range",
            Self::ArmPresentBeforeEntry => "arm_present_before_entry",
            Self::ArmPresentAfterExit => "arm_present_after_exit",
            Self::ArmMissingWhilePresent => "arm_missing_while_present",
            Self::EmptyPeriod => "empty_period",
            Self::BlockCountMismatch => "block_count_mismatch",
            Self::NonpositiveBlock => "nonpositive_block",
            Self::BlockNotDivisible => "block_not_divisible",
            Self::EffectCountMismatch => "effect_count_mismatch",
            Self::LambdaCountMismatch => "lambda_count_mismatch",
            Self::NonpositiveSigma => "nonpositive_sigma",
            Self::NonfiniteParameter => "nonfinite_parameter",
            Self::PeakOutOfRange => "peak_out_of_range",
            Self::ProbabilityOutOfRange => "probability_out_of_range",
            Self::NonpositiveOddsRatio => "nonpositive_odds_ratio",
            Self::InvalidGrid => "invalid_grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

/// Checks every structural invariant of a design. An empty list means the
/// design is valid.
pub fn validate_design(design: &TrialDesign) -> Vec<Violation> {
    use ViolationCode::*;
    let mut out = Vec::new();

    if design.num_arms <= TESTED_ARM {
        out.push(Violation::new(
            TooFewArms,
            format!(
                "need a control and at least two treatment arms, got {} arms",
                design.num_arms
            ),
        ));
    }
    if design.num_periods < 2 {
        out.push(Violation::new(
            TooFewPeriods,
            format!("need at least two periods, got {}", design.num_periods),
        ));
    }
    if design.cell_sizes.len() != design.num_arms {
        out.push(Violation::new(
            ArmCountMismatch,
            format!(
                "cell_sizes has {} rows for {} arms",
                design.cell_sizes.len(),
                design.num_arms
            ),
        ));
    }
    if design.entry_period.len() != design.num_arms || design.exit_period.len() != design.num_arms {
        out.push(Violation::new(
            ArmCountMismatch,
            "entry_period and exit_period need one entry per arm",
        ));
    }
    for (arm, row) in design.cell_sizes.iter().enumerate() {
        if row.len() != design.num_periods {
            out.push(Violation::new(
                PeriodCountMismatch,
                format!(
                    "arm {arm} has {} cell sizes for {} periods",
                    row.len(),
                    design.num_periods
                ),
            ));
        }
    }
    if !out.is_empty() {
        return out;
    }

    for arm in 0..design.num_arms {
        let (entry, exit) = (design.entry_period[arm], design.exit_period[arm]);
        if entry > exit {
            out.push(Violation::new(
                EntryAfterExit,
                format!(
                    "arm {arm} enters in period {} but exits in period {}",
                    entry + 1,
                    exit + 1
                ),
            ));
        }
        if exit >= design.num_periods {
            out.push(Violation::new(
                PeriodOutOfRange,
                format!("arm {arm} exit period {} beyond the last period", exit + 1),
            ));
        }
        for period in 0..design.num_periods {
            let n = design.cell_sizes[arm][period];
            if period < entry && n > 0 {
                out.push(Violation::new(
                    ArmPresentBeforeEntry,
                    format!("arm {arm} has {n} patients in period {} before entering", period + 1),
                ));
            } else if period > exit && n > 0 {
                out.push(Violation::new(
                    ArmPresentAfterExit,
                    format!("arm {arm} has {n} patients in period {} after exiting", period + 1),
                ));
            } else if (entry..=exit).contains(&period) && n == 0 {
                out.push(Violation::new(
                    ArmMissingWhilePresent,
                    format!("arm {arm} is active in period {} but has no patients", period + 1),
                ));
            }
        }
    }

    for period in 0..design.num_periods {
        if design.period_size(period) == 0 {
            out.push(Violation::new(
                EmptyPeriod,
                format!("period {} has no patients", period + 1),
            ));
        }
    }

    if design.block_sizes.len() != design.num_periods {
        out.push(Violation::new(
            BlockCountMismatch,
            format!(
                "{} block sizes for {} periods",
                design.block_sizes.len(),
                design.num_periods
            ),
        ));
    } else {
        for (period, &block) in design.block_sizes.iter().enumerate() {
            if block == 0 {
                out.push(Violation::new(
                    NonpositiveBlock,
                    format!("block size in period {} must be positive", period + 1),
                ));
            } else if design.randomization == RandomizationKind::PermutedBlock {
                let ratio = design.allocation_ratio(period);
                let ratio_sum: usize = ratio.iter().sum();
                if ratio_sum > 0 && block % ratio_sum != 0 {
                    out.push(Violation::new(
                        BlockNotDivisible,
                        format!(
                            "block size {block} in period {} is not a multiple of allocation {:?}",
                            period + 1,
                            ratio
                        ),
                    ));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Continuous,
    Binary,
}

impl Endpoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Continuous => "continuous",
            Self::Binary => "binary",
        }
    }

    /// `g⁻¹`: identity for continuous, inverse logit for binary.
    pub fn inverse_link(self, eta: f64) -> f64 {
        match self {
            Self::Continuous => eta,
            Self::Binary => expit(eta),
        }
    }

    /// `g`: identity for continuous, logit for binary.
    pub fn link(self, mean: f64) -> f64 {
        match self {
            Self::Continuous => mean,
            Self::Binary => logit(mean),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendPattern {
    Linear,
    Step,
    InverseU,
}

impl TrendPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Step => "step",
            Self::InverseU => "inverse_u",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryTimeMode {
    #[default]
    Deterministic,
    RandomUniform,
}

/// Data-generating parameters. `eta0` and `effects` live on the model
/// (link) scale: means for continuous endpoints, log-odds for binary ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub endpoint: Endpoint,
    pub eta0: f64,
    /// Effect of arms `1..num_arms` relative to control.
    pub effects: Vec<f64>,
    /// Residual standard deviation; ignored for binary endpoints.
    pub sigma: f64,
    pub trend: TrendPattern,
    /// Trend strength per arm, control included.
    pub lambda: Vec<f64>,
    /// Turning point of the inverse-U trend; `None` means `N₁ + ⌊N₂/2⌋`.
    pub peak_index: Option<usize>,
    pub entry_time: EntryTimeMode,
}

impl Scenario {
    /// Effect of `arm` on the model scale, zero for control.
    pub fn theta(&self, arm: usize) -> f64 {
        if arm == CONTROL_ARM {
            0.0
        } else {
            self.effects.get(arm - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn theta2(&self) -> f64 {
        self.theta(TESTED_ARM)
    }

    pub fn resolved_peak(&self, design: &TrialDesign) -> usize {
        self.peak_index.unwrap_or_else(|| {
            let n1 = design.period_size(0);
            n1 + design.period_size(1) / 2
        })
    }
}

pub fn validate_scenario(scenario: &Scenario, design: &TrialDesign) -> Vec<Violation> {
    use ViolationCode::*;
    let mut out = Vec::new();
    if scenario.effects.len() + 1 != design.num_arms {
        out.push(Violation::new(
            EffectCountMismatch,
            format!(
                "{} effects for {} treatment arms",
                scenario.effects.len(),
                design.num_arms.saturating_sub(1)
            ),
        ));
    }
    if scenario.lambda.len() != design.num_arms {
        out.push(Violation::new(
            LambdaCountMismatch,
            format!("{} trend strengths for {} arms", scenario.lambda.len(), design.num_arms),
        ));
    }
    let finite = std::iter::once(scenario.eta0)
        .chain(scenario.effects.iter().copied())
        .chain(scenario.lambda.iter().copied())
        .all(f64::is_finite);
    if !finite {
        out.push(Violation::new(
            NonfiniteParameter,
            "eta0, effects and lambda must be finite",
        ));
    }
    if scenario.endpoint == Endpoint::Continuous && !(scenario.sigma > 0.0 && scenario.sigma.is_finite()) {
        out.push(Violation::new(
            NonpositiveSigma,
            format!("sigma must be positive, got {}", scenario.sigma),
        ));
    }
    if let Some(peak) = scenario.peak_index {
        let total = design.total_size();
        if peak == 0 || peak > total {
            out.push(Violation::new(
                PeakOutOfRange,
                format!("peak_index {peak} outside 1..={total}"),
            ));
        }
    }
    out
}

/// Expected response of one patient slot on both scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueResponse {
    pub model_scale: f64,
    pub natural_scale: f64,
}

/// Expected response for `arm` at entry time `t` (equal to `j` under
/// deterministic entry).
pub fn true_response_at(scenario: &Scenario, design: &TrialDesign, arm: usize, t: f64) -> Result<TrueResponse> {
    if arm >= design.num_arms || arm >= scenario.lambda.len() {
        return Err(Error::ArmOutOfRange {
            arm,
            num_arms: design.num_arms,
        });
    }
    let trend = time_trend_value(
        scenario.trend,
        scenario.lambda[arm],
        t,
        design.total_size(),
        design.period_size(0),
        scenario.resolved_peak(design),
    )?;
    let model_scale = scenario.eta0 + scenario.theta(arm) + trend;
    Ok(TrueResponse {
        model_scale,
        natural_scale: scenario.endpoint.inverse_link(model_scale),
    })
}

/// `g⁻¹(η₀ + θ_arm + f_arm(j))` for patient index `j` (1-based).
pub fn true_mean(scenario: &Scenario, design: &TrialDesign, arm: usize, j: usize) -> Result<f64> {
    let total = design.total_size();
    if j == 0 || j > total {
        return Err(Error::PatientOutOfRange { index: j, total });
    }
    true_response_at(scenario, design, arm, j as f64).map(|r| r.natural_scale)
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Numerically stable inverse logit.
pub fn expit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn continuous(lambda: f64, trend: TrendPattern) -> Scenario {
        Scenario {
            endpoint: Endpoint::Continuous,
            eta0: 0.0,
            effects: vec![0.25, 0.0],
            sigma: 1.0,
            trend,
            lambda: vec![lambda; 3],
            peak_index: None,
            entry_time: EntryTimeMode::Deterministic,
        }
    }

    fn codes(design: &TrialDesign) -> Vec<&'static str> {
        validate_design(design).iter().map(|v| v.code.as_str()).collect()
    }

    #[test]
    fn canonical_design_is_valid() {
        let design = TrialDesign::canonical();
        assert!(validate_design(&design).is_empty());
        assert_eq!(design.period_size(0), 250);
        assert_eq!(design.period_size(1), 500);
        assert_eq!(design.total_size(), 750);
        assert_eq!(design.entry_period, vec![0, 0, 1]);
        assert_eq!(design.allocation_ratio(0), vec![1, 1, 0]);
        assert_eq!(design.allocation_ratio(1), vec![1, 1, 2]);
        assert_eq!(design.period_of(250), Some(0));
        assert_eq!(design.period_of(251), Some(1));
        assert_eq!(design.period_of(751), None);
    }

    #[test]
    fn arm_before_entry_is_reported() {
        let mut design = TrialDesign::canonical();
        design.cell_sizes[2][0] = 10;
        assert!(codes(&design).contains(&"arm_present_before_entry"));
    }

    #[test]
    fn zero_block_is_reported() {
        let mut design = TrialDesign::canonical();
        design.block_sizes[0] = 0;
        assert_eq!(codes(&design), vec!["nonpositive_block"]);
    }

    #[test]
    fn indivisible_block_is_reported() {
        let mut design = TrialDesign::canonical();
        design.block_sizes[1] = 10;
        assert_eq!(codes(&design), vec!["block_not_divisible"]);
    }

    #[test]
    fn missing_cell_inside_active_span_is_reported() {
        let mut design = TrialDesign::canonical();
        design.cell_sizes[1][1] = 0;
        assert!(codes(&design).contains(&"arm_missing_while_present"));
    }

    #[test]
    fn continuous_step_trend_control_period_two() {
        let design = TrialDesign::canonical();
        let scenario = continuous(0.1, TrendPattern::Step);
        assert_eq!(true_mean(&scenario, &design, 0, 250).unwrap(), 0.0);
        assert_abs_diff_eq!(true_mean(&scenario, &design, 0, 251).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(true_mean(&scenario, &design, 2, 700).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(true_mean(&scenario, &design, 1, 700).unwrap(), 0.35, epsilon = 1e-15);
    }

    #[test]
    fn binary_step_trend_matches_table_rates() {
        let design = TrialDesign::canonical();
        let scenario = Scenario {
            endpoint: Endpoint::Binary,
            eta0: logit(0.7),
            effects: vec![1.8f64.ln(), 1.8f64.ln()],
            sigma: 1.0,
            trend: TrendPattern::Step,
            lambda: vec![0.25; 3],
            peak_index: None,
            entry_time: EntryTimeMode::Deterministic,
        };
        let p = |arm, j| true_mean(&scenario, &design, arm, j).unwrap();
        assert_abs_diff_eq!(p(0, 1), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p(0, 300), 0.75, epsilon = 0.001);
        assert_abs_diff_eq!(p(1, 1), 0.81, epsilon = 0.005);
        assert_abs_diff_eq!(p(2, 300), 0.84, epsilon = 0.005);
    }

    #[test]
    fn no_trend_no_effect_gives_baseline() {
        let design = TrialDesign::canonical();
        for trend in [TrendPattern::Linear, TrendPattern::Step, TrendPattern::InverseU] {
            let mut scenario = continuous(0.0, trend);
            scenario.eta0 = 0.3;
            scenario.effects = vec![0.0, 0.0];
            for j in [1, 250, 251, 500, 750] {
                assert_eq!(true_mean(&scenario, &design, 2, j).unwrap(), 0.3);
            }
        }
    }

    #[test]
    fn out_of_range_arguments_are_errors() {
        let design = TrialDesign::canonical();
        let scenario = continuous(0.1, TrendPattern::Linear);
        assert!(matches!(
            true_mean(&scenario, &design, 3, 1),
            Err(Error::ArmOutOfRange { .. })
        ));
        assert!(matches!(
            true_mean(&scenario, &design, 0, 0),
            Err(Error::PatientOutOfRange { .. })
        ));
        assert!(matches!(
            true_mean(&scenario, &design, 0, 751),
            Err(Error::PatientOutOfRange { .. })
        ));
    }

    #[test]
    fn scenario_validation() {
        let design = TrialDesign::canonical();
        let mut scenario = continuous(0.1, TrendPattern::Step);
        assert!(validate_scenario(&scenario, &design).is_empty());
        scenario.sigma = 0.0;
        scenario.lambda.pop();
        scenario.peak_index = Some(0);
        let codes: Vec<_> = validate_scenario(&scenario, &design).iter().map(|v| v.code).collect();
        assert_eq!(
            codes,
            vec![
                ViolationCode::LambdaCountMismatch,
                ViolationCode::NonpositiveSigma,
                ViolationCode::PeakOutOfRange
            ]
        );
    }

    #[test]
    fn expit_is_stable_in_the_tails() {
        assert_eq!(expit(-800.0), 0.0);
        assert_eq!(expit(800.0), 1.0);
        assert_abs_diff_eq!(expit(logit(0.3)), 0.3, epsilon = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn zero_trend_is_constant(eta0 in -2.0..2.0f64, theta in -1.0..1.0f64, binary: bool) {
                let design = TrialDesign::canonical();
                let mut scenario = continuous(0.0, TrendPattern::InverseU);
                scenario.endpoint = if binary { Endpoint::Binary } else { Endpoint::Continuous };
                scenario.eta0 = eta0;
                scenario.effects = vec![theta, -theta];
                for arm in 0..3 {
                    let first = true_mean(&scenario, &design, arm, 1).unwrap();
                    for j in (1..=750).step_by(37) {
                        prop_assert_eq!(true_mean(&scenario, &design, arm, j).unwrap(), first);
                    }
                }
            }

            #[test]
            fn step_trend_is_constant_within_periods(lambda in -1.0..1.0f64, binary: bool) {
                let design = TrialDesign::canonical();
                let mut scenario = continuous(lambda, TrendPattern::Step);
                if binary {
                    scenario.endpoint = Endpoint::Binary;
                }
                for arm in 0..3 {
                    let p1 = true_mean(&scenario, &design, arm, 1).unwrap();
                    let p2 = true_mean(&scenario, &design, arm, 251).unwrap();
                    for j in 1..=750 {
                        let expected = if j <= 250 { p1 } else { p2 };
                        prop_assert_eq!(true_mean(&scenario, &design, arm, j).unwrap(), expected);
                    }
                }
            }

            #[test]
            fn inverse_u_rises_then_falls(lambda in 0.01..1.0f64, peak in 1usize..750, flip: bool) {
                let design = TrialDesign::canonical();
                let mut scenario = continuous(if flip { -lambda } else { lambda }, TrendPattern::InverseU);
                scenario.peak_index = Some(peak);
                let sign = if flip { -1.0 } else { 1.0 };
                let mean = |j| sign * true_mean(&scenario, &design, 0, j).unwrap();
                for j in 1..peak {
                    prop_assert!(mean(j + 1) >= mean(j));
                }
                for j in peak..750 {
                    prop_assert!(mean(j + 1) <= mean(j));
                }
            }
        }
    }
}
