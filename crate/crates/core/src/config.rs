//! JSON configuration of designs, scenarios and simulation grids.
//!
//! Binary scenarios are written with response rates and odds ratios and are
//! converted to the log-odds scale when the grid is built. A minimal run
//! configuration looks like
//!
//! ```json
//! {
//!   "design": { "cell_sizes": [[125, 125], [125, 125], [0, 250]], "block_sizes": [4, 12] },
//!   "scenario": {
//!     "endpoint": "continuous", "control_mean": 0.0, "effects": [0.25, 0.25], "sigma": 1.0,
//!     "trend": { "pattern": "step", "lambda": [0.1, 0.1, 0.1] }
//!   },
//!   "axes": { "hypothesis": ["H0", "H1"], "arm1_period2": [0.0, 0.25, 0.5] },
//!   "models": ["alltc_step", "separate"],
//!   "replicates": 10000,
//!   "seed": 42
//! }
//! ```
//!
//! Several scenarios can be combined with `"panels": [{"label", "scenario",
//! "axes"}, ...]` in place of the top-level `scenario`/`axes` pair.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{
    expit, logit, Endpoint, EntryTimeMode, RandomizationKind, Scenario, TrendPattern, TrialDesign, Violation,
    ViolationCode,
};
use crate::inference::{AnalysisModel, ModelKind};
use crate::montecarlo::{GridPoint, Hypothesis, ScenarioGrid};
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// Patients per arm (outer) and period (inner).
    pub cell_sizes: Vec<Vec<usize>>,
    pub block_sizes: Vec<usize>,
    #[serde(default = "default_randomization")]
    pub randomization: RandomizationKind,
    /// First recruiting period of each arm, 1-based. Derived from
    /// `cell_sizes` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_period: Option<Vec<usize>>,
    /// Last recruiting period of each arm, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_period: Option<Vec<usize>>,
}

fn default_randomization() -> RandomizationKind {
    RandomizationKind::PermutedBlock
}

impl DesignConfig {
    pub fn canonical() -> Self {
        Self {
            cell_sizes: vec![vec![125, 125], vec![125, 125], vec![0, 250]],
            block_sizes: vec![4, 12],
            randomization: RandomizationKind::PermutedBlock,
            entry_period: None,
            exit_period: None,
        }
    }

    pub fn to_design(&self) -> TrialDesign {
        let mut design = TrialDesign::from_cells(self.cell_sizes.clone(), self.block_sizes.clone(), self.randomization);
        if let Some(entry) = &self.entry_period {
            design.entry_period = entry.iter().map(|&s| s.saturating_sub(1)).collect();
        }
        if let Some(exit) = &self.exit_period {
            design.exit_period = exit.iter().map(|&s| s.saturating_sub(1)).collect();
        }
        design
    }

    fn check(&self, out: &mut Vec<Violation>) {
        for (field, periods) in [("entry_period", &self.entry_period), ("exit_period", &self.exit_period)] {
            if let Some(periods) = periods {
                if periods.len() != self.cell_sizes.len() {
                    out.push(Violation::new(
                        ViolationCode::ArmCountMismatch,
                        format!(
                            "design.{field}: {} entries for {} arms",
                            periods.len(),
                            self.cell_sizes.len()
                        ),
                    ));
                }
                if periods.contains(&0) {
                    out.push(Violation::new(
                        ViolationCode::PeriodOutOfRange,
                        format!("design.{field}: periods are numbered from 1"),
                    ));
                }
            }
        }
        if !out.is_empty() {
            return;
        }
        for v in crate::design::validate_design(&self.to_design()) {
            out.push(Violation::new(v.code, format!("design: {}", v.message)));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendConfig {
    pub pattern: TrendPattern,
    /// Per-arm strength on the model scale, control first.
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "endpoint", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    Continuous {
        control_mean: f64,
        /// Mean differences of arms 1.. against control.
        effects: Vec<f64>,
        sigma: f64,
        trend: TrendConfig,
        #[serde(default)]
        entry_time: EntryTimeMode,
    },
    Binary {
        /// Control response rate at the start of the trial.
        control_rate: f64,
        /// Odds ratios of arms 1.. against control.
        odds_ratios: Vec<f64>,
        trend: TrendConfig,
        #[serde(default)]
        entry_time: EntryTimeMode,
    },
}

impl ScenarioConfig {
    pub fn endpoint(&self) -> Endpoint {
        match self {
            Self::Continuous { .. } => Endpoint::Continuous,
            Self::Binary { .. } => Endpoint::Binary,
        }
    }

    pub fn trend(&self) -> &TrendConfig {
        match self {
            Self::Continuous { trend, .. } | Self::Binary { trend, .. } => trend,
        }
    }

    /// Model-scale scenario. Assumes [`ScenarioConfig::check`] passed.
    pub fn to_scenario(&self) -> Scenario {
        let trend = self.trend();
        let (endpoint, eta0, effects, sigma, entry_time) = match self {
            Self::Continuous {
                control_mean,
                effects,
                sigma,
                entry_time,
                ..
            } => (
                Endpoint::Continuous,
                *control_mean,
                effects.clone(),
                *sigma,
                *entry_time,
            ),
            Self::Binary {
                control_rate,
                odds_ratios,
                entry_time,
                ..
            } => (
                Endpoint::Binary,
                logit(*control_rate),
                odds_ratios.iter().map(|or| or.ln()).collect(),
                1.0,
                *entry_time,
            ),
        };
        Scenario {
            endpoint,
            eta0,
            effects,
            sigma,
            trend: trend.pattern,
            lambda: trend.lambda.clone(),
            peak_index: trend.peak_index,
            entry_time,
        }
    }

    fn check(&self, path: &str, out: &mut Vec<Violation>) {
        if let Self::Binary {
            control_rate,
            odds_ratios,
            ..
        } = self
        {
            if !(*control_rate > 0.0 && *control_rate < 1.0) {
                out.push(Violation::new(
                    ViolationCode::ProbabilityOutOfRange,
                    format!("{path}.control_rate must lie strictly between 0 and 1, got {control_rate}"),
                ));
            }
            for (i, or) in odds_ratios.iter().enumerate() {
                if !(*or > 0.0 && or.is_finite()) {
                    out.push(Violation::new(
                        ViolationCode::NonpositiveOddsRatio,
                        format!("{path}.odds_ratios[{i}] must be positive, got {or}"),
                    ));
                }
            }
        }
    }
}

/// Value of the arm-1 response in period 2 on the natural scale, or a rule
/// that derives it from the control trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArmValue {
    Value(f64),
    Marker(Marker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    /// Same period-2 change as control on the odds-ratio scale.
    OrEqual,
    /// Same change on the risk-difference scale.
    RdEqual,
    /// Same change on the relative-risk scale.
    RrEqual,
}

impl Marker {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OrEqual => "or_equal",
            Self::RdEqual => "rd_equal",
            Self::RrEqual => "rr_equal",
        }
    }

    /// Arm-1 period-2 response rate implied by the rule, given the control
    /// log-odds `eta0`, the arm-1 log odds ratio `theta1` and the control
    /// trend `lambda0`.
    pub fn rate(self, eta0: f64, theta1: f64, lambda0: f64) -> f64 {
        let p01 = expit(eta0);
        let p02 = expit(eta0 + lambda0);
        let p11 = expit(eta0 + theta1);
        match self {
            Self::OrEqual => expit(eta0 + theta1 + lambda0),
            Self::RdEqual => p11 + (p02 - p01),
            Self::RrEqual => p11 * p02 / p01,
        }
    }
}

/// Sweeps applied on top of a base scenario. Each present axis multiplies
/// the number of grid points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<TrendPattern>>,
    /// `H0` sets the arm-2 effect to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<Vec<Hypothesis>>,
    /// Common trend strength of every arm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    /// Trend strength of arm 1 only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<Vec<f64>>,
    /// Arm-1 response in period 2 on the natural scale (step trends only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm1_period2: Option<Vec<ArmValue>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Panel {
    pub label: String,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub axes: Axes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Kind(ModelKind),
    Full(AnalysisModel),
}

impl ModelSpec {
    pub fn model(self) -> AnalysisModel {
        match self {
            Self::Kind(kind) => AnalysisModel::new(kind),
            Self::Full(model) => model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub design: DesignConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Axes>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub panels: Vec<Panel>,
    pub models: Vec<ModelSpec>,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Free-form run metadata; not used by the simulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

impl GridConfig {
    /// Parses a configuration; errors name the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Config(inner.to_string())
            } else {
                Error::Config(format!("{path}: {inner}"))
            }
        })?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Panels after folding the top-level `scenario`/`axes` pair in.
    pub fn all_panels(&self) -> Vec<Panel> {
        let mut panels = Vec::new();
        if let Some(scenario) = &self.scenario {
            panels.push(Panel {
                label: String::new(),
                scenario: scenario.clone(),
                axes: self.axes.clone().unwrap_or_default(),
            });
        }
        panels.extend(self.panels.iter().cloned());
        panels
    }

    /// Every problem with the configuration; each message starts with the
    /// offending field.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.design.check(&mut out);
        if self.replicates == 0 {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                "replicates must be at least 1",
            ));
        }
        if self.models.is_empty() {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                "models must name at least one model",
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                format!("alpha must lie strictly between 0 and 1, got {}", self.alpha),
            ));
        }
        if self.scenario.is_none() && self.axes.is_some() {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                "axes given without scenario",
            ));
        }
        if self.scenario.is_none() && self.panels.is_empty() {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                "scenario or panels must be given",
            ));
        }
        let design_ok = out.is_empty();
        let design = self.design.to_design();
        for (i, panel) in self.all_panels().iter().enumerate() {
            let path = if self.scenario.is_some() && i == 0 {
                "scenario".to_string()
            } else {
                format!("panels[{}]", i - usize::from(self.scenario.is_some()))
            };
            panel.scenario.check(&path, &mut out);
            check_axes(&panel.axes, panel.scenario.endpoint(), &path, &mut out);
            for (m, spec) in self.models.iter().enumerate() {
                if let Err(e) = spec.model().check(panel.scenario.endpoint()) {
                    out.push(Violation::new(ViolationCode::InvalidGrid, format!("models[{m}]: {e}")));
                }
            }
            if !design_ok || !out.is_empty() {
                continue;
            }
            match expand_panel(panel) {
                Ok(points) => {
                    for point in points {
                        for v in crate::design::validate_scenario(&point.scenario, &design) {
                            out.push(Violation::new(v.code, format!("{path} ({}): {}", point.id, v.message)));
                        }
                    }
                }
                Err(e) => out.push(Violation::new(ViolationCode::InvalidGrid, format!("{path}: {e}"))),
            }
        }
        out
    }

    /// Expands the configuration into a grid with master seed `seed`.
    pub fn to_grid(&self, seed: u64) -> Result<ScenarioGrid> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let design = self.design.to_design();
        let mut points = Vec::new();
        for panel in self.all_panels() {
            points.extend(expand_panel(&panel)?);
        }
        Ok(ScenarioGrid {
            design,
            points,
            models: self.models.iter().map(|m| m.model()).collect(),
            replicates: self.replicates,
            master_seed: seed,
            alpha: self.alpha,
        })
    }
}

fn check_axes(axes: &Axes, endpoint: Endpoint, path: &str, out: &mut Vec<Violation>) {
    let empty = |name: &str, len: Option<usize>, out: &mut Vec<Violation>| {
        if len == Some(0) {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                format!("{path}.axes.{name} is empty"),
            ));
        }
    };
    empty("pattern", axes.pattern.as_ref().map(Vec::len), out);
    empty("hypothesis", axes.hypothesis.as_ref().map(Vec::len), out);
    empty("lambda", axes.lambda.as_ref().map(Vec::len), out);
    empty("lambda1", axes.lambda1.as_ref().map(Vec::len), out);
    empty("arm1_period2", axes.arm1_period2.as_ref().map(Vec::len), out);
    if let Some(values) = &axes.arm1_period2 {
        if axes.lambda1.is_some() {
            out.push(Violation::new(
                ViolationCode::InvalidGrid,
                format!("{path}.axes: lambda1 and arm1_period2 both set the arm-1 trend"),
            ));
        }
        for (i, value) in values.iter().enumerate() {
            match (value, endpoint) {
                (ArmValue::Marker(m), Endpoint::Continuous) => out.push(Violation::new(
                    ViolationCode::InvalidGrid,
                    format!(
                        "{path}.axes.arm1_period2[{i}]: marker {} needs a binary endpoint",
                        m.as_str()
                    ),
                )),
                (ArmValue::Value(x), Endpoint::Binary) if !(*x > 0.0 && *x < 1.0) => out.push(Violation::new(
                    ViolationCode::ProbabilityOutOfRange,
                    format!("{path}.axes.arm1_period2[{i}] must lie strictly between 0 and 1, got {x}"),
                )),
                _ => {}
            }
        }
    }
}

fn opt_axis<T: Copy>(axis: &Option<Vec<T>>) -> Vec<Option<T>> {
    match axis {
        Some(values) => values.iter().copied().map(Some).collect(),
        None => vec![None],
    }
}

/// Grid points of one panel, in the order pattern, hypothesis, lambda,
/// lambda1, arm1_period2 (last varies fastest).
pub fn expand_panel(panel: &Panel) -> Result<Vec<GridPoint>> {
    let base = panel.scenario.to_scenario();
    let axes = &panel.axes;
    let mut points = Vec::new();
    for pattern in opt_axis(&axes.pattern) {
        for hypothesis in opt_axis(&axes.hypothesis) {
            for lambda in opt_axis(&axes.lambda) {
                for lambda1 in opt_axis(&axes.lambda1) {
                    for x in opt_axis(&axes.arm1_period2) {
                        let mut scenario = base.clone();
                        let mut id = vec![];
                        if !panel.label.is_empty() {
                            id.push(panel.label.clone());
                        }
                        if let Some(p) = pattern {
                            scenario.trend = p;
                            id.push(p.as_str().to_string());
                        }
                        let hypothesis = match hypothesis {
                            Some(h) => {
                                if h == Hypothesis::H0 {
                                    if let Some(e) = scenario.effects.get_mut(1) {
                                        *e = 0.0;
                                    }
                                }
                                id.push(h.as_str().to_string());
                                h
                            }
                            None if scenario.theta2() == 0.0 => Hypothesis::H0,
                            None => Hypothesis::H1,
                        };
                        if let Some(l) = lambda {
                            scenario.lambda.iter_mut().for_each(|v| *v = l);
                            id.push(format!("lambda={l}"));
                        }
                        if let Some(l) = lambda1 {
                            set_lambda1(&mut scenario, l)?;
                            id.push(format!("lambda1={l}"));
                        }
                        if let Some(value) = x {
                            if scenario.trend != TrendPattern::Step {
                                return Err(Error::Config(format!(
                                    "arm1_period2 needs the step pattern, got {}",
                                    scenario.trend.as_str()
                                )));
                            }
                            let lambda0 = scenario.lambda.first().copied().unwrap_or(0.0);
                            let (rate, tag) = match value {
                                ArmValue::Value(v) => (v, format!("x={v}")),
                                ArmValue::Marker(m) => {
                                    let rate = m.rate(scenario.eta0, scenario.theta(1), lambda0);
                                    (rate, format!("x={}", m.as_str()))
                                }
                            };
                            let l1 = scenario.endpoint.link(rate) - scenario.eta0 - scenario.theta(1);
                            set_lambda1(&mut scenario, l1)?;
                            id.push(tag);
                        }
                        points.push(GridPoint {
                            id: if id.is_empty() { "base".into() } else { id.join("/") },
                            hypothesis,
                            scenario,
                        });
                    }
                }
            }
        }
    }
    Ok(points)
}

fn set_lambda1(scenario: &mut Scenario, value: f64) -> Result<()> {
    match scenario.lambda.get_mut(1) {
        Some(l) => {
            *l = value;
            Ok(())
        }
        None => Err(Error::Config("the design has no arm 1".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn continuous_config() -> &'static str {
        r#"{
            "design": { "cell_sizes": [[125, 125], [125, 125], [0, 250]], "block_sizes": [4, 12] },
            "scenario": {
                "endpoint": "continuous", "control_mean": 0.0, "effects": [0.25, 0.25], "sigma": 1.0,
                "trend": { "pattern": "step", "lambda": [0.1, 0.1, 0.1] }
            },
            "axes": { "hypothesis": ["H0", "H1"], "arm1_period2": [0.25, 0.55] },
            "models": ["alltc_step", {"kind": "alltc_step", "variance_mode": "per_period"}],
            "replicates": 100
        }"#
    }

    #[test]
    fn continuous_grid_expands() {
        let config = GridConfig::from_json(continuous_config()).unwrap();
        assert!(config.validate().is_empty());
        let grid = config.to_grid(5).unwrap();
        assert_eq!(grid.design, TrialDesign::canonical());
        assert_eq!(grid.points.len(), 4);
        assert_eq!(grid.alpha, DEFAULT_ALPHA);
        let ids: Vec<&str> = grid.points.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["H0/x=0.25", "H0/x=0.55", "H1/x=0.25", "H1/x=0.55"]);
        let p = &grid.points[1].scenario;
        assert_eq!(p.theta2(), 0.0);
        assert_abs_diff_eq!(p.lambda[1], 0.3, epsilon = 1e-15);
        assert_eq!(grid.points[2].scenario.theta2(), 0.25);
        assert_eq!(grid.models[1], AnalysisModel::per_period(ModelKind::AlltcStep));
    }

    #[test]
    fn binary_scenario_converts_to_log_odds() {
        let config = ScenarioConfig::Binary {
            control_rate: 0.7,
            odds_ratios: vec![1.8, 1.8],
            trend: TrendConfig {
                pattern: TrendPattern::Step,
                lambda: vec![0.25; 3],
                peak_index: None,
            },
            entry_time: EntryTimeMode::Deterministic,
        };
        let s = config.to_scenario();
        assert_abs_diff_eq!(s.eta0, (0.7f64 / 0.3).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta(1), 1.8f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn markers_reproduce_table_two_values() {
        let (eta0, theta1, lambda0) = (logit(0.7), 1.8f64.ln(), 0.25);
        let or = Marker::OrEqual.rate(eta0, theta1, lambda0);
        assert_eq!((or * 100.0).round() / 100.0, 0.84);
        assert_abs_diff_eq!(or, 0.843577, epsilon = 1e-6);
        assert_abs_diff_eq!(Marker::RdEqual.rate(eta0, theta1, lambda0), 0.857446, epsilon = 1e-6);
        assert_abs_diff_eq!(Marker::RrEqual.rate(eta0, theta1, lambda0), 0.865100, epsilon = 1e-6);
    }

    #[test]
    fn or_equal_marker_gives_equal_trend() {
        let text = r#"{
            "design": { "cell_sizes": [[125, 125], [125, 125], [0, 250]], "block_sizes": [4, 12] },
            "scenario": {
                "endpoint": "binary", "control_rate": 0.7, "odds_ratios": [1.8, 1.8],
                "trend": { "pattern": "step", "lambda": [0.25, 0.0, 0.25] }
            },
            "axes": { "arm1_period2": ["or_equal", "rd_equal", 0.6] },
            "models": ["alltc_step"], "replicates": 10
        }"#;
        let grid = GridConfig::from_json(text).unwrap().to_grid(1).unwrap();
        assert_abs_diff_eq!(grid.points[0].scenario.lambda[1], 0.25, epsilon = 1e-12);
        assert_eq!(grid.points[1].id, "x=rd_equal");
        assert!(grid.points[2].scenario.lambda[1] < 0.0);
        assert_eq!(grid.points[0].hypothesis, Hypothesis::H1);
    }

    #[test]
    fn violations_name_the_field() {
        let text = r#"{
            "design": { "cell_sizes": [[125, 125], [125, 125], [0, 250]], "block_sizes": [4, 12] },
            "panels": [{
                "label": "a",
                "scenario": {
                    "endpoint": "binary", "control_rate": 1.0, "odds_ratios": [1.8, -1.0],
                    "trend": { "pattern": "step", "lambda": [0.25, 0.25, 0.25] }
                }
            }],
            "models": ["alltc_step"], "replicates": 0
        }"#;
        let violations = GridConfig::from_json(text).unwrap().validate();
        let messages: Vec<String> = violations.iter().map(|v| v.message.clone()).collect();
        assert!(messages.iter().any(|m| m.starts_with("replicates")), "{messages:?}");
        assert!(
            messages.iter().any(|m| m.starts_with("panels[0].control_rate")),
            "{messages:?}"
        );
        assert!(
            messages.iter().any(|m| m.starts_with("panels[0].odds_ratios[1]")),
            "{messages:?}"
        );
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let err =
            GridConfig::from_json(r#"{"design": {"cell_sizes": [], "block_sizes": [], "blocks": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("blocks"), "{err}");
        let err = GridConfig::from_json(r#"{"models": [], "replicates": 1}"#).unwrap_err();
        assert!(err.to_string().contains("design"), "{err}");
    }

    #[test]
    fn explicit_entry_period_is_checked() {
        let mut config = GridConfig::from_json(continuous_config()).unwrap();
        config.design.cell_sizes[2][0] = 10;
        config.design.entry_period = Some(vec![1, 1, 2]);
        let codes: Vec<&str> = config.validate().iter().map(|v| v.code.as_str()).collect();
        assert!(codes.contains(&"arm_present_before_entry"), "{codes:?}");
    }

    #[test]
    fn json_round_trip_preserves_config() {
        let config = GridConfig::from_json(continuous_config()).unwrap();
        let back = GridConfig::from_json(&config.to_json().unwrap()).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn continuous_marker_is_rejected() {
        let mut config = GridConfig::from_json(continuous_config()).unwrap();
        config.axes.as_mut().unwrap().arm1_period2 = Some(vec![ArmValue::Marker(Marker::OrEqual)]);
        assert!(!config.validate().is_empty());
    }
}
