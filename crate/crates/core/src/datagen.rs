//! Time-trend functions and sampling of complete trial datasets.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::design::{
    self, true_response_at, validate_design, validate_scenario, Endpoint, EntryTimeMode, Scenario, TrendPattern,
    TrialDesign,
};
use crate::randomization::assign_trial;
use crate::rng::{self, ENTRY_TIME_STREAM, OUTCOME_STREAM};
use crate::{Error, Result};

/// Model-scale trend `f(t)` for an arm with strength `lambda`.
///
/// `t` is the entry time (the patient index under deterministic entry),
/// `total` is `N`, `n1` the size of period 1 and `peak` the turning point of
/// the inverse-U pattern.
pub fn time_trend_value(
    pattern: TrendPattern,
    lambda: f64,
    t: f64,
    total: usize,
    n1: usize,
    peak: usize,
) -> Result<f64> {
    if total <= 1 {
        return Err(Error::TooFewPatients(total));
    }
    let ramp = (t - 1.0) / (total as f64 - 1.0);
    Ok(match pattern {
        TrendPattern::Linear => lambda * ramp,
        TrendPattern::Step => {
            if t > n1 as f64 {
                lambda
            } else {
                0.0
            }
        }
        TrendPattern::InverseU => {
            // Same ramp, sign flipped after the peak.
            if t <= peak as f64 {
                lambda * ramp
            } else {
                -lambda * ramp
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatientRecord {
    /// Patient index `j`, 1-based.
    pub index: usize,
    /// Entry time `t_j`.
    pub time: f64,
    pub arm: usize,
    /// Period, 0-based.
    pub period: usize,
    pub outcome: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialDataset {
    pub endpoint: Endpoint,
    pub num_arms: usize,
    pub num_periods: usize,
    pub records: Vec<PatientRecord>,
    pub seed: u64,
}

/// Count and mean of the outcomes in one (arm, period) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CellSummary {
    pub count: usize,
    pub mean: f64,
}

impl TrialDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Size of period 1 as realized in the data.
    pub fn first_period_size(&self) -> usize {
        self.records.iter().filter(|r| r.period == 0).count()
    }

    /// Counts and means per arm (outer) and period (inner). Empty cells have
    /// count 0 and mean NaN.
    pub fn cell_summaries(&self) -> Vec<Vec<CellSummary>> {
        let mut sums = vec![vec![(0usize, 0.0f64); self.num_periods]; self.num_arms];
        for r in &self.records {
            let cell = &mut sums[r.arm][r.period];
            cell.0 += 1;
            cell.1 += r.outcome;
        }
        sums.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(count, sum)| CellSummary {
                        count,
                        mean: if count == 0 { f64::NAN } else { sum / count as f64 },
                    })
                    .collect()
            })
            .collect()
    }

    /// Writes `j,t,arm,period,y` rows, periods counted from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,t,arm,period,y")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{},{}", r.index, r.time, r.arm, r.period + 1, r.outcome)?;
        }
        Ok(())
    }
}

/// Samples one trial.
///
/// Arms come from the design's randomization; outcomes are drawn in patient
/// order from a dedicated stream, one draw per patient whatever the arm, so
/// datasets that differ only in an arm's parameters share their noise.
pub fn generate_trial(scenario: &Scenario, design: &TrialDesign, seed: u64) -> Result<TrialDataset> {
    let mut violations = validate_design(design);
    violations.extend(validate_scenario(scenario, design));
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    generate_unchecked(scenario, design, seed)
}

/// [`generate_trial`] without the validation pass, for hot loops over
/// configurations that were validated once up front.
pub fn generate_unchecked(scenario: &Scenario, design: &TrialDesign, seed: u64) -> Result<TrialDataset> {
    let assignment = assign_trial(design, seed)?;
    let periods = assignment.periods();
    let total = assignment.len();

    let times: Vec<f64> = match scenario.entry_time {
        EntryTimeMode::Deterministic => (1..=total).map(|j| j as f64).collect(),
        EntryTimeMode::RandomUniform => {
            let mut rng = rng::stream(seed, ENTRY_TIME_STREAM);
            // Uniform on (0, N].
            let mut t: Vec<f64> = (0..total).map(|_| (1.0 - rng.random::<f64>()) * total as f64).collect();
            t.sort_by(f64::total_cmp);
            t
        }
    };

    let mut outcome_rng = rng::stream(seed, OUTCOME_STREAM);
    let mut records = Vec::with_capacity(total);
    for (i, ((&arm, &period), &time)) in assignment.arms.iter().zip(&periods).zip(&times).enumerate() {
        let eta = true_response_at(scenario, design, arm, time)?.model_scale;
        let outcome = match scenario.endpoint {
            Endpoint::Continuous => {
                let noise: f64 = outcome_rng.sample(StandardNormal);
                eta + scenario.sigma * noise
            }
            Endpoint::Binary => {
                let u: f64 = outcome_rng.random();
                if u < design::expit(eta) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        records.push(PatientRecord {
            index: i + 1,
            time,
            arm,
            period,
            outcome,
        });
    }
    Ok(TrialDataset {
        endpoint: scenario.endpoint,
        num_arms: design.num_arms,
        num_periods: design.num_periods,
        records,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{logit, RandomizationKind};
    use approx::assert_abs_diff_eq;

    fn scenario(endpoint: Endpoint, eta0: f64, effects: Vec<f64>, trend: TrendPattern, lambda: f64) -> Scenario {
        Scenario {
            endpoint,
            eta0,
            effects,
            sigma: 1.0,
            trend,
            lambda: vec![lambda; 3],
            peak_index: None,
            entry_time: EntryTimeMode::Deterministic,
        }
    }

    /// Canonical allocation scaled by `factor`.
    fn large_design(factor: usize) -> TrialDesign {
        TrialDesign::from_cells(
            vec![
                vec![125 * factor, 125 * factor],
                vec![125 * factor, 125 * factor],
                vec![0, 250 * factor],
            ],
            vec![4, 12],
            RandomizationKind::PermutedBlock,
        )
    }

    #[test]
    fn linear_trend_starts_at_zero() {
        assert_eq!(
            time_trend_value(TrendPattern::Linear, 0.7, 1.0, 750, 250, 500).unwrap(),
            0.0
        );
        assert_eq!(
            time_trend_value(TrendPattern::Linear, 0.7, 750.0, 750, 250, 500).unwrap(),
            0.7
        );
    }

    #[test]
    fn step_trend_jumps_after_first_period() {
        assert_eq!(
            time_trend_value(TrendPattern::Step, 0.1, 250.0, 750, 250, 500).unwrap(),
            0.0
        );
        assert_eq!(
            time_trend_value(TrendPattern::Step, 0.1, 251.0, 750, 250, 500).unwrap(),
            0.1
        );
    }

    #[test]
    fn inverse_u_follows_printed_formula_at_the_peak() {
        let (n, np) = (750usize, 500usize);
        let at_peak = time_trend_value(TrendPattern::InverseU, 0.15, np as f64, n, 250, np).unwrap();
        let after = time_trend_value(TrendPattern::InverseU, 0.15, np as f64 + 1.0, n, 250, np).unwrap();
        assert_abs_diff_eq!(at_peak, 0.15 * 499.0 / 749.0, epsilon = 1e-15);
        assert_abs_diff_eq!(after, -0.15 * 500.0 / 749.0, epsilon = 1e-15);
    }

    #[test]
    fn trend_needs_two_patients() {
        assert!(matches!(
            time_trend_value(TrendPattern::Linear, 1.0, 1.0, 1, 1, 1),
            Err(Error::TooFewPatients(1))
        ));
    }

    #[test]
    fn dataset_layout_invariants() {
        let design = TrialDesign::canonical();
        let s = scenario(Endpoint::Binary, logit(0.7), vec![0.5, 0.0], TrendPattern::Linear, 0.25);
        let data = generate_trial(&s, &design, 5).unwrap();
        assert_eq!(data.len(), 750);
        for (i, w) in data.records.windows(2).enumerate() {
            assert_eq!(w[0].index, i + 1);
            assert!(w[1].index > w[0].index && w[1].period >= w[0].period);
        }
        for r in &data.records {
            assert!(r.outcome == 0.0 || r.outcome == 1.0);
            assert_eq!(Some(r.period), design.period_of(r.index));
            assert_eq!(r.time, r.index as f64);
        }
        let cells = data.cell_summaries();
        assert_eq!(cells[2][0].count, 0);
        assert_eq!(cells[2][1].count, 250);
    }

    #[test]
    fn identical_seed_identical_dataset() {
        let design = TrialDesign::canonical();
        let s = scenario(Endpoint::Continuous, 0.0, vec![0.25, 0.25], TrendPattern::InverseU, 0.1);
        assert_eq!(
            generate_trial(&s, &design, 77).unwrap(),
            generate_trial(&s, &design, 77).unwrap()
        );
        assert_ne!(
            generate_trial(&s, &design, 77).unwrap(),
            generate_trial(&s, &design, 78).unwrap()
        );
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let mut design = TrialDesign::canonical();
        design.block_sizes[0] = 0;
        let s = scenario(Endpoint::Continuous, 0.0, vec![0.0, 0.0], TrendPattern::Step, 0.0);
        assert!(matches!(generate_trial(&s, &design, 1), Err(Error::Invalid(_))));
    }

    #[test]
    fn null_model_mean_is_zero() {
        let design = large_design(134);
        let s = scenario(Endpoint::Continuous, 0.0, vec![0.0, 0.0], TrendPattern::Step, 0.0);
        let data = generate_trial(&s, &design, 12).unwrap();
        let n = data.len() as f64;
        assert!(n >= 100_000.0);
        let mean = data.records.iter().map(|r| r.outcome).sum::<f64>() / n;
        assert!(mean.abs() < 3.0 / n.sqrt(), "mean = {mean}");
    }

    #[test]
    fn binary_cell_rates_match_tables() {
        // Table-2 style arm 2 under the alternative and Table-3 style arm 1.
        let design = large_design(80);
        let h1 = scenario(
            Endpoint::Binary,
            logit(0.7),
            vec![1.8f64.ln(), 1.8f64.ln()],
            TrendPattern::Step,
            0.25,
        );
        let cells = generate_trial(&h1, &design, 3).unwrap().cell_summaries();
        let c = cells[2][1];
        let se = (0.84 * 0.16 / c.count as f64).sqrt();
        assert!((c.mean - 0.8435).abs() < 4.0 * se, "{c:?}");

        let h0 = scenario(
            Endpoint::Binary,
            logit(0.7),
            vec![0.4f64.ln(), 0.0],
            TrendPattern::Step,
            0.25,
        );
        let cells = generate_trial(&h0, &design, 4).unwrap().cell_summaries();
        let c = cells[1][0];
        let se = (0.25 / c.count as f64).sqrt();
        assert!((c.mean - 0.4828).abs() < 4.0 * se, "{c:?}");
    }

    #[test]
    fn cell_means_converge_to_true_means() {
        // Step trend: every cell has a single true mean.
        let design = large_design(40);
        for endpoint in [Endpoint::Continuous, Endpoint::Binary] {
            let eta0 = if endpoint == Endpoint::Binary { logit(0.6) } else { 1.0 };
            let mut s = scenario(endpoint, eta0, vec![0.3, -0.2], TrendPattern::Step, 0.0);
            s.lambda = vec![0.2, -0.1, 0.4];
            let cells = generate_trial(&s, &design, 31).unwrap().cell_summaries();
            let n1 = design.period_size(0);
            for (arm, row) in cells.iter().enumerate().take(3) {
                for (period, &c) in row.iter().enumerate().take(2) {
                    if arm == 2 && period == 0 {
                        continue;
                    }
                    let j = if period == 0 { 1 } else { n1 + 1 };
                    let mu = design::true_mean(&s, &design, arm, j).unwrap();
                    let var = match endpoint {
                        Endpoint::Continuous => 1.0,
                        Endpoint::Binary => mu * (1.0 - mu),
                    };
                    let se = (var / c.count as f64).sqrt();
                    assert!(
                        (c.mean - mu).abs() < 3.0 * se,
                        "{endpoint:?} arm {arm} period {period}: {c:?} vs {mu}"
                    );
                }
            }
        }
    }

    #[test]
    fn equal_trends_cancel_in_within_period_contrasts() {
        let design = large_design(40);
        let mut s = scenario(Endpoint::Continuous, 0.0, vec![0.25, 0.5], TrendPattern::Linear, 0.8);
        s.sigma = 0.5;
        let cells = generate_trial(&s, &design, 8).unwrap().cell_summaries();
        let diff = cells[2][1].mean - cells[0][1].mean;
        let se = 0.5 * (1.0 / cells[2][1].count as f64 + 1.0 / cells[0][1].count as f64).sqrt();
        assert!((diff - 0.5).abs() < 3.0 * se, "diff = {diff}");
    }

    #[test]
    fn random_entry_times_are_sorted_within_range() {
        let design = TrialDesign::canonical();
        let mut s = scenario(Endpoint::Continuous, 0.0, vec![0.0, 0.0], TrendPattern::Linear, 0.1);
        s.entry_time = EntryTimeMode::RandomUniform;
        let data = generate_trial(&s, &design, 6).unwrap();
        assert!(data.records.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(data.records.iter().all(|r| r.time > 0.0 && r.time <= 750.0));
        assert_eq!(data.first_period_size(), 250);
    }

    #[test]
    fn csv_export_has_expected_columns() {
        let design = TrialDesign::canonical();
        let s = scenario(Endpoint::Binary, 0.0, vec![0.0, 0.0], TrendPattern::Step, 0.0);
        let data = generate_trial(&s, &design, 1).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("j,t,arm,period,y"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[1], "1");
        assert_eq!(first[3], "1");
        assert_eq!(text.lines().count(), 751);
    }
}
