//! Treatment assignment sequences.
//!
//! Each period is randomized independently from its own stream, so a period's
//! sequence is a pure function of `(design, period, seed)`.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::design::{RandomizationKind, TrialDesign};
use crate::rng::{self, ASSIGNMENT_STREAM_BASE};
use crate::{Error, Result};

/// Arm labels `k_j` in patient order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssignmentSequence {
    pub arms: Vec<usize>,
    /// Last patient index (1-based, inclusive) of each period covered.
    pub period_ends: Vec<usize>,
    /// First period (0-based) covered by the sequence.
    pub first_period: usize,
    pub seed: u64,
}

impl AssignmentSequence {
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    /// Period (0-based) of each patient in order.
    pub fn periods(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.arms.len());
        let mut start = 0;
        for (offset, &end) in self.period_ends.iter().enumerate() {
            out.extend(std::iter::repeat_n(self.first_period + offset, end - start));
            start = end;
        }
        out
    }

    /// Writes `j,period,arm` rows, periods counted from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,period,arm")?;
        for (i, (arm, period)) in self.arms.iter().zip(self.periods()).enumerate() {
            writeln!(out, "{},{},{}", i + 1, period + 1, arm)?;
        }
        Ok(())
    }
}

fn check_period(design: &TrialDesign, period: usize) -> Result<()> {
    if period >= design.num_periods {
        return Err(Error::PeriodOutOfRange {
            period,
            num_periods: design.num_periods,
        });
    }
    Ok(())
}

/// Per-arm quota of one complete block in `period`.
pub fn block_quota(design: &TrialDesign, period: usize) -> Result<Vec<usize>> {
    check_period(design, period)?;
    let block = design.block_sizes.get(period).copied().unwrap_or(0);
    let ratio = design.allocation_ratio(period);
    let ratio_sum: usize = ratio.iter().sum();
    if block == 0 || ratio_sum == 0 || block % ratio_sum != 0 {
        return Err(Error::BlockQuota { period, block, ratio });
    }
    let scale = block / ratio_sum;
    Ok(ratio.into_iter().map(|r| r * scale).collect())
}

fn fragment(period: usize, seed: u64, arms: Vec<usize>) -> AssignmentSequence {
    AssignmentSequence {
        period_ends: vec![arms.len()],
        arms,
        first_period: period,
        seed,
    }
}

/// Permuted-block sequence for one period.
///
/// Complete blocks each hold exactly the block quota in shuffled order. When
/// `N_s` is not a multiple of the block length, the final partial block is a
/// shuffle of whatever each arm still needs to reach its planned cell size,
/// so per-period arm counts always equal the design's `n_{k,s}`.
pub fn permuted_block_sequence(design: &TrialDesign, period: usize, seed: u64) -> Result<AssignmentSequence> {
    let quota = block_quota(design, period)?;
    let block: usize = quota.iter().sum();
    let total = design.period_size(period);
    let complete = total / block;
    let mut rng = rng::stream(seed, ASSIGNMENT_STREAM_BASE + period as u64);

    let template: Vec<usize> = quota
        .iter()
        .enumerate()
        .flat_map(|(arm, &q)| std::iter::repeat_n(arm, q))
        .collect();
    let mut arms = Vec::with_capacity(total);
    for _ in 0..complete {
        let mut b = template.clone();
        b.shuffle(&mut rng);
        arms.extend(b);
    }
    let mut tail: Vec<usize> = quota
        .iter()
        .enumerate()
        .flat_map(|(arm, &q)| std::iter::repeat_n(arm, design.cell_size(arm, period) - complete * q))
        .collect();
    tail.shuffle(&mut rng);
    arms.extend(tail);
    debug_assert_eq!(arms.len(), total);
    Ok(fragment(period, seed, arms))
}

/// Simple randomization for one period: i.i.d. draws with probabilities
/// proportional to the planned cell sizes.
pub fn simple_sequence(design: &TrialDesign, period: usize, seed: u64) -> Result<AssignmentSequence> {
    check_period(design, period)?;
    let total = design.period_size(period);
    let cumulative: Vec<usize> = (0..design.num_arms)
        .scan(0, |acc, arm| {
            *acc += design.cell_size(arm, period);
            Some(*acc)
        })
        .collect();
    let mut rng = rng::stream(seed, ASSIGNMENT_STREAM_BASE + period as u64);
    let arms = (0..total)
        .map(|_| {
            let draw = rng.random_range(0..total);
            cumulative.iter().position(|&c| draw < c).unwrap_or(0)
        })
        .collect();
    Ok(fragment(period, seed, arms))
}

/// Assigns every patient of the trial, period by period, using the design's
/// randomization kind.
pub fn assign_trial(design: &TrialDesign, seed: u64) -> Result<AssignmentSequence> {
    let mut arms = Vec::with_capacity(design.total_size());
    let mut period_ends = Vec::with_capacity(design.num_periods);
    for period in 0..design.num_periods {
        let part = match design.randomization {
            RandomizationKind::PermutedBlock => permuted_block_sequence(design, period, seed)?,
            RandomizationKind::Simple => simple_sequence(design, period, seed)?,
        };
        arms.extend(part.arms);
        period_ends.push(arms.len());
    }
    Ok(AssignmentSequence {
        arms,
        period_ends,
        first_period: 0,
        seed,
    })
}
