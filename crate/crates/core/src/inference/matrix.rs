use nalgebra::{DMatrix, DVector};

use super::ModelKind;
use crate::datagen::TrialDataset;
use crate::design::{CONTROL_ARM, TESTED_ARM};
use crate::{Error, Result};

/// Response, predictors and bookkeeping for one analysis model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    pub response: DVector<f64>,
    pub predictors: DMatrix<f64>,
    /// Indices into `dataset.records` of the rows used, in order.
    pub rows: Vec<usize>,
    /// Period (0-based) of each row used.
    pub periods: Vec<usize>,
    pub columns: Vec<String>,
    /// Column holding the tested arm's effect.
    pub target: usize,
}

impl ModelMatrix {
    pub fn nrows(&self) -> usize {
        self.predictors.nrows()
    }
}

type Column = (String, Box<dyn Fn(usize, usize, usize) -> f64>);

/// Builds the response vector and predictor matrix of `kind` from a dataset.
///
/// Step models encode period as indicator columns for every period after
/// the first one present in the selected rows. Linear models use the raw
/// patient index as the time regressor. Columns that are identically zero in
/// the selected rows are dropped.
pub fn build_design_matrix(dataset: &TrialDataset, kind: ModelKind) -> Result<ModelMatrix> {
    let periods_of_tested: Vec<usize> =
        distinct(dataset.records.iter().filter(|r| r.arm == TESTED_ARM).map(|r| r.period));
    if periods_of_tested.is_empty() {
        return Err(Error::EmptyCell {
            arm: TESTED_ARM,
            period: 0,
        });
    }

    let keep = |arm: usize, period: usize| -> bool {
        match kind {
            ModelKind::AlltcStep | ModelKind::AlltciStep | ModelKind::AlltcLinear | ModelKind::AlltciLinear => true,
            ModelKind::TcStep | ModelKind::TcLinear | ModelKind::Pooled => arm == CONTROL_ARM || arm == TESTED_ARM,
            ModelKind::Separate => (arm == CONTROL_ARM || arm == TESTED_ARM) && periods_of_tested.contains(&period),
        }
    };
    let rows: Vec<usize> = dataset
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| keep(r.arm, r.period))
        .map(|(i, _)| i)
        .collect();

    let used_periods = distinct(rows.iter().map(|&i| dataset.records[i].period));
    let other_arms: Vec<usize> = distinct(
        rows.iter()
            .map(|&i| dataset.records[i].arm)
            .filter(|&a| a != CONTROL_ARM && a != TESTED_ARM),
    );

    let all_arms = matches!(
        kind,
        ModelKind::AlltcStep | ModelKind::AlltciStep | ModelKind::AlltcLinear | ModelKind::AlltciLinear
    );
    let mut columns: Vec<Column> = vec![("intercept".into(), Box::new(|_, _, _| 1.0))];
    let mut target = 1;
    if all_arms {
        for arm in 1..dataset.num_arms {
            if arm == TESTED_ARM {
                target = columns.len();
            }
            columns.push((format!("arm{arm}"), Box::new(move |k, _, _| indicator(k == arm))));
        }
    } else {
        columns.push((
            format!("arm{TESTED_ARM}"),
            Box::new(|k, _, _| indicator(k == TESTED_ARM)),
        ));
    }

    match kind {
        ModelKind::AlltcStep | ModelKind::AlltciStep | ModelKind::TcStep => {
            for &s in used_periods.iter().skip(1) {
                columns.push((format!("period{}", s + 1), Box::new(move |_, p, _| indicator(p == s))));
            }
        }
        ModelKind::AlltcLinear | ModelKind::AlltciLinear | ModelKind::TcLinear => {
            columns.push(("time".into(), Box::new(|_, _, j| j as f64)));
        }
        ModelKind::Pooled | ModelKind::Separate => {}
    }

    match kind {
        ModelKind::AlltciStep => {
            for &arm in &other_arms {
                let arm_periods = distinct(
                    rows.iter()
                        .map(|&i| &dataset.records[i])
                        .filter(|r| r.arm == arm)
                        .map(|r| r.period),
                );
                // The arm's first period is its own reference level.
                for &s in arm_periods.iter().skip(1) {
                    columns.push((
                        format!("arm{arm}:period{}", s + 1),
                        Box::new(move |k, p, _| indicator(k == arm && p == s)),
                    ));
                }
            }
        }
        ModelKind::AlltciLinear => {
            for &arm in &other_arms {
                columns.push((
                    format!("arm{arm}:time"),
                    Box::new(move |k, _, j| if k == arm { j as f64 } else { 0.0 }),
                ));
            }
        }
        _ => {}
    }

    let n = rows.len();
    let mut predictors = DMatrix::zeros(n, columns.len());
    for (row, &i) in rows.iter().enumerate() {
        let r = &dataset.records[i];
        for (col, (_, f)) in columns.iter().enumerate() {
            predictors[(row, col)] = f(r.arm, r.period, r.index);
        }
    }

    // Drop all-zero columns, e.g. arms absent from the data.
    let nonzero: Vec<usize> = (0..columns.len())
        .filter(|&c| predictors.column(c).iter().any(|&v| v != 0.0))
        .collect();
    let target = nonzero.iter().position(|&c| c == target).ok_or(Error::EmptyCell {
        arm: TESTED_ARM,
        period: periods_of_tested[0],
    })?;
    let predictors = predictors.select_columns(&nonzero);
    let names = nonzero.iter().map(|&c| columns[c].0.clone()).collect();

    Ok(ModelMatrix {
        response: DVector::from_iterator(n, rows.iter().map(|&i| dataset.records[i].outcome)),
        periods: rows.iter().map(|&i| dataset.records[i].period).collect(),
        predictors,
        rows,
        columns: names,
        target,
    })
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Sorted distinct values.
fn distinct(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = values.collect();
    v.sort_unstable();
    v.dedup();
    v
}
