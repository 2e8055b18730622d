use thiserror::Error;

use crate::design::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("arm {arm} out of range (design has {num_arms} arms)")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("patient index {index} outside 1..={total}")]
    PatientOutOfRange { index: usize, total: usize },

    #[error("period {period} out of range (design has {num_periods} periods)")]
    PeriodOutOfRange { period: usize, num_periods: usize },

    #[error("time trend needs at least two patients, got {0}")]
    TooFewPatients(usize),

    #[error("block length {block} in period {period} cannot hold an integer quota for allocation {ratio:?}")]
    BlockQuota {
        period: usize,
        block: usize,
        ratio: Vec<usize>,
    },

    #[error("cell (arm {arm}, period {period}) has no observations")]
    EmptyCell { arm: usize, period: usize },

    #[error("cell counts must be positive")]
    ZeroCount,

    #[error("predictor matrix is rank deficient")]
    SingularDesign,

    #[error("{rows} observations are not enough for {columns} coefficients")]
    TooFewObservations { rows: usize, columns: usize },

    #[error("response and predictors disagree: {0}")]
    Shape(String),

    #[error("per-period variance needs a model with a period factor, got {0}")]
    UnsupportedVarianceMode(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
