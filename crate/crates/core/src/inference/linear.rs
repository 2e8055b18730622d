use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::linalg::{least_squares, rank};
use super::{Diagnostics, FitResult};
use crate::{Error, Result};

/// How the residual variance of a linear model is estimated.
#[derive(Debug, Clone, Copy)]
pub enum ResidualVariance<'a> {
    /// One variance for all rows; t test with `n − p` degrees of freedom.
    Pooled,
    /// One variance per group label (the period of each row). Standard
    /// errors come from the corresponding sandwich and the test uses a
    /// Welch–Satterthwaite degrees of freedom.
    PerGroup(&'a [usize]),
}

/// Ordinary least squares with a one-sided t test on coefficient `target`.
pub fn fit_linear(
    response: &DVector<f64>,
    predictors: &DMatrix<f64>,
    target: usize,
    variance: ResidualVariance<'_>,
) -> Result<FitResult> {
    let (n, p) = predictors.shape();
    if target >= p {
        return Err(Error::Shape(format!("target column {target} of {p}")));
    }
    let ls = least_squares(predictors, response)?;
    if n == p {
        return Err(Error::TooFewObservations { rows: n, columns: p });
    }
    let residuals = response - predictors * &ls.coefficients;
    let rss = residuals.norm_squared();
    // Relative to the response scale, so an exact fit is caught.
    let degenerate = rss <= 1e-24 * response.norm_squared().max(1.0) * n as f64;

    let (std_errors, df) = match variance {
        ResidualVariance::Pooled => {
            let df = (n - p) as f64;
            let sigma2 = rss / df;
            let cov = ls.unscaled_covariance();
            let se: Vec<f64> = (0..p).map(|i| (sigma2 * cov[(i, i)]).sqrt()).collect();
            (se, df)
        }
        ResidualVariance::PerGroup(groups) => per_group_errors(predictors, &ls.r_inverse, &residuals, groups, target)?,
    };

    let estimate = ls.coefficients[target];
    let se = std_errors[target];
    let (statistic, one_sided_p) = if degenerate || se == 0.0 {
        (f64::NAN, if estimate > 0.0 { 0.0 } else { 1.0 })
    } else {
        let t = estimate / se;
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Shape(e.to_string()))?;
        (t, dist.sf(t).clamp(0.0, 1.0))
    };

    Ok(FitResult::new(
        ls.coefficients.iter().copied().collect(),
        std_errors,
        target,
        statistic,
        one_sided_p,
        Some(df),
        true,
        1,
        Diagnostics {
            degenerate_residual: degenerate,
            ..Diagnostics::default()
        },
    ))
}

fn per_group_errors(
    x: &DMatrix<f64>,
    r_inverse: &DMatrix<f64>,
    residuals: &DVector<f64>,
    groups: &[usize],
    target: usize,
) -> Result<(Vec<f64>, f64)> {
    let (n, p) = x.shape();
    if groups.len() != n {
        return Err(Error::Shape(format!("{} group labels for {n} rows", groups.len())));
    }
    let mut labels: Vec<usize> = groups.to_vec();
    labels.sort_unstable();
    labels.dedup();

    // Row j of `influence` is (XᵀX)⁻¹ x_j.
    let influence = x * (r_inverse * r_inverse.transpose());
    let mut variances = vec![0.0; p];
    let mut target_parts = Vec::with_capacity(labels.len());
    for &label in &labels {
        let rows: Vec<usize> = (0..n).filter(|&j| groups[j] == label).collect();
        let df = rows.len() as f64 - rank(&x.select_rows(&rows)) as f64;
        if df <= 0.0 {
            return Err(Error::TooFewObservations {
                rows: rows.len(),
                columns: p,
            });
        }
        let sigma2 = rows.iter().map(|&j| residuals[j].powi(2)).sum::<f64>() / df;
        for (i, v) in variances.iter_mut().enumerate() {
            *v += sigma2 * rows.iter().map(|&j| influence[(j, i)].powi(2)).sum::<f64>();
        }
        let part = sigma2 * rows.iter().map(|&j| influence[(j, target)].powi(2)).sum::<f64>();
        target_parts.push((part, df));
    }
    let total: f64 = target_parts.iter().map(|(v, _)| v).sum();
    let denom: f64 = target_parts.iter().map(|(v, df)| v * v / df).sum();
    let df = if denom > 0.0 {
        total * total / denom
    } else {
        f64::INFINITY
    };
    Ok((variances.into_iter().map(f64::sqrt).collect(), df))
}
