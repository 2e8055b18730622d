use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use super::linalg::least_squares;
use super::{Diagnostics, FitResult};
use crate::design::expit;
use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 25;
/// Convergence threshold on the largest absolute coefficient change.
pub const COEFFICIENT_TOLERANCE: f64 = 1e-8;
/// Fitted probabilities closer than this to 0 or 1 suggest separation.
pub const SEPARATION_THRESHOLD: f64 = 1e-10;

/// Logistic regression by iteratively reweighted least squares, with a
/// one-sided Wald test on coefficient `target`.
///
/// Each iteration solves the weighted least-squares problem
/// `min ‖W^½ (z − Xβ)‖²` with working response `z = η + (y − p) / w` through
/// QR. A fit that does not converge within [`MAX_ITERATIONS`] is returned
/// with `converged = false` rather than as an error.
pub fn fit_logistic(response: &DVector<f64>, predictors: &DMatrix<f64>, target: usize) -> Result<FitResult> {
    let (n, p) = predictors.shape();
    if target >= p {
        return Err(Error::Shape(format!("target column {target} of {p}")));
    }
    if response.len() != n {
        return Err(Error::Shape(format!("{} responses for {n} rows", response.len())));
    }
    if response.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::Shape("logistic response must be 0 or 1".into()));
    }
    if n <= p {
        return Err(Error::TooFewObservations { rows: n, columns: p });
    }

    let mut beta = DVector::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    let mut singular = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (weighted_x, working) = weighted_problem(predictors, response, &beta);
        let next = match least_squares(&weighted_x, &working) {
            Ok(ls) => ls.coefficients,
            Err(Error::SingularDesign) => {
                singular = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let change = (&next - &beta).amax();
        beta = next;
        if !change.is_finite() {
            break;
        }
        if change < COEFFICIENT_TOLERANCE {
            converged = true;
            break;
        }
    }

    let eta = predictors * &beta;
    let separation = eta
        .iter()
        .map(|&e| expit(e))
        .any(|p| !(SEPARATION_THRESHOLD..=1.0 - SEPARATION_THRESHOLD).contains(&p));

    // Fisher information at the final estimate.
    let (weighted_x, _) = weighted_problem(predictors, response, &beta);
    let std_errors: Vec<f64> = match (singular, least_squares(&weighted_x, &DVector::zeros(n))) {
        (false, Ok(ls)) => {
            let cov = ls.unscaled_covariance();
            (0..p).map(|i| cov[(i, i)].sqrt()).collect()
        }
        _ => {
            singular = true;
            converged = false;
            vec![f64::NAN; p]
        }
    };

    let estimate = beta[target];
    let statistic = estimate / std_errors[target];
    let one_sided_p = if statistic.is_finite() {
        Normal::standard().sf(statistic).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(FitResult::new(
        beta.iter().copied().collect(),
        std_errors,
        target,
        statistic,
        one_sided_p,
        None,
        converged,
        iterations,
        Diagnostics {
            separation_suspected: separation,
            singular_design: singular,
            degenerate_residual: false,
        },
    ))
}

/// `(W^½ X, W^½ z)` at coefficients `beta`.
fn weighted_problem(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let eta = x * beta;
    let mut wx = x.clone();
    let mut working = DVector::zeros(y.len());
    for i in 0..y.len() {
        let p = expit(eta[i]);
        let w = (p * (1.0 - p)).max(f64::MIN_POSITIVE);
        let sw = w.sqrt();
        wx.row_mut(i).scale_mut(sw);
        working[i] = sw * eta[i] + (y[i] - p) / sw;
    }
    (wx, working)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_by_two(events_a: usize, n_a: usize, events_b: usize, n_b: usize) -> (DVector<f64>, DMatrix<f64>) {
        let n = n_a + n_b;
        let y = DVector::from_fn(n, |i, _| {
            let hit = if i < n_a { i < events_a } else { i - n_a < events_b };
            if hit {
                1.0
            } else {
                0.0
            }
        });
        let x = DMatrix::from_fn(n, 2, |r, c| if c == 0 || r >= n_a { 1.0 } else { 0.0 });
        (y, x)
    }

    #[test]
    fn two_by_two_table_gives_log_odds_ratio() {
        let (y, x) = two_by_two(10, 20, 15, 20);
        let fit = fit_logistic(&y, &x, 1).unwrap();
        assert!(fit.converged);
        assert_abs_diff_eq!(fit.estimate, 3f64.ln(), epsilon = 1e-6);
        assert_abs_diff_eq!(fit.estimates()[0], 0.0, epsilon = 1e-6);
        // Woolf standard error.
        let woolf = (1.0 / 10.0 + 1.0 / 10.0 + 1.0 / 15.0 + 1.0 / 5.0f64).sqrt();
        assert_abs_diff_eq!(fit.std_error, woolf, epsilon = 1e-6);
    }

    #[test]
    fn score_equations_hold_at_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 300;
        let x = DMatrix::from_fn(n, 3, |_, c| if c == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
        let y = DVector::from_fn(n, |i, _| {
            let eta = 0.3 + 0.8 * x[(i, 1)] - 0.5 * x[(i, 2)];
            if rng.random::<f64>() < expit(eta) {
                1.0
            } else {
                0.0
            }
        });
        let fit = fit_logistic(&y, &x, 1).unwrap();
        assert!(fit.converged && !fit.diagnostics.separation_suspected);
        let beta = DVector::from_vec(fit.estimates());
        let p = (&x * &beta).map(expit);
        let score = x.transpose() * (&y - p);
        assert!(score.amax() < 1e-6, "score = {score}");
    }

    #[test]
    fn all_zero_response_does_not_converge() {
        let (_, x) = two_by_two(0, 20, 0, 20);
        let y = DVector::zeros(40);
        let fit = fit_logistic(&y, &x, 1).unwrap();
        assert!(!fit.converged);
        assert!(fit.diagnostics.separation_suspected);
        assert_eq!(fit.iterations, MAX_ITERATIONS);
    }

    #[test]
    fn non_binary_response_is_rejected() {
        let (mut y, x) = two_by_two(5, 10, 5, 10);
        y[0] = 0.5;
        assert!(matches!(fit_logistic(&y, &x, 1), Err(Error::Shape(_))));
    }
}
