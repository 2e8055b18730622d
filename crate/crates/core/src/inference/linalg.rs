//! Least-squares solves through Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative tolerance on `|R_ii|` against the largest column norm.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub(crate) struct LeastSquares {
    pub coefficients: DVector<f64>,
    /// `R⁻¹`, so that `(XᵀX)⁻¹ = R⁻¹ R⁻ᵀ`.
    pub r_inverse: DMatrix<f64>,
}

impl LeastSquares {
    /// `(XᵀX)⁻¹`.
    pub fn unscaled_covariance(&self) -> DMatrix<f64> {
        &self.r_inverse * self.r_inverse.transpose()
    }
}

pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::Shape(format!("{} responses for {n} rows", y.len())));
    }
    if n < p {
        return Err(Error::TooFewObservations { rows: n, columns: p });
    }
    let scale = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = x.clone().qr();
    let r = qr.r();
    let negligible = |v: f64| v.is_nan() || v.abs() <= RANK_TOLERANCE * scale;
    if scale == 0.0 || (0..p).any(|i| negligible(r[(i, i)])) {
        return Err(Error::SingularDesign);
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty = qty.rows(0, p).into_owned();
    let coefficients = r.solve_upper_triangular(&qty).ok_or(Error::SingularDesign)?;
    let r_inverse = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::SingularDesign)?;
    Ok(LeastSquares {
        coefficients,
        r_inverse,
    })
}

/// Numerical rank from singular values, same relative tolerance.
pub(crate) fn rank(x: &DMatrix<f64>) -> usize {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0;
    }
    let sv = x.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}
