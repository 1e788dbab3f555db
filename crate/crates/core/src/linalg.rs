use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub(crate) type Factor = Cholesky<f64, Dyn>;

const JITTER_START: f64 = 1e-10;

/// Cholesky with diagonal jitter escalation.
///
/// The unperturbed matrix is tried first, then jitter `1e-10, 1e-9, ...` up to
/// `max_jitter`.
pub(crate) fn cholesky_jittered(matrix: &DMatrix<f64>, max_jitter: f64) -> Result<Factor> {
    if let Some(chol) = Cholesky::new(matrix.clone()) {
        return Ok(chol);
    }
    let mut jitter = JITTER_START;
    let mut last = 0.0;
    while jitter <= max_jitter * (1.0 + 1e-12) {
        let mut shifted = matrix.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(shifted) {
            return Ok(chol);
        }
        last = jitter;
        jitter *= 10.0;
    }
    Err(Error::Factorization {
        size: matrix.nrows(),
        jitter: last,
    })
}

/// Solves `L z = b` for the lower Cholesky factor.
pub(crate) fn forward_solve(factor: &Factor, rhs: &DVector<f64>) -> DVector<f64> {
    factor
        .l_dirty()
        .solve_lower_triangular(rhs)
        .expect("cholesky factor has a positive diagonal")
}

pub(crate) fn log_det(factor: &Factor) -> f64 {
    let l = factor.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_matrix_needs_jitter() {
        let m = DMatrix::from_element(2, 2, 1.0);
        assert!(cholesky_jittered(&m, 1e-6).is_ok());
    }

    #[test]
    fn negative_definite_fails() {
        let m = DMatrix::from_diagonal_element(2, 2, -1.0);
        let err = cholesky_jittered(&m, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Factorization { size: 2, .. }));
    }

    #[test]
    fn log_det_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        let f = cholesky_jittered(&m, 1e-6).unwrap();
        assert!((log_det(&f) - 6f64.ln()).abs() < 1e-14);
    }
}
