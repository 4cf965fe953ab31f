//! Small dense least-squares fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solve `min ||A x - y||` for a tall design matrix given row by row.
///
/// Columns are rescaled to unit norm before the SVD so that regressors of
/// very different magnitude (`n log n` next to `1`) stay well conditioned.
pub(crate) fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let p = rows.first().map(|r| r.len()).unwrap_or(0);
    if n < p || p == 0 {
        return Err(Error::InsufficientData(format!(
            "least squares needs at least {p} rows, got {n}"
        )));
    }
    let mut a = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let mut scale = vec![1.0; p];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).unscale_mut(norm);
        }
    }
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.max();
    let x = svd
        .solve(&b, max_sv * 1e-13)
        .map_err(|e| Error::FitDegenerate(e.to_string()))?;
    Ok(x.iter().zip(&scale).map(|(v, s)| v / s).collect())
}
