//! Conversions between matrices and row-major nested arrays.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Row-major nested copy of a matrix.
pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Builds a matrix from row-major nested arrays; every row must have the same length.
pub fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::SpecFormat(format!("{name}: matrix has no rows")));
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err(Error::SpecFormat(format!("{name}: row 0 is empty")));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(Error::SpecFormat(format!(
                "{name}: row {i} has {} entries, row 0 has {cols}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::SpecFormat(format!("{name}: entry ({i}, {j}) is not finite")));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}
