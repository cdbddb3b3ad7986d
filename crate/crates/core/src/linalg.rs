//! Dense linear-algebra helpers shared by the backbone and the analytic classifier.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, tiny)`.
pub fn relative_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "relative_frobenius shape mismatch");
    let denom = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / denom
}

/// Replaces `m` with `(m + mᵀ)/2`.
pub fn symmetrize(m: &mut Matrix) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Largest absolute asymmetry `max |m_ij − m_ji|`.
pub fn max_asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn spd_factor(m: Matrix, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m)
        .ok_or_else(|| Error::Numerical(format!("{what} is not numerically positive definite")))
}

/// Inverse of a symmetric positive-definite matrix, returned exactly symmetric.
pub fn spd_inverse(m: Matrix, what: &str) -> Result<Matrix> {
    let mut inv = spd_factor(m, what)?.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

/// `xᵀ x` computed as a single gemm.
pub fn gram(x: &Matrix) -> Matrix {
    x.tr_mul(x)
}

pub fn add_to_diagonal(m: &mut Matrix, value: f64) {
    for i in 0..m.nrows().min(m.ncols()) {
        m[(i, i)] += value;
    }
}

pub fn relu_inplace(m: &mut Matrix) {
    m.iter_mut().for_each(|v| {
        if *v < 0.0 {
            *v = 0.0;
        }
    });
}

/// Column-wise horizontal concatenation.
pub fn hstack(left: &Matrix, right: &Matrix) -> Result<Matrix> {
    if left.nrows() != right.nrows() {
        return Err(Error::Shape(format!(
            "cannot concatenate {}-row and {}-row matrices",
            left.nrows(),
            right.nrows()
        )));
    }
    let mut out = Matrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.columns_mut(0, left.ncols()).copy_from(left);
    out.columns_mut(left.ncols(), right.ncols())
        .copy_from(right);
    Ok(out)
}

/// Stacks matrices with a shared column count on top of each other.
pub fn vstack<'a>(parts: impl IntoIterator<Item = &'a Matrix>, ncols: usize) -> Result<Matrix> {
    let parts: Vec<&Matrix> = parts.into_iter().collect();
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = Matrix::zeros(rows, ncols);
    let mut offset = 0;
    for p in parts {
        if p.ncols() != ncols {
            return Err(Error::Shape(format!(
                "vstack expected {ncols} columns, got {}",
                p.ncols()
            )));
        }
        out.rows_mut(offset, p.nrows()).copy_from(p);
        offset += p.nrows();
    }
    Ok(out)
}

/// Selects the given rows of `m`, in order.
pub fn select_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}
