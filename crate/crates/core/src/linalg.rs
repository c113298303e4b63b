//! Small dense kernels: Moore–Penrose left inverses, extreme singular values
//! and square solves. Everything works on `nalgebra::DMatrix<f64>`, which is
//! re-exported as [`Matrix`].
//!
//! The numerical rank tolerance follows the usual convention
//! `max(rows, cols) * eps * sigma_max`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} has non-finite entries")))
    }
}

fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Numerical rank tolerance for `a`.
pub fn rank_tol(a: &Matrix) -> f64 {
    let smax = singular_values(a).into_iter().fold(0.0, f64::max);
    a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax
}

/// Largest singular value (operator 2-norm).
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    Ok(singular_values(a).into_iter().fold(0.0, f64::max))
}

/// Smallest of the `min(rows, cols)` singular values.
pub fn smallest_singular_value(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    let sv = singular_values(a);
    if sv.is_empty() {
        return Ok(0.0);
    }
    Ok(sv.into_iter().fold(f64::INFINITY, f64::min))
}

/// Moore–Penrose left inverse `S` of a tall matrix `J` (`l x n`, `l >= n`),
/// so that `S * J = I_n`.
///
/// Computed from a thin QR factorization, `S = R^{-1} Q^T`, which avoids
/// squaring the condition number the way the normal equations would.
pub fn left_inverse(j: &Matrix) -> Result<Matrix> {
    let (l, n) = j.shape();
    if l < n {
        return Err(Error::DimensionMismatch(format!(
            "left inverse needs rows >= cols, got {l}x{n}"
        )));
    }
    ensure_finite(j, "jacobian")?;
    if n == 0 {
        return Ok(Matrix::zeros(0, l));
    }
    let sv = singular_values(j);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = l.max(n) as f64 * f64::EPSILON * smax;
    if smin <= tol {
        return Err(Error::RankDeficient { sigma_min: smin });
    }
    let qr = j.clone().qr();
    let q = qr.q();
    let r = qr.r();
    r.solve_upper_triangular(&q.transpose())
        .ok_or(Error::RankDeficient { sigma_min: smin })
}

/// Solve `A x = b` for square, numerically nonsingular `A`.
pub fn solve_square(a: &Matrix, b: &Vector) -> Result<Vector> {
    let (r, c) = a.shape();
    if r != c || b.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "solve_square: A is {r}x{c}, b has length {}",
            b.len()
        )));
    }
    ensure_finite(a, "matrix")?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side".into()));
    }
    let sv = singular_values(a);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if r > 0 && smin <= r as f64 * f64::EPSILON * smax {
        return Err(Error::RankDeficient { sigma_min: smin });
    }
    a.clone().lu().solve(b).ok_or(Error::RankDeficient { sigma_min: smin })
}

/// `B * A^{-1}` for square `A`, computed by solving `A^T X^T = B^T`.
pub fn right_divide(b: &Matrix, a: &Matrix) -> Result<Matrix> {
    if a.nrows() != a.ncols() || b.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right_divide: B is {}x{}, A is {}x{}",
            b.nrows(),
            b.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let at = a.transpose();
    let mut out = Matrix::zeros(b.nrows(), b.ncols());
    for i in 0..b.nrows() {
        let row = b.row(i).transpose();
        let x = solve_square(&at, &row)?;
        out.set_row(i, &x.transpose());
    }
    Ok(out)
}
