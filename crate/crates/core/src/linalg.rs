//! Small dense linear-algebra helpers (dimensions here never exceed a
//! handful of states).

use nalgebra::linalg::Cholesky;

use crate::{Error, Matrix, Result, Vector};

/// Build a matrix from row slices. All rows must have the same length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("matrix", "rows have different lengths"));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `xᵀ M x`.
pub fn quad_form(m: &Matrix, x: &Vector) -> f64 {
    x.dot(&(m * x))
}

/// Symmetric within `rel_tol` relative to the largest entry.
pub fn is_symmetric(m: &Matrix, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= rel_tol * scale))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(m: &Matrix, what: &'static str) -> Result<Matrix> {
    if !is_symmetric(m, 1e-12) {
        return Err(Error::invalid(what, "matrix is not symmetric"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(what, "matrix has non-finite entries"));
    }
    Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::invalid(what, "matrix is not positive definite"))
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as the columns of
/// an orthonormal matrix, so `m = P diag(λ) Pᵀ`. Iterates until the
/// off-diagonal Frobenius norm drops below `1e-13` (relative to `‖m‖_F`).
pub fn symmetric_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    let mut a = m.clone();
    // symmetrize against round-off in the caller's products
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut p = Matrix::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off < 1e-13 * scale {
            break;
        }
        for k in 0..n {
            for l in (k + 1)..n {
                let akl = a[(k, l)];
                if akl == 0.0 {
                    continue;
                }
                let theta = (a[(l, l)] - a[(k, k)]) / (2.0 * akl);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aik = a[(i, k)];
                    let ail = a[(i, l)];
                    a[(i, k)] = c * aik - s * ail;
                    a[(i, l)] = s * aik + c * ail;
                }
                for i in 0..n {
                    let aki = a[(k, i)];
                    let ali = a[(l, i)];
                    a[(k, i)] = c * aki - s * ali;
                    a[(l, i)] = s * aki + c * ali;
                }
                for i in 0..n {
                    let pik = p[(i, k)];
                    let pil = p[(i, l)];
                    p[(i, k)] = c * pik - s * pil;
                    p[(i, l)] = s * pik + c * pil;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), p)
}

/// Symmetric square root of a symmetric positive semi-definite matrix.
pub fn symmetric_sqrt(m: &Matrix) -> Matrix {
    let (vals, vecs) = symmetric_eigen(m);
    let n = vals.len();
    let d = Matrix::from_diagonal(&Vector::from_iterator(
        n,
        vals.iter().map(|v| v.max(0.0).sqrt()),
    ));
    let mut r = &vecs * d * vecs.transpose();
    r = 0.5 * (&r + r.transpose());
    r
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &Matrix) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
