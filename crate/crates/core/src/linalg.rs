//! Small dense linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on dynamically sized matrices because ambient
//! dimensions are runtime data (at most 8 in practice).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative rank tolerance used for spans of section values and bases.
pub const RANK_TOL: f64 = 1e-10;

/// Symmetric eigendecomposition with eigenvalues ascending and each
/// eigenvector's largest-magnitude entry made positive, so that results are
/// reproducible across runs.
pub fn sym_eigen(m: &Matrix) -> (Vector, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vector::zeros(0), Matrix::zeros(0, 0));
    }
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vector::zeros(n);
    let mut vectors = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[i];
        let mut col = eig.eigenvectors.column(i).into_owned();
        let lead = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (j, x)| {
                if x.abs() > acc.1 + 1e-12 {
                    (j, x.abs())
                } else {
                    acc
                }
            })
            .0;
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    (values, vectors)
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Numerical rank from singular values, relative to the largest one.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Columns form an orthonormal basis of the null space of `m`.
pub fn null_space(m: &Matrix, rel_tol: f64) -> Matrix {
    let n = m.ncols();
    let r = rank(m, rel_tol);
    let (_, vecs) = sym_eigen(&(m.transpose() * m));
    // Ascending eigenvalues: the first n - r eigenvectors span the kernel.
    vecs.columns(0, n - r).into_owned()
}

/// Euclidean orthonormal basis of the column span (modified Gram-Schmidt
/// with one reorthogonalization pass, dropping dependent columns).
pub fn orthonormal_columns(m: &Matrix, rel_tol: f64) -> Matrix {
    let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut kept: Vec<Vector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &kept {
                let c = q.dot(&v);
                v -= q * c;
            }
        }
        let norm = v.norm();
        if norm > rel_tol * scale {
            kept.push(v / norm);
        }
    }
    columns_to_matrix(m.nrows(), &kept)
}

pub fn columns_to_matrix(rows: usize, cols: &[Vector]) -> Matrix {
    let mut out = Matrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

pub fn rows_to_matrix(rows: &[Vec<f64>], ncols: usize) -> Matrix {
    Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Least-squares coordinates `c` with `basis * c ≈ v`, plus the Euclidean
/// residual norm.
pub fn coordinates_in(basis: &Matrix, v: &Vector) -> (Vector, f64) {
    if basis.ncols() == 0 {
        return (Vector::zeros(0), v.norm());
    }
    let gram = basis.transpose() * basis;
    let rhs = basis.transpose() * v;
    let c = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => basis
            .clone()
            .svd(true, true)
            .solve(v, 1e-14)
            .unwrap_or_else(|_| Vector::zeros(basis.ncols())),
    };
    let residual = (basis * &c - v).norm();
    (c, residual)
}

/// Largest eigenvalue of the pencil `target - λ·reference` for symmetric
/// `target` and positive-definite `reference`, and a maximizing vector `y`
/// normalized to `yᵀ·reference·y = 1`.
///
/// Equivalently, `max { yᵀ target y : yᵀ reference y ≤ 1 }` and its argmax.
pub fn max_generalized_eigen(target: &Matrix, reference: &Matrix) -> Result<(f64, Vector)> {
    let chol = reference
        .clone()
        .cholesky()
        .ok_or_else(|| Error::DegenerateEllipsoid("reference Gram is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateEllipsoid("singular Cholesky factor".into()))?;
    let reduced = &l_inv * target * l_inv.transpose();
    let (vals, vecs) = sym_eigen(&reduced);
    let n = vals.len();
    let z = vecs.column(n - 1).into_owned();
    let y = l_inv.transpose() * z;
    Ok((vals[n - 1], y))
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &Matrix) -> Option<Matrix> {
    let inv = m.clone().cholesky()?.inverse();
    Some(symmetrize(&inv))
}

pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigen_is_sorted_and_sign_fixed() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = sym_eigen(&m);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
        for j in 0..2 {
            let col = vecs.column(j);
            let lead = col.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() + 1e-12 { x } else { a });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn null_space_of_row() {
        let m = Matrix::from_row_slice(1, 2, &[1.0, 0.5]);
        let ns = null_space(&m, RANK_TOL);
        assert_eq!(ns.ncols(), 1);
        assert!((m * ns).norm() < 1e-12);
    }

    #[test]
    fn generalized_eigen_matches_ratio() {
        // max of xᵀ(I/3)x over the ellipse with semi-axes (2, √2).
        let target = Matrix::identity(2, 2) / 3.0;
        let reference = Matrix::from_diagonal(&Vector::from_vec(vec![0.25, 0.5]));
        let (val, y) = max_generalized_eigen(&target, &reference).unwrap();
        assert_relative_eq!(val, 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!((y.transpose() * &reference * &y)[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(y.norm(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_and_coordinates() {
        let b = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(rank(&b, RANK_TOL), 2);
        let (c, res) = coordinates_in(&b, &Vector::from_vec(vec![2.0, -1.0, 0.0]));
        assert_relative_eq!(c[0], 2.0);
        assert_relative_eq!(c[1], -1.0);
        assert!(res < 1e-14);
        let (_, res) = coordinates_in(&b, &Vector::from_vec(vec![0.0, 0.0, 1.0]));
        assert_relative_eq!(res, 1.0);
    }
}
