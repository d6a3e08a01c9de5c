//! Small dense helpers shared by the polynomial families and the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Determinant of a complex square matrix (row-major, side `k`) by LU with
/// partial pivoting.
pub fn complex_det(mut a: Vec<Complex64>, k: usize) -> Complex64 {
    debug_assert_eq!(a.len(), k * k);
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let mut pivot = col;
        let mut best = a[col * k + col].norm();
        for row in col + 1..k {
            let v = a[row * k + col].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        let diag = a[col * k + col];
        det *= diag;
        for row in col + 1..k {
            let factor = a[row * k + col] / diag;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..k {
                let upd = factor * a[col * k + j];
                a[row * k + j] -= upd;
            }
        }
    }
    det
}

/// Cholesky-based positive-definiteness test.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

/// Eigenvalues of the symmetric pencil `det(t E - X) = 0` with `E` positive
/// definite, sorted in descending order. Returns `None` if `E` is not PD.
pub fn generalized_sym_eigenvalues(x: &DMatrix<f64>, e: &DMatrix<f64>) -> Option<Vec<f64>> {
    let chol = e.clone().cholesky()?;
    let l = chol.l();
    // L^{-1} X L^{-T}
    let linv_x = l.solve_lower_triangular(x)?;
    let m = l.solve_lower_triangular(&linv_x.transpose())?;
    let m = (&m + m.transpose()) * 0.5;
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Some(vals)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with relative threshold `tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&0.0) => 0,
        Some(&top) => s.iter().filter(|&&v| v > tol * top).count(),
    }
}

/// Orthonormal basis (columns) for the column space of `m`, from a
/// column-pivoted QR with relative rank threshold `tol`.
pub fn range_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let top = r[(0, 0)].abs();
    let rank =
        if top == 0.0 { 0 } else { (0..r.nrows().min(r.ncols())).take_while(|&i| r[(i, i)].abs() > tol * top).count() };
    qr.q().columns(0, rank).into_owned()
}

/// Component of `v` orthogonal to the row space of `a`.
pub fn project_off_row_space(a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if a.nrows() == 0 {
        return v.clone();
    }
    let q = range_basis(&a.transpose(), 1e-12);
    let mut out = v.clone();
    // Second pass for orthogonality to working precision.
    for _ in 0..2 {
        let proj = &q * (q.transpose() * &out);
        out -= proj;
    }
    out
}

/// Orthonormal basis for the null space of `a` (columns): the orthogonal
/// complement of its row space.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let rows = range_basis(&a.transpose(), tol);
    let mut complement = DMatrix::<f64>::identity(n, n);
    for _ in 0..2 {
        let proj = &rows * (rows.transpose() * &complement);
        complement -= proj;
    }
    let basis = range_basis(&complement, 1e-8);
    let basis = basis.columns(0, basis.ncols().min(n - rows.ncols())).into_owned();
    // Re-orthogonalize against the row space and within itself.
    let mut out = &basis - &rows * (rows.transpose() * &basis);
    if out.ncols() > 0 {
        out = out.qr().q();
    }
    out
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
