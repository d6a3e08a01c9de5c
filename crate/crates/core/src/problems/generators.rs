//! Seeded random instances for tests and benchmarks.
//!
//! LP generator: a uniform interior point `e0` in `[0.5, 1.5]^n`; `A` stacks
//! the row `(1/e0_1, ..., 1/e0_n)` on top of `m - 1` Gaussian rows and is
//! then row-orthonormalized; `b = A e0`; `c` is a Gaussian vector projected
//! off the row space of `A` and normalized. The first row equals `H(e0) e0`
//! for the product barrier, so `<e0, x>_{e0}` is constant on the feasible set
//! and the relaxation at `e0` is bounded.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ipm::SolverOptions;
use crate::linalg::project_off_row_space;
use crate::poly::{pack_symmetric, HyperbolicPolynomial, PolynomialSpec};
use crate::problems::HyperbolicProgram;
use crate::qp::QpProblem;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gaussian(rng))
}

/// Orthonormalizes the rows of `a` (Gram-Schmidt order preserved).
fn orthonormal_rows(a: &DMatrix<f64>) -> DMatrix<f64> {
    let q = a.transpose().qr().q();
    q.transpose()
}

/// Random objective off the row space of `a`, unit length.
fn objective_off<R: Rng + ?Sized>(a: &DMatrix<f64>, rng: &mut R) -> DVector<f64> {
    loop {
        let c = project_off_row_space(a, &gaussian_vector(a.ncols(), rng));
        let norm = c.norm();
        if norm > 1e-3 {
            return c / norm;
        }
    }
}

/// Bounded random LP with `n` variables and `m` constraints (`1 <= m < n`).
pub fn random_lp<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<HyperbolicProgram> {
    if m == 0 || m >= n {
        return Err(Error::Input(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    let e0 = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
    let mut raw = DMatrix::from_fn(m, n, |_, _| gaussian(rng));
    for j in 0..n {
        raw[(0, j)] = 1.0 / e0[j];
    }
    let a = orthonormal_rows(&raw);
    let b = &a * &e0;
    let c = objective_off(&a, rng);
    HyperbolicProgram::new(
        &a,
        b.as_slice(),
        c.as_slice(),
        PolynomialSpec::product(n),
        e0.as_slice(),
        SolverOptions::default(),
    )
}

/// `min tr(C X)  s.t.  tr(X) = 1` with a Gaussian symmetric `C`.
pub fn random_sdp<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<HyperbolicProgram> {
    let g = DMatrix::from_fn(k, k, |_, _| gaussian(rng));
    let c = (&g + g.transpose()) * 0.5;
    let x0 = DMatrix::identity(k, k) / k as f64;
    HyperbolicProgram::from_sdp(&[DMatrix::identity(k, k)], &[1.0], &c, &x0)
}

/// Pencil `x_1 I + x_2 A_2 + ... + x_n A_n` with Gaussian symmetric `A_i`
/// and hyperbolic direction `e_1`.
pub fn random_pencil<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> PolynomialSpec {
    let mut mats = vec![DMatrix::identity(k, k)];
    for _ in 1..n {
        let g = DMatrix::from_fn(k, k, |_, _| gaussian(rng));
        mats.push((&g + g.transpose()) * 0.5);
    }
    let mut dir = vec![0.0; n];
    dir[0] = 1.0;
    PolynomialSpec::pencil(mats, dir)
}

/// A random point strictly inside the hyperbolicity cone of `p`, with
/// smallest eigenvalue bounded away from zero.
pub fn random_interior_point<R: Rng + ?Sized>(p: &HyperbolicPolynomial, rng: &mut R) -> Result<Vec<f64>> {
    let n = p.dimension();
    match p.kind() {
        "product" => Ok((0..n).map(|_| rng.random_range(0.2..2.0)).collect()),
        "determinant" => {
            let k = p.degree();
            let g = DMatrix::from_fn(k, k, |_, _| gaussian(rng));
            let x = &g * g.transpose() / k as f64 + DMatrix::identity(k, k) * 0.2;
            Ok(pack_symmetric(&x))
        }
        "lorentz" => {
            let rest: Vec<f64> = (0..n - 1).map(|_| gaussian(rng)).collect();
            let norm = rest.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut x = rest;
            x.push(norm + rng.random_range(0.1..1.0));
            Ok(x)
        }
        _ => {
            let dir = p.direction().to_vec();
            for _ in 0..1000 {
                let x: Vec<f64> = dir.iter().map(|d| d + 0.3 * gaussian(rng)).collect();
                let vals = match p.analytic_eigenvalues(&x, &dir) {
                    Ok(v) => v,
                    Err(_) => crate::univariate::eigenvalues(p, &x, &dir)?,
                };
                if *vals.last().expect("degree >= 1") > 0.05 {
                    return Ok(x);
                }
            }
            Err(Error::NumericalFailure("could not sample an interior point".into()))
        }
    }
}

/// Family used by [`random_qp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpFamily {
    Product,
    Lorentz,
}

/// Random relaxation at a random interior center. The first constraint row
/// is `H(e) e`, which fixes `<e, x>_e` and makes the feasible slice of the
/// quadratic cone bounded; the remaining `m - 1` rows are Gaussian.
pub fn random_qp<R: Rng + ?Sized>(
    family: QpFamily,
    n: usize,
    m: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<(HyperbolicPolynomial, QpProblem)> {
    if m == 0 || m >= n {
        return Err(Error::Input(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    let poly = match family {
        QpFamily::Product => HyperbolicPolynomial::product(n),
        QpFamily::Lorentz => HyperbolicPolynomial::lorentz(n),
    };
    let e = random_interior_point(&poly, rng)?;
    let g = DVector::from_vec(poly.analytic_gradient(&e)?);
    let h = poly.analytic_hessian(&e)?;
    let ev = DVector::from_vec(e);
    let mut a = DMatrix::from_fn(m, n, |_, _| gaussian(rng));
    let he = &h * &ev;
    a.row_mut(0).copy_from(&(he.transpose() / he.norm()));
    let b = &a * &ev;
    let c = objective_off(&a, rng);
    let q = QpProblem::new(a, b, c, ev, g, h, alpha, poly.degree())?;
    Ok((poly, q))
}
