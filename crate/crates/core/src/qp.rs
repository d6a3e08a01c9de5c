//! Exact solution of the quadratic-cone relaxation
//!
//! ```text
//! min <c, x>  s.t.  A x = b,  x in K_e(alpha) = { x : <e,x>_e >= alpha |x|_e }
//! ```
//!
//! The KKT conditions `A x = b` and
//! `lambda c - A^T y + <g,x> g - alpha^2 H x = 0` define a one-parameter
//! affine family of `(x, y, lambda)`. Substituting it into the boundary
//! equation `<g,x>^2 - alpha^2 x^T H x = 0` leaves a scalar quadratic whose
//! two roots are the candidate optimizers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, project_off_row_space};
use crate::oracle::Oracle;
use crate::univariate::min_eigenvalue;

/// Tolerances used when validating and solving a relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpTolerances {
    /// Relative singular-value cutoff for the KKT rank test.
    pub rank: f64,
    /// Relative residual allowed in `A e = b`.
    pub feasibility: f64,
    /// `c` must keep this fraction of its norm off the row space of `A`.
    pub row_space: f64,
}

impl Default for QpTolerances {
    fn default() -> Self {
        Self { rank: 1e-11, feasibility: 1e-8, row_space: 1e-10 }
    }
}

/// One relaxation `QP_e(alpha)` built at the center `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub e: DVector<f64>,
    /// Gradient of `-ln p` at `e`.
    pub g: DVector<f64>,
    /// Hessian of `-ln p` at `e`.
    pub h: DMatrix<f64>,
    pub alpha: f64,
    pub degree: usize,
}

/// Optimizer of the relaxation together with its dual certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub x_e: Vec<f64>,
    /// Equality multiplier from the KKT system.
    pub y: Vec<f64>,
    /// Multiplier on `c`, `(d - alpha^2) <g, x_e> / <c, e - x_e>`.
    pub lambda_mult: f64,
    pub y_dual: Vec<f64>,
    pub s_dual: Vec<f64>,
    /// `<c, e - x_e>`.
    pub gap: f64,
    /// `<e, x_e>_e`.
    pub e_inner_x: f64,
    /// Number of candidates surviving the nappe filter.
    pub feasible_candidates: usize,
}

impl QpProblem {
    /// Validates dimensions and the standing assumptions with default
    /// tolerances.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        e: DVector<f64>,
        g: DVector<f64>,
        h: DMatrix<f64>,
        alpha: f64,
        degree: usize,
    ) -> Result<Self> {
        let q = Self { a, b, c, e, g, h, alpha, degree };
        q.validate(&QpTolerances::default())?;
        Ok(q)
    }

    pub fn dimension(&self) -> usize {
        self.a.ncols()
    }

    pub fn constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn validate(&self, tol: &QpTolerances) -> Result<()> {
        let (m, n) = self.a.shape();
        if m == 0 || n == 0 {
            return Err(Error::Input("constraint matrix is empty".into()));
        }
        if self.b.len() != m || self.c.len() != n || self.e.len() != n || self.g.len() != n || self.h.shape() != (n, n)
        {
            return Err(Error::Input(format!(
                "inconsistent dimensions: A is {m}x{n}, b {}, c {}, e {}, g {}, H {}x{}",
                self.b.len(),
                self.c.len(),
                self.e.len(),
                self.g.len(),
                self.h.nrows(),
                self.h.ncols()
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Input(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if self.degree == 0 || (self.degree as f64) <= self.alpha * self.alpha {
            return Err(Error::Input(format!("degree {} is too small", self.degree)));
        }
        let finite = self.a.iter().chain(self.b.iter()).chain(self.c.iter()).chain(self.e.iter());
        if finite.chain(self.g.iter()).chain(self.h.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite entry in relaxation data".into()));
        }
        if self.b.norm() == 0.0 {
            return Err(Error::AssumptionViolation("b must be nonzero".into()));
        }
        if numerical_rank(&self.a, tol.rank) < m {
            return Err(Error::AssumptionViolation("A does not have full row rank".into()));
        }
        let off = project_off_row_space(&self.a, &self.c);
        if off.norm() <= tol.row_space * self.c.norm() {
            return Err(Error::AssumptionViolation("c lies in the row space of A".into()));
        }
        let resid = (&self.a * &self.e - &self.b).norm();
        if resid > tol.feasibility * (1.0 + self.b.norm()) {
            return Err(Error::AssumptionViolation(format!("A e differs from b by {resid:e}")));
        }
        if self.h.clone().cholesky().is_none() {
            return Err(Error::Indefinite("H(e) is not positive definite".into()));
        }
        Ok(())
    }

    /// `<u, v>_e`.
    pub fn local_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.h * v))
    }

    pub fn local_norm(&self, u: &DVector<f64>) -> f64 {
        self.local_inner(u, u).max(0.0).sqrt()
    }

    /// `<g, x>^2 - alpha^2 x^T H x`; zero on the boundary of `K_e(alpha)`.
    pub fn boundary_value(&self, x: &DVector<f64>) -> f64 {
        let gx = self.g.dot(x);
        gx * gx - self.alpha * self.alpha * self.local_inner(x, x)
    }
}

/// Solves `QP_e(alpha)` with default tolerances.
pub fn solve_qp(q: &QpProblem) -> Result<QpSolution> {
    solve_qp_with(q, &QpTolerances::default())
}

pub fn solve_qp_with(q: &QpProblem, tol: &QpTolerances) -> Result<QpSolution> {
    q.validate(tol)?;
    let (m, n) = q.a.shape();
    let alpha2 = q.alpha * q.alpha;

    // Jacobi scaling x = S^{-1} u gives H a unit diagonal; rows of A and the
    // objective are normalized so every block of the KKT matrix is O(1).
    let s: DVector<f64> = q.h.diagonal().map(f64::sqrt);
    let hs = DMatrix::from_fn(n, n, |i, j| q.h[(i, j)] / (s[i] * s[j]));
    let gs = q.g.component_div(&s);
    let a_cols = DMatrix::from_fn(m, n, |i, j| q.a[(i, j)] / s[j]);
    let row_norms: Vec<f64> = a_cols.row_iter().map(|r| r.norm()).collect();
    let a_s = DMatrix::from_fn(m, n, |i, j| a_cols[(i, j)] / row_norms[i]);
    let b_s = DVector::from_fn(m, |i, _| q.b[i] / row_norms[i]);
    let c_raw = q.c.component_div(&s);
    let c_norm = c_raw.norm();
    let c_s = &c_raw / c_norm;

    let scaled = Scaled { s, hs, gs, a_s, b_s, c_s, alpha2 };
    // A second pass rescales the y and lambda columns when their magnitudes
    // differ strongly from that of x, which otherwise costs accuracy in A x = b.
    let mut col = (1.0, 1.0);
    let mut pass = kkt_pass(q, &scaled, col, tol)?;
    for _ in 0..2 {
        let xz = pass.z.rows(0, n).norm().max(f64::MIN_POSITIVE);
        let ry = pass.z.rows(n, m).norm() / xz;
        let rl = pass.z[n + m].abs() / xz;
        let off = |r: f64| r > 0.0 && !(1e-2..=1e2).contains(&r);
        if !off(ry) && !off(rl) {
            break;
        }
        if off(ry) {
            col.0 *= ry;
        }
        if off(rl) {
            col.1 *= rl;
        }
        pass = kkt_pass(q, &scaled, col, tol)?;
    }
    let best = pass.best;
    let y = DVector::from_fn(m, |i, _| pass.z[n + i] * col.0 / row_norms[i]);
    let (y_dual, s_dual, lambda_mult) = dual_from_primal(q, &best.x)?;
    Ok(QpSolution {
        x_e: best.x.as_slice().to_vec(),
        y: y.as_slice().to_vec(),
        lambda_mult,
        y_dual: y_dual.as_slice().to_vec(),
        s_dual: s_dual.as_slice().to_vec(),
        gap: q.c.dot(&(&q.e - &best.x)),
        e_inner_x: best.e_inner,
        feasible_candidates: pass.feasible,
    })
}

struct Scaled {
    s: DVector<f64>,
    hs: DMatrix<f64>,
    gs: DVector<f64>,
    a_s: DMatrix<f64>,
    b_s: DVector<f64>,
    c_s: DVector<f64>,
    alpha2: f64,
}

struct Candidate {
    tau: f64,
    x: DVector<f64>,
    objective: f64,
    e_inner: f64,
}

struct Pass {
    best: Candidate,
    /// Scaled unknowns `(u, y / col.0, lambda / col.1)` at the optimum.
    z: DVector<f64>,
    feasible: usize,
}

/// Solves the scaled KKT family with the `y` and `lambda` columns multiplied
/// by `col` and picks the optimal boundary candidate.
fn kkt_pass(q: &QpProblem, sc: &Scaled, col: (f64, f64), tol: &QpTolerances) -> Result<Pass> {
    let (m, n) = sc.a_s.shape();
    let Scaled { s, hs, gs, a_s, b_s, c_s, alpha2 } = sc;
    let alpha2 = *alpha2;
    let dim = n + m + 1;
    // Rows: A u = b, then stationarity; unknowns (u, y / col.0, lambda / col.1).
    let mut kkt = DMatrix::<f64>::zeros(n + m, dim);
    kkt.view_mut((0, 0), (m, n)).copy_from(a_s);
    let curvature = gs * gs.transpose() - hs * alpha2;
    kkt.view_mut((m, 0), (n, n)).copy_from(&curvature);
    kkt.view_mut((m, n), (n, m)).copy_from(&(-a_s.transpose() * col.0));
    kkt.view_mut((m, n + m), (n, 1)).copy_from(&(c_s * col.1));
    let mut rhs = DVector::<f64>::zeros(n + m);
    rhs.rows_mut(0, m).copy_from(b_s);

    // K^T = Q R: the columns of Q span the row space, its orthogonal
    // complement is the one-dimensional solution family.
    let qr = kkt.transpose().qr();
    let q1 = qr.q();
    let r = qr.r();
    let sv = crate::linalg::singular_values(&r);
    let rcond = sv.last().copied().unwrap_or(0.0) / sv.first().copied().unwrap_or(1.0);
    let r_inv = r
        .clone()
        .solve_upper_triangular(&DMatrix::identity(n + m, n + m))
        .filter(|inv| inv.iter().all(|v| v.is_finite()));
    if !(rcond > tol.rank) || r_inv.is_none() {
        return Err(Error::AssumptionViolation(format!(
            "KKT system is rank deficient (reciprocal condition {rcond:.1e}); the center may be outside the swath"
        )));
    }
    let r_inv = r_inv.expect("checked above");
    let min_norm = |v: &DVector<f64>| &q1 * (r_inv.transpose() * v);
    let mut particular = min_norm(&rhs);
    let residual = &rhs - &kkt * &particular;
    particular += min_norm(&residual);

    let k = (0..dim).min_by(|&i, &j| q1.row(i).norm_squared().total_cmp(&q1.row(j).norm_squared())).expect("dim >= 1");
    let mut null = DVector::<f64>::zeros(dim);
    null[k] = 1.0;
    for _ in 0..2 {
        let proj = &q1 * (q1.transpose() * &null);
        null -= proj;
    }
    // Normalize on the x block so the boundary quadratic is in x units.
    let xn_norm = null.rows(0, n).norm();
    if xn_norm == 0.0 {
        return Err(Error::NumericalFailure("KKT null direction does not move x".into()));
    }
    null /= xn_norm;

    let xp = particular.rows(0, n).into_owned();
    let xn = null.rows(0, n).into_owned();
    let (gp, gn) = (gs.dot(&xp), gs.dot(&xn));
    let hxp = hs * &xp;
    let hxn = hs * &xn;
    let qa = gn * gn - alpha2 * xn.dot(&hxn);
    let qb = 2.0 * (gp * gn - alpha2 * xp.dot(&hxn));
    let qc = gp * gp - alpha2 * xp.dot(&hxp);
    let roots = quadratic_roots(qa, qb, qc)?;

    let candidates: Vec<Candidate> = roots
        .iter()
        .map(|&tau| {
            let u = &xp + &xn * tau;
            let x = u.component_div(s);
            let objective = q.c.dot(&x);
            let e_inner = q.local_inner(&q.e, &x);
            Candidate { tau, x, objective, e_inner }
        })
        .collect();
    let feasible: Vec<&Candidate> = candidates.iter().filter(|c| c.e_inner > 0.0).collect();
    let count = feasible.len();
    let best = feasible
        .into_iter()
        .reduce(|best, cand| {
            let scale = 1e-14 * (1.0 + best.objective.abs().max(cand.objective.abs()));
            let tie = (cand.objective - best.objective).abs() <= scale;
            if cand.objective < best.objective - scale || (tie && cand.e_inner > best.e_inner) {
                cand
            } else {
                best
            }
        })
        .ok_or_else(|| {
            let summary: Vec<String> = candidates
                .iter()
                .map(|c| {
                    format!("tau={:.6e} <e,x>_e={:.6e} |Ax-b|={:.3e}", c.tau, c.e_inner, (&q.a * &c.x - &q.b).norm())
                })
                .collect();
            Error::NumericalFailure(format!("no candidate on the correct nappe: [{}]", summary.join("; ")))
        })?;

    let z = &particular + &null * best.tau;
    let best = Candidate { tau: best.tau, x: best.x.clone(), objective: best.objective, e_inner: best.e_inner };
    Ok(Pass { best, z, feasible: count })
}

/// Real roots of `a t^2 + b t + c`, a double root reported once.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::NumericalFailure(format!("degenerate boundary quadratic ({a}, {b}, {c})")));
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return Err(Error::NumericalFailure(format!("boundary quadratic is constant ({a}, {b}, {c})")));
        }
        return Ok(vec![-c / b]);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-12 * b.abs().max((4.0 * a * c).abs()) {
        return Err(Error::NumericalFailure(format!(
            "affine KKT family misses the cone boundary (discriminant {disc:e})"
        )));
    }
    let root = disc.max(0.0).sqrt();
    if root == 0.0 {
        return Ok(vec![-b / (2.0 * a)]);
    }
    let qv = -0.5 * (b + b.signum() * root);
    let (t1, t2) = if qv == 0.0 { (root / (2.0 * a), -root / (2.0 * a)) } else { (qv / a, c / qv) };
    Ok(vec![t1, t2])
}

/// Dual pair and multiplier for an accepted primal point:
/// `lambda = (d - alpha^2) <g, x> / <c, e - x>`,
/// `s = <c, e - x> / (d - alpha^2) * H (e - alpha^2 x / <e, x>_e)` and the
/// `y` solving `A^T y = c - s` in the weighted least-squares sense.
pub fn dual_from_primal(q: &QpProblem, x: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>, f64)> {
    let d = q.degree as f64;
    let alpha2 = q.alpha * q.alpha;
    let e_inner = q.local_inner(&q.e, x);
    let scale = q.local_norm(&q.e) * q.local_norm(x);
    if e_inner.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDirection(format!("<e, x>_e = {e_inner:e} vanishes")));
    }
    let gap = q.c.dot(&(&q.e - x));
    if gap == 0.0 {
        return Err(Error::DegenerateDirection("<c, e - x> vanishes".into()));
    }
    let lambda = (d - alpha2) * q.g.dot(x) / gap;
    let shifted = &q.e - x * (alpha2 / e_inner);
    let s = (&q.h * shifted) * (gap / (d - alpha2));
    // y_dual from A^T y = c - s, least squares in the H(e)^{-1} norm so the
    // residual lands where x is small.
    let rhs = &q.c - &s;
    let h_inv = q.h.clone().cholesky().ok_or_else(|| Error::Indefinite("H(e) is not positive definite".into()))?;
    let w_at = h_inv.solve(&q.a.transpose());
    let y = (&q.a * &w_at)
        .cholesky()
        .ok_or_else(|| Error::AssumptionViolation("A H^-1 A^T is singular".into()))?
        .solve(&(w_at.transpose() * rhs));
    Ok((y, s, lambda))
}

/// Membership diagnostics for a point relative to the center `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    /// `<e,x>_e - alpha |x|_e`.
    pub margin: f64,
    pub in_quadratic_cone: bool,
    /// `<e,x>_e - |x|_e`.
    pub margin_unit: f64,
    /// `<e,x>_e - sqrt(d - 1) |x|_e`.
    pub margin_inner: f64,
    pub min_eigenvalue: Option<f64>,
    pub in_hyperbolic_cone: Option<bool>,
}

impl ConeReport {
    /// Whether the observed data is consistent with
    /// `K_e(sqrt(d - 1)) ⊆ hyperbolicity cone ⊆ K_e(1)`.
    pub fn sandwich_holds(&self, tol: f64) -> Option<bool> {
        let lam = self.min_eigenvalue?;
        let outer = lam < -tol || self.margin_unit >= -tol;
        let inner = self.margin_inner < 0.0 || lam >= -tol;
        Some(outer && inner)
    }
}

/// Reports where `x` sits relative to `K_e(alpha)` and, given an oracle, the
/// hyperbolicity cone (eigenvalues taken in direction `e`).
pub fn cone_check<O: Oracle + ?Sized>(q: &QpProblem, x: &DVector<f64>, oracle: Option<&O>) -> ConeReport {
    let e_inner = q.local_inner(&q.e, x);
    let norm = q.local_norm(x);
    let margin = e_inner - q.alpha * norm;
    let min_eig = oracle.and_then(|p| min_eigenvalue(p, x.as_slice(), q.e.as_slice()).ok());
    ConeReport {
        margin,
        in_quadratic_cone: margin >= 0.0,
        margin_unit: e_inner - norm,
        margin_inner: e_inner - ((q.degree as f64) - 1.0).max(0.0).sqrt() * norm,
        min_eigenvalue: min_eig,
        in_hyperbolic_cone: min_eig.map(|v| v >= 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HyperbolicPolynomial;

    fn product_qp(e: &[f64], a: &[f64], m: usize, c: &[f64], alpha: f64) -> QpProblem {
        let n = e.len();
        let p = HyperbolicPolynomial::product(n);
        let g = p.analytic_gradient(e).unwrap();
        let h = p.analytic_hessian(e).unwrap();
        let a = DMatrix::from_row_slice(m, n, a);
        let ev = DVector::from_column_slice(e);
        let b = &a * &ev;
        QpProblem::new(a, b, DVector::from_column_slice(c), ev, DVector::from_vec(g), h, alpha, n).unwrap()
    }

    /// Independent solve: x = (x1, 2 - x1), boundary quadratic in x1 for the
    /// product family at e = (1, 1).
    fn brute_line(alpha: f64) -> f64 {
        // <g,x> = -(x1 + x2) = -2, x^T H x = x1^2 + x2^2.
        // 4 = alpha^2 (x1^2 + (2 - x1)^2)  =>  2 x1^2 - 4 x1 + 4 - 4/alpha^2 = 0.
        let (qa, qb, qc) = (2.0, -4.0, 4.0 - 4.0 / (alpha * alpha));
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        ((-qb - disc) / (2.0 * qa)).min((-qb + disc) / (2.0 * qa))
    }

    #[test]
    fn product_example() {
        let q = product_qp(&[1.0, 1.0], &[1.0, 1.0], 1, &[1.0, 0.0], 0.1);
        let sol = solve_qp(&q).unwrap();
        let x = DVector::from_vec(sol.x_e.clone());
        assert!(((&q.a * &x)[0] - 2.0).abs() < 1e-12);
        assert!(q.boundary_value(&x).abs() < 1e-10 * 4.0);
        assert!(q.c.dot(&x) < 1.0);
        assert!((x[0] - brute_line(0.1)).abs() < 1e-10, "{} vs {}", x[0], brute_line(0.1));
    }

    #[test]
    fn solution_invariants() {
        let q = product_qp(
            &[1.0, 2.0, 0.5, 1.5],
            &[1.0, 0.5, 2.0, 1.0 / 1.5, 0.0, 1.0, -1.0, 0.3],
            2,
            &[0.3, -0.2, 0.9, 0.1],
            0.1,
        );
        let sol = solve_qp(&q).unwrap();
        let x = DVector::from_vec(sol.x_e.clone());
        let s = DVector::from_vec(sol.s_dual.clone());
        let y = DVector::from_vec(sol.y_dual.clone());
        assert!((&q.a * &x - &q.b).norm() < 1e-10);
        assert!(x.dot(&s).abs() < 1e-8);
        assert!((q.b.dot(&y) - q.c.dot(&x)).abs() < 1e-8);
        assert!((sol.gap - (q.c.dot(&q.e) - q.b.dot(&y))).abs() < 1e-8);
        assert!((q.e.dot(&s) - sol.gap).abs() < 1e-8);
        // s agrees with c - A^T y_dual.
        assert!((&q.c - q.a.transpose() * &y - &s).norm() < 1e-8);
        let shifted = &q.e - &x * (0.01 / sol.e_inner_x);
        assert!((q.local_inner(&shifted, &shifted) - (4.0 - 0.01)).abs() < 1e-9);
        // The KKT multipliers satisfy stationarity with y_dual = y / lambda.
        let yk = DVector::from_vec(sol.y.clone());
        let stat = &q.c * sol.lambda_mult - q.a.transpose() * &yk + &q.g * q.g.dot(&x) - (&q.h * &x) * 0.01;
        assert!(stat.norm() < 1e-8 * (1.0 + yk.norm()), "{stat}");
        assert!((&yk / sol.lambda_mult - &y).norm() < 1e-8);
    }

    #[test]
    fn rejects_objective_in_row_space() {
        let p = HyperbolicPolynomial::product(2);
        let e = [1.0, 1.0];
        let r = QpProblem::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_vec(vec![2.0]),
            DVector::from_vec(vec![3.0, 3.0]),
            DVector::from_column_slice(&e),
            DVector::from_vec(p.analytic_gradient(&e).unwrap()),
            p.analytic_hessian(&e).unwrap(),
            0.1,
            2,
        );
        assert!(matches!(r, Err(Error::AssumptionViolation(_))));
    }

    #[test]
    fn rejects_zero_rhs_and_rank_deficiency() {
        let p = HyperbolicPolynomial::product(3);
        let e = [1.0, 1.0, 1.0];
        let g = DVector::from_vec(p.analytic_gradient(&e).unwrap());
        let h = p.analytic_hessian(&e).unwrap();
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let r = QpProblem::new(
            a.clone(),
            DVector::from_vec(vec![3.0, 6.0]),
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_column_slice(&e),
            g.clone(),
            h.clone(),
            0.1,
            3,
        );
        assert!(matches!(r, Err(Error::AssumptionViolation(_))));
        let a = DMatrix::from_row_slice(1, 3, &[1.0, -1.0, 0.0]);
        let r = QpProblem::new(
            a,
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_column_slice(&e),
            g,
            h,
            0.1,
            3,
        );
        assert!(matches!(r, Err(Error::AssumptionViolation(_))));
    }

    #[test]
    fn quadratic_roots_cases() {
        assert_eq!(quadratic_roots(1.0, -2.0, 1.0).unwrap(), vec![1.0]);
        let mut r = quadratic_roots(1.0, -3.0, 2.0).unwrap();
        r.sort_by(f64::total_cmp);
        assert_eq!(r, vec![1.0, 2.0]);
        assert_eq!(quadratic_roots(0.0, 2.0, -4.0).unwrap(), vec![2.0]);
        assert!(quadratic_roots(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cone_check_at_center() {
        let q = product_qp(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 1, &[1.0, 0.0, 0.0], 0.1);
        let p = HyperbolicPolynomial::product(3);
        let r = cone_check(&q, &q.e.clone(), Some(&p));
        assert!((r.margin - (3.0 - 0.1 * 3f64.sqrt())).abs() < 1e-12);
        assert!(r.in_quadratic_cone);
        assert_eq!(r.in_hyperbolic_cone, Some(true));
        assert_eq!(r.sandwich_holds(1e-12), Some(true));
    }
}
