//! Derivatives of the log-barrier `f(x) = -ln p(x)` from point evaluations.
//!
//! The directional derivative `<grad p(x), w>` is the linear coefficient of
//! `t -> p(x + t w)`, recovered from `d` samples on the unit circle:
//!
//! ```text
//! a_1 = (1/d) sum_{j=1..d} w^{-j} (p(x + w^j w) - p(x))
//! ```
//!
//! Hessian-vector products nest this formula once more: the mixed term
//! `<grad d_i p(x), w>` is the linear coefficient of
//! `s -> <grad p(x + s e_i), w>`, each inner value being itself an
//! interpolation at the complex point `x + w^j e_i`. Oracles must therefore
//! accept complex input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{complexify, homogeneous_scale, unit_root, well_scaled, Oracle};
use crate::poly::HyperbolicPolynomial;

/// Source of gradients and Hessians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Closed-form family formulas (falls back to the oracle path for
    /// families without them).
    #[default]
    Analytic,
    /// Roots-of-unity interpolation using only oracle evaluations.
    Oracle,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Sample spread `max |P_k - p(base)| / |p(base)|` above which the
/// interpolation radius is reduced. Along a direction of unit local norm the
/// spread is at most `exp(sqrt(d))`, so the limit grows with the degree.
const MAX_GROWTH: f64 = 64.0;
const SHRINK_ROUNDS: usize = 4;

fn growth_limit(d: usize) -> f64 {
    MAX_GROWTH * (d as f64).sqrt().exp()
}

fn shrink_factor(growth: f64) -> f64 {
    growth.sqrt().min(1e8)
}

/// First and second Taylor coefficients of `t -> p(base + t w)`.
#[derive(Debug, Clone, Copy)]
struct Line {
    a1: Complex64,
    a2: Complex64,
}

impl Line {
    /// Local norm `|w|_x` implied by the coefficients when `base` is real.
    fn local_norm(&self, p_base: Complex64) -> Option<f64> {
        let r = self.a1 / p_base;
        let sq = (r * r - self.a2 * 2.0 / p_base).re;
        (sq > 0.0 && sq.is_finite()).then(|| sq.sqrt())
    }
}

/// Coefficients of `t -> p(base + t w)` at a (possibly complex) base point,
/// given `p(base)`. Makes `d` oracle calls, more only when the samples spread
/// far beyond `reference` (the value of `p` at the real point being
/// differentiated) and the radius has to shrink.
fn line_coefficients<O: Oracle + ?Sized>(
    p: &O,
    base: &[Complex64],
    p_base: Complex64,
    w: &[f64],
    reference: f64,
) -> Line {
    let limit = growth_limit(p.degree());
    let mut radius = 1.0;
    let (mut line, mut growth) = line_coefficients_at(p, base, p_base, w, radius, reference);
    for _ in 0..SHRINK_ROUNDS {
        if !(growth > limit) {
            break;
        }
        radius /= shrink_factor(growth);
        (line, growth) = line_coefficients_at(p, base, p_base, w, radius, reference);
    }
    line
}

fn line_coefficients_at<O: Oracle + ?Sized>(
    p: &O,
    base: &[Complex64],
    p_base: Complex64,
    w: &[f64],
    radius: f64,
    reference: f64,
) -> (Line, f64) {
    let d = p.degree();
    let mut point = base.to_vec();
    let (mut acc1, mut acc2) = (zero(), zero());
    let mut spread = 0.0_f64;
    for j in 1..=d {
        let root = unit_root(d, j as i64) * radius;
        for ((pt, b), wi) in point.iter_mut().zip(base).zip(w) {
            *pt = b + root * *wi;
        }
        let diff = p.eval(&point) - p_base;
        spread = spread.max(diff.norm());
        acc1 += unit_root(d, -(j as i64)) * diff;
        acc2 += unit_root(d, -2 * j as i64) * diff;
    }
    let scale = d as f64 * radius;
    let a2 = if d >= 2 { acc2 / (scale * radius) } else { zero() };
    (Line { a1: acc1 / scale, a2 }, spread / reference)
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn check_point<O: Oracle + ?Sized>(p: &O, x: &[f64]) -> Result<()> {
    if x.len() != p.dimension() {
        return Err(Error::Input(format!("point has length {}, polynomial has {} variables", x.len(), p.dimension())));
    }
    Ok(())
}

/// `(s, s x, p(s x))` with `s` a power of two chosen so that `p(s x)` is
/// representable; `s = 1` unless `p(x)` under- or overflows.
fn scaled_point<O: Oracle + ?Sized>(p: &O, x: &[f64]) -> Result<(f64, Vec<Complex64>, Complex64)> {
    let xc = complexify(x);
    let v = p.eval(&xc);
    let (s, v) = if well_scaled(v) { (1.0, v) } else { homogeneous_scale(p, x, v) };
    if !v.re.is_finite() || v.norm() <= 1e-300 {
        return Err(Error::Singularity(format!("p(x) = {v} vanishes at x")));
    }
    let xs = if s == 1.0 { xc } else { xc.iter().map(|z| z * s).collect() };
    Ok((s, xs, v))
}

/// `<grad(-ln p(x)), w>` with exactly `d + 1` oracle calls.
pub fn grad_dot<O: Oracle + ?Sized>(p: &O, x: &[f64], w: &[f64]) -> Result<f64> {
    check_point(p, x)?;
    check_point(p, w)?;
    let (s, xc, px) = scaled_point(p, x)?;
    let a1 = line_coefficients(p, &xc, px, w, px.norm()).a1;
    Ok(-(a1 / px).re * s)
}

/// `hess(-ln p(x)) w`, coordinate by coordinate:
/// `d_i p <grad p, w> / p^2 - <grad d_i p, w> / p`.
pub fn hess_vec<O: Oracle + ?Sized>(p: &O, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    check_point(p, x)?;
    check_point(p, w)?;
    let n = p.dimension();
    let (s, xc, px) = scaled_point(p, x)?;
    let line_w = line_coefficients(p, &xc, px, w, px.norm());
    let sigma_w = step_scale(&line_w, px);
    let w_scaled: Vec<f64> = w.iter().map(|v| v * sigma_w).collect();
    let out = (0..n)
        .into_par_iter()
        .map(|i| {
            let line_i = line_coefficients(p, &xc, px, &basis(n, i), px.norm());
            let sigma_i = step_scale(&line_i, px);
            let mut ui = vec![0.0; n];
            ui[i] = sigma_i;
            let mixed = mixed_coefficient(p, &xc, px, &ui, &w_scaled, line_w.a1 * sigma_w) / (sigma_i * sigma_w);
            (line_i.a1 * line_w.a1 / (px * px) - mixed / px).re * s * s
        })
        .collect();
    Ok(out)
}

/// Step length giving a direction unit local norm, so interpolation circles
/// match the distance to the nearest root.
fn step_scale(line: &Line, p_base: Complex64) -> f64 {
    match line.local_norm(p_base) {
        Some(nrm) if nrm > 0.0 => 1.0 / nrm,
        _ => 1.0,
    }
}

/// `<grad <grad p(x), u>, w>` given `p(x)` and `<grad p(x), w>`;
/// `d (d + 1)` oracle calls when no radius has to shrink.
fn mixed_coefficient<O: Oracle + ?Sized>(
    p: &O,
    xc: &[Complex64],
    px: Complex64,
    u: &[f64],
    w: &[f64],
    grad_w: Complex64,
) -> Complex64 {
    let limit = growth_limit(p.degree());
    let mut radius = 1.0;
    let (mut value, mut growth) = mixed_coefficient_at(p, xc, px, u, w, grad_w, radius);
    for _ in 0..SHRINK_ROUNDS {
        if !(growth > limit) {
            break;
        }
        radius /= shrink_factor(growth);
        (value, growth) = mixed_coefficient_at(p, xc, px, u, w, grad_w, radius);
    }
    value
}

fn mixed_coefficient_at<O: Oracle + ?Sized>(
    p: &O,
    xc: &[Complex64],
    px: Complex64,
    u: &[f64],
    w: &[f64],
    grad_w: Complex64,
    radius: f64,
) -> (Complex64, f64) {
    let d = p.degree();
    let mut shifted = xc.to_vec();
    let mut acc = zero();
    let mut spread = 0.0_f64;
    for j in 1..=d {
        let root = unit_root(d, j as i64) * radius;
        for ((sh, x), ui) in shifted.iter_mut().zip(xc).zip(u) {
            *sh = x + root * *ui;
        }
        let p_shift = p.eval(&shifted);
        spread = spread.max((p_shift - px).norm());
        let inner = line_coefficients(p, &shifted, p_shift, w, px.norm()).a1;
        acc += unit_root(d, -(j as i64)) * (inner - grad_w);
    }
    (acc / (d as f64 * radius), spread / px.norm())
}

/// Gradient of `-ln p` at `x` with `1 + n d` oracle calls.
pub fn full_gradient<O: Oracle + ?Sized>(p: &O, x: &[f64]) -> Result<Vec<f64>> {
    check_point(p, x)?;
    let n = p.dimension();
    let (s, xc, px) = scaled_point(p, x)?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| -(line_coefficients(p, &xc, px, &basis(n, i), px.norm()).a1 / px).re * s)
        .collect())
}

/// Hessian of `-ln p` at `x` with `1 + n d + n^2 d (d + 1)` oracle calls,
/// symmetrized and checked for positive definiteness.
///
/// Entries are measured along coordinate directions of unit local norm. When
/// the result is still badly conditioned (near the boundary of a cone whose
/// faces are not coordinate aligned) it is measured again along the
/// directions that whiten the first estimate, at most twice, each round
/// costing `n d + n^2 d (d + 1)` more calls.
pub fn full_hessian<O: Oracle + ?Sized>(p: &O, x: &[f64]) -> Result<DMatrix<f64>> {
    check_point(p, x)?;
    let n = p.dimension();
    let (s, xc, px) = scaled_point(p, x)?;
    let coordinate: Vec<Vec<f64>> = (0..n).map(|i| basis(n, i)).collect();
    let lines: Vec<Line> = coordinate.par_iter().map(|u| line_coefficients(p, &xc, px, u, px.norm())).collect();
    let sigma: Vec<f64> = lines.iter().map(|l| step_scale(l, px)).collect();
    // Columns of `frame` are the measurement directions; H = F^-T M F^-1.
    let mut frame = DMatrix::from_diagonal(&DVector::from_vec(sigma.clone()));
    let scaled_lines: Vec<Line> =
        lines.iter().zip(&sigma).map(|(l, s)| Line { a1: l.a1 * *s, a2: l.a2 * (s * s) }).collect();
    let mut measured = hessian_in_frame(p, &xc, px, &frame, &scaled_lines);
    for _ in 0..WHITEN_ROUNDS {
        let eig = measured.clone().symmetric_eigen();
        let top = eig.eigenvalues.amax();
        let low = eig.eigenvalues.min();
        if !(top.is_finite() && top > 0.0) || low > top / WHITEN_COND {
            break;
        }
        let floor = top * f64::EPSILON;
        let inv_sqrt = eig.eigenvalues.map(|v| 1.0 / v.abs().max(floor).sqrt());
        frame = &frame * &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt);
        let frame_lines: Vec<Line> = (0..n)
            .into_par_iter()
            .map(|i| line_coefficients(p, &xc, px, frame.column(i).as_slice(), px.norm()))
            .collect();
        measured = hessian_in_frame(p, &xc, px, &frame, &frame_lines);
    }
    let inv =
        frame.clone().try_inverse().ok_or_else(|| Error::Indefinite("Hessian measurement frame is singular".into()))?;
    let h = inv.transpose() * measured * inv * (s * s);
    let h = (&h + h.transpose()) * 0.5;
    ensure_positive_definite(&h)?;
    Ok(h)
}

/// Condition number of a measured Hessian above which it is re-measured in
/// a whitened frame.
const WHITEN_COND: f64 = 1e4;
const WHITEN_ROUNDS: usize = 2;

/// `F^T hess(-ln p) F` at the scaled point from line and mixed coefficients
/// along the columns of `F`.
fn hessian_in_frame<O: Oracle + ?Sized>(
    p: &O,
    xc: &[Complex64],
    px: Complex64,
    frame: &DMatrix<f64>,
    lines: &[Line],
) -> DMatrix<f64> {
    let n = frame.ncols();
    let columns: Vec<Vec<f64>> = (0..n).map(|i| frame.column(i).iter().copied().collect()).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mixed = mixed_coefficient(p, xc, px, &columns[i], &columns[j], lines[j].a1);
                    (lines[i].a1 * lines[j].a1 / (px * px) - mixed / px).re
                })
                .collect()
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    (&m + m.transpose()) * 0.5
}

fn ensure_positive_definite(h: &DMatrix<f64>) -> Result<()> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Indefinite("Hessian has non-finite entries".into()));
    }
    if h.clone().cholesky().is_none() {
        return Err(Error::Indefinite(
            "Hessian is not positive definite (point not interior or polynomial not hyperbolic)".into(),
        ));
    }
    Ok(())
}

/// Central-difference gradient of `-ln p`; validation oracle only.
pub fn fd_gradient<O: Oracle + ?Sized>(p: &O, x: &[f64], step: f64) -> Result<Vec<f64>> {
    check_point(p, x)?;
    let f = |z: &[f64]| -> Result<f64> {
        let v = p.eval_real(z);
        if !(v > 0.0) {
            return Err(Error::Singularity(format!("p = {v} is not positive near x")));
        }
        Ok(-v.ln())
    };
    let mut z = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        z[i] = x[i] + step;
        let fp = f(&z)?;
        z[i] = x[i] - step;
        let fm = f(&z)?;
        z[i] = x[i];
        out.push((fp - fm) / (2.0 * step));
    }
    Ok(out)
}

/// `(g(x + h w) - g(x - h w)) / 2h` using the supplied gradient routine.
pub fn fd_hess_vec<F>(gradient: F, x: &[f64], w: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let plus: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + step * b).collect();
    let minus: Vec<f64> = x.iter().zip(w).map(|(a, b)| a - step * b).collect();
    let gp = gradient(&plus)?;
    let gm = gradient(&minus)?;
    Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
}

/// `ln p(x)`, failing unless `p(x) > 0`.
fn log_value<O: Oracle + ?Sized>(oracle: &O, x: &[f64]) -> Result<f64> {
    check_point(oracle, x)?;
    let (s, _, v) = scaled_point(oracle, x)?;
    if !(v.re > 0.0) {
        return Err(Error::Singularity(format!("p(x) = {} is not positive", v.re)));
    }
    Ok(v.re.ln() - oracle.degree() as f64 * s.ln())
}

/// Barrier data at an interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierPoint {
    pub x: DVector<f64>,
    /// `ln p(x)`.
    pub log_p: f64,
    pub gradient: Option<DVector<f64>>,
    pub hessian: Option<DMatrix<f64>>,
}

impl BarrierPoint {
    /// Computes `p(x)`, `g(x)` and `H(x)` with the requested derivative
    /// source. Evaluations of `p` go through `oracle` so they can be counted.
    pub fn evaluate<O: Oracle + ?Sized>(
        poly: &HyperbolicPolynomial,
        oracle: &O,
        x: &[f64],
        mode: DerivativeMode,
    ) -> Result<Self> {
        if mode == DerivativeMode::Oracle || !poly.has_analytic() {
            return Self::from_oracle(oracle, x);
        }
        let log_p = log_value(oracle, x)?;
        let h = poly.analytic_hessian(x)?;
        ensure_positive_definite(&h)?;
        Ok(Self {
            x: DVector::from_column_slice(x),
            log_p,
            gradient: Some(DVector::from_vec(poly.analytic_gradient(x)?)),
            hessian: Some(h),
        })
    }

    /// Oracle-only variant for black-box polynomials.
    pub fn from_oracle<O: Oracle + ?Sized>(oracle: &O, x: &[f64]) -> Result<Self> {
        let log_p = log_value(oracle, x)?;
        Ok(Self {
            x: DVector::from_column_slice(x),
            log_p,
            gradient: Some(DVector::from_vec(full_gradient(oracle, x)?)),
            hessian: Some(full_hessian(oracle, x)?),
        })
    }

    pub fn gradient(&self) -> &DVector<f64> {
        self.gradient.as_ref().expect("gradient computed")
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        self.hessian.as_ref().expect("hessian computed")
    }

    /// `<u, v>_x = u^T H(x) v`.
    pub fn local_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(self.hessian() * v))
    }

    pub fn local_norm(&self, u: &DVector<f64>) -> f64 {
        self.local_inner(u, u).max(0.0).sqrt()
    }

    /// Checks `H(x) x = -g(x)` and `x^T H(x) x = d` to relative `tol`.
    pub fn check_identities(&self, degree: usize, tol: f64) -> Result<()> {
        let g = self.gradient();
        let hx = self.hessian() * &self.x;
        let resid = (&hx + g).norm();
        if resid > tol * g.norm().max(1e-300) {
            return Err(Error::NumericalFailure(format!(
                "H(x) x + g(x) has norm {resid:e} against |g| = {:e}",
                g.norm()
            )));
        }
        let quad = self.x.dot(&hx);
        let d = degree as f64;
        if (quad - d).abs() > tol * d {
            return Err(Error::NumericalFailure(format!("x^T H(x) x = {quad} differs from degree {d}")));
        }
        Ok(())
    }
}

/// `u^T H(x) v` with `H` from the polynomial's preferred source.
pub fn local_inner(p: &HyperbolicPolynomial, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let bp = BarrierPoint::evaluate(p, p, x, DerivativeMode::Analytic)?;
    Ok(bp.local_inner(&DVector::from_column_slice(u), &DVector::from_column_slice(v)))
}

pub fn local_norm(p: &HyperbolicPolynomial, x: &[f64], u: &[f64]) -> Result<f64> {
    Ok(local_inner(p, x, u, u)?.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CountingOracle;
    use crate::poly::{pack_symmetric_weighted, PolynomialSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn grad_dot_examples() {
        let p = HyperbolicPolynomial::product(2);
        assert!(close(grad_dot(&p, &[1.0, 2.0], &[1.0, 1.0]).unwrap(), -1.5, 1e-13));
        assert_eq!(grad_dot(&p, &[1.0, 2.0], &[0.0, 0.0]).unwrap(), 0.0);
        for q in
            [HyperbolicPolynomial::product(5), HyperbolicPolynomial::determinant(3), HyperbolicPolynomial::lorentz(4)]
        {
            let x: Vec<f64> = q.direction().iter().enumerate().map(|(i, v)| 2.0 * v + 0.01 * i as f64).collect();
            let d = q.degree() as f64;
            assert!(close(grad_dot(&q, &x, &x).unwrap(), -d, 1e-11), "{}", q.kind());
        }
    }

    #[test]
    fn grad_dot_call_count() {
        let p = CountingOracle::new(HyperbolicPolynomial::product(4));
        grad_dot(&p, &[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.calls(), 5);
    }

    #[test]
    fn degree_one_gradient_is_not_aliased() {
        let p = HyperbolicPolynomial::product(1);
        assert!(close(grad_dot(&p, &[2.0], &[1.0]).unwrap(), -0.5, 1e-14));
        assert!(close(hess_vec(&p, &[2.0], &[1.0]).unwrap()[0], 0.25, 1e-14));
    }

    #[test]
    fn hess_vec_examples() {
        let p = HyperbolicPolynomial::product(2);
        let h = hess_vec(&p, &[1.0, 2.0], &[1.0, 1.0]).unwrap();
        assert!(close(h[0], 1.0, 1e-12) && close(h[1], 0.25, 1e-12));

        let x = [0.7, 1.3];
        let hx = hess_vec(&p, &x, &x).unwrap();
        let g = full_gradient(&p, &x).unwrap();
        assert!(close(hx[0], -g[0], 1e-11) && close(hx[1], -g[1], 1e-11));

        let d = HyperbolicPolynomial::determinant(2);
        let w = [0.4, -1.1, 0.25];
        let hw = hess_vec(&d, &[1.0, 0.0, 1.0], &w).unwrap();
        let expected = pack_symmetric_weighted(&crate::poly::unpack_symmetric(&w, 2));
        for (a, b) in hw.iter().zip(&expected) {
            assert!(close(*a, *b, 1e-11), "{hw:?} vs {expected:?}");
        }
    }

    #[test]
    fn full_gradient_examples() {
        let p = HyperbolicPolynomial::product(3);
        let g = full_gradient(&p, &[1.0, 2.0, 4.0]).unwrap();
        for (a, b) in g.iter().zip([-1.0, -0.5, -0.25]) {
            assert!(close(*a, b, 1e-13));
        }
        let l = HyperbolicPolynomial::lorentz(3);
        let g = full_gradient(&l, &[0.0, 0.0, 1.0]).unwrap();
        for (a, b) in g.iter().zip([0.0, 0.0, -2.0]) {
            assert!(close(*a, b, 1e-13));
        }
        // Pencil at its normalizing direction: g_i = -tr(A_i).
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let a3 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let pencil = PolynomialSpec::pencil(vec![a1, a2, a3], vec![1.0, 1.0, 0.0]).build().unwrap();
        let g = full_gradient(&pencil, &[1.0, 1.0, 0.0]).unwrap();
        for (a, b) in g.iter().zip([-1.0, -1.0, 0.0]) {
            assert!(close(*a, b, 1e-13), "{g:?}");
        }
    }

    #[test]
    fn full_hessian_examples_and_budget() {
        let p = CountingOracle::new(HyperbolicPolynomial::product(2));
        let h = full_hessian(&p, &[1.0, 2.0]).unwrap();
        assert!(close(h[(0, 0)], 1.0, 1e-12) && close(h[(1, 1)], 0.25, 1e-12));
        assert!(h[(0, 1)].abs() < 1e-12);
        let (n, d) = (2u64, 2u64);
        assert_eq!(p.calls(), 1 + n * d + n * n * d * (d + 1));

        let det = HyperbolicPolynomial::determinant(2);
        let h = full_hessian(&det, &[1.0, 0.0, 1.0]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0]));
        assert!((h - expected).amax() < 1e-11);
    }

    #[test]
    fn full_hessian_flags_exterior_point() {
        let p = HyperbolicPolynomial::lorentz(3);
        // p(x) < 0 here, so the barrier Hessian is indefinite.
        let r = full_hessian(&p, &[2.0, 0.0, 1.0]);
        assert!(matches!(r, Err(Error::Indefinite(_))), "{r:?}");
    }

    #[test]
    fn local_products() {
        for p in
            [HyperbolicPolynomial::product(3), HyperbolicPolynomial::determinant(2), HyperbolicPolynomial::lorentz(4)]
        {
            let e = p.direction().to_vec();
            let norm = local_norm(&p, &e, &e).unwrap();
            assert!(close(norm, (p.degree() as f64).sqrt(), 1e-12));
        }
        let p = HyperbolicPolynomial::product(2);
        assert_eq!(local_inner(&p, &[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let u = [0.3, 0.9];
        let v = [-1.0, 0.4];
        let x = [0.6, 1.7];
        assert!(close(local_inner(&p, &x, &u, &v).unwrap(), local_inner(&p, &x, &v, &u).unwrap(), 1e-15));
    }

    #[test]
    fn underflowing_product_is_rescaled() {
        let p = HyperbolicPolynomial::product(48);
        let x: Vec<f64> = (0..48).map(|i| if i % 2 == 0 { 1e-15 } else { 0.5 }).collect();
        assert_eq!(p.eval_real(&x), 0.0);
        let g = full_gradient(&p, &x).unwrap();
        for (gi, xi) in g.iter().zip(&x) {
            assert!(close(*gi, -1.0 / xi, 1e-9));
        }
        let w: Vec<f64> = (0..48).map(|i| (i as f64).sin()).collect();
        let hw = DVector::from_vec(hess_vec(&p, &x, &w).unwrap());
        let exact = DVector::from_fn(48, |i, _| w[i] / (x[i] * x[i]));
        assert!((&hw - &exact).norm() <= 1e-8 * exact.norm());
        let bp = BarrierPoint::evaluate(&p, &p, &x, DerivativeMode::Analytic).unwrap();
        assert!((bp.log_p - (24.0 * 1e-15f64.ln() + 24.0 * 0.5f64.ln())).abs() < 1e-9);
    }
}
