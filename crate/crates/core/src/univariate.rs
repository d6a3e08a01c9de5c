//! Univariate restrictions `t -> p(x + t e)` recovered by interpolation at
//! the roots of unity, and the hyperbolic eigenvalues derived from them.
//!
//! With `w = exp(2 pi i / d)` and samples `P_k = p(x + r w^k e)` for
//! `k = 1..d`, the scaled coefficients `b_j = a_j r^j` satisfy
//!
//! ```text
//! b_j = (1/d) sum_k w^{-jk} (P_k - p(x)),   j = 1..d
//! ```
//!
//! Subtracting `p(x)` removes the aliasing between `b_0` and `b_d`.
//! [`restrict`] uses `r = 1`; the moment and eigenvalue routines pick `r`
//! adaptively so that the samples stay within a small factor of
//! `|a_d| r^d`, which keeps the leading coefficients accurate for large `d`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{complexify, homogeneous_scale, unit_root, well_scaled, Oracle};

/// Default relative tolerance on the imaginary part of a root.
pub const DEFAULT_IMAG_TOL: f64 = 1e-7;

/// Coefficients `a_0..a_d` of `t -> p(x + t e) = sum a_i t^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateRestriction {
    pub coeffs: Vec<f64>,
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

impl UnivariateRestriction {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }
}

/// Power sums `sum_j lambda_j^k`, `k = 1..4`, of the hyperbolic eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMoments {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

impl EigenMoments {
    /// Direct power sums of a list of eigenvalues.
    pub fn from_eigenvalues(vals: &[f64]) -> Self {
        let mut m = EigenMoments { s1: 0.0, s2: 0.0, s3: 0.0, s4: 0.0 };
        for &v in vals {
            let v2 = v * v;
            m.s1 += v;
            m.s2 += v2;
            m.s3 += v2 * v;
            m.s4 += v2 * v2;
        }
        m
    }

    /// Power sums from the elementary symmetric polynomials `e_1..e_4` of
    /// the eigenvalues (Newton's identities).
    pub fn from_elementary(e1: f64, e2: f64, e3: f64, e4: f64) -> Self {
        let s1 = e1;
        let s2 = e1 * s1 - 2.0 * e2;
        let s3 = e1 * s2 - e2 * s1 + 3.0 * e3;
        let s4 = e1 * s3 - e2 * s2 + e3 * s1 - 4.0 * e4;
        EigenMoments { s1, s2, s3, s4 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s1, self.s2, self.s3, self.s4]
    }
}

/// Scaled interpolation result: `scaled[j] = a_j r^j`.
#[derive(Debug, Clone)]
struct Interpolation {
    scaled: Vec<f64>,
    radius: f64,
    max_sample: f64,
    /// Point and direction actually sampled (a common rescaling of the
    /// inputs).
    base: Vec<f64>,
    dir: Vec<f64>,
}

impl Interpolation {
    fn leading(&self) -> f64 {
        *self.scaled.last().expect("degree >= 1")
    }

    /// `ln(max_k |P_k| / |a_d r^d|)`, the error amplification of this radius.
    fn log_growth(&self) -> f64 {
        (self.max_sample / self.leading().abs()).ln()
    }

    fn coeffs(&self) -> Vec<f64> {
        self.scaled.iter().enumerate().map(|(j, b)| b / self.radius.powi(j as i32)).collect()
    }

    /// `a_{d-k} / a_d` for `k = 0..=4`, zero past the degree.
    fn normalized_top(&self, k: usize) -> f64 {
        let d = self.scaled.len() - 1;
        if k > d {
            return 0.0;
        }
        self.scaled[d - k] / self.leading() * self.radius.powi(k as i32)
    }
}

fn check_inputs<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64]) -> Result<()> {
    let n = p.dimension();
    if x.len() != n || e.len() != n {
        return Err(Error::Input(format!(
            "point/direction lengths ({}, {}) do not match {n} variables",
            x.len(),
            e.len()
        )));
    }
    if p.degree() == 0 {
        return Err(Error::Input("polynomial degree must be positive".into()));
    }
    Ok(())
}

/// Exactly `d + 1` oracle calls.
fn interpolate<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64], radius: f64) -> Result<Interpolation> {
    let d = p.degree();
    let xc = complexify(x);
    let p0 = p.eval(&xc);
    let mut samples = Vec::with_capacity(d);
    let mut point = xc.clone();
    for k in 1..=d {
        let shift = unit_root(d, k as i64) * radius;
        for ((pt, xi), ei) in point.iter_mut().zip(&xc).zip(e) {
            *pt = xi + shift * ei;
        }
        samples.push(p.eval(&point));
    }
    let max_sample = samples.iter().map(|s| s.norm()).fold(p0.norm(), f64::max);
    let mut scaled = Vec::with_capacity(d + 1);
    scaled.push(p0.re);
    let inv_d = 1.0 / d as f64;
    for j in 1..=d {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, s) in samples.iter().enumerate() {
            let k = (k + 1) as i64;
            acc += unit_root(d, -(j as i64) * k) * (s - p0);
        }
        scaled.push(acc.re * inv_d);
    }
    Ok(Interpolation { scaled, radius, max_sample, base: x.to_vec(), dir: e.to_vec() })
}

fn check_leading(it: Interpolation) -> Result<Interpolation> {
    let lead = it.leading();
    if !lead.is_finite() || lead == 0.0 || lead.abs() <= 1e-14 * it.max_sample {
        return Err(Error::DegenerateDirection(format!(
            "leading coefficient p(e) = {lead:e} is negligible against samples of size {:e}",
            it.max_sample
        )));
    }
    Ok(it)
}

const ADAPT_ROUNDS: usize = 12;

/// Chooses the interpolation radius so that the samples are within a small
/// factor of `|a_d| r^d`, i.e. `r` is comparable to `sum |lambda_j|`.
fn adaptive_interpolate<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64]) -> Result<Interpolation> {
    let mut current = interpolate(p, x, e, 1.0)?;
    let lead = Complex64::new(current.leading(), 0.0);
    let (mut xs, mut es) = (x.to_vec(), e.to_vec());
    if !well_scaled(lead) || !current.max_sample.is_finite() {
        // Eigenvalues are invariant under scaling x and e together.
        let (s, _) = homogeneous_scale(p, e, lead);
        if s != 1.0 {
            xs.iter_mut().chain(es.iter_mut()).for_each(|v| *v *= s);
            current = interpolate(p, &xs, &es, 1.0)?;
        }
    }
    let mut radius = 1.0_f64;
    for _ in 0..ADAPT_ROUNDS {
        let growth = current.log_growth();
        if growth.is_nan() || growth < 1e-12 || (0.25..=2.5).contains(&growth) {
            break;
        }
        // An unresolved leading coefficient reads as huge growth.
        let growth = if growth.is_finite() { growth } else { 64.0 };
        radius *= growth.clamp(1.0 / 64.0, 64.0);
        current = interpolate(p, &xs, &es, radius)?;
    }
    check_leading(current)
}

/// Recovers the restriction `t -> p(x + t e)` with `d + 1` oracle calls.
pub fn restrict<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64]) -> Result<UnivariateRestriction> {
    check_inputs(p, x, e)?;
    let it = check_leading(interpolate(p, x, e, 1.0)?)?;
    Ok(UnivariateRestriction { coeffs: it.coeffs(), base: x.to_vec(), direction: e.to_vec() })
}

/// First four power sums of the eigenvalues of `x` in direction `e`.
///
/// Since `p(x + t e) = a_d prod_j (t + lambda_j)`, the ratios
/// `a_{d-k} / a_d` are the elementary symmetric polynomials of the
/// eigenvalues themselves (no sign alternation), and Newton's identities give
/// the power sums.
pub fn moments<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64]) -> Result<EigenMoments> {
    check_inputs(p, x, e)?;
    let it = adaptive_interpolate(p, x, e)?;
    Ok(EigenMoments::from_elementary(
        it.normalized_top(1),
        it.normalized_top(2),
        it.normalized_top(3),
        it.normalized_top(4),
    ))
}

/// Moments computed from coefficients already at hand.
pub fn moments_from_restriction(r: &UnivariateRestriction) -> Result<EigenMoments> {
    let d = r.degree();
    let lead = r.coeffs[d];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::DegenerateDirection("leading coefficient vanishes".into()));
    }
    let top = |k: usize| if k > d { 0.0 } else { r.coeffs[d - k] / lead };
    Ok(EigenMoments::from_elementary(top(1), top(2), top(3), top(4)))
}

/// Complex roots of `t -> sum a_i t^i` from the balanced companion matrix.
pub fn restriction_roots(r: &UnivariateRestriction) -> Result<Vec<Complex64>> {
    polynomial_roots(&r.coeffs)
}

fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::DegenerateDirection("leading coefficient vanishes".into()));
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        comp[(0, j)] = -coeffs[d - 1 - j] / lead;
    }
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    balance(&mut comp);
    Ok(comp.complex_eigenvalues().iter().copied().collect())
}

/// Parlett-Reinsch diagonal balancing with powers of two.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / radix;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= g;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of the restriction that are treated as one (possibly multiple) root.
#[derive(Debug, Clone, Copy)]
struct RootGroup {
    center: Complex64,
    mult: usize,
    /// Largest distance of a merged member from `center`.
    spread: f64,
}

/// Groups roots that sit within rounding distance of a common multiple root.
///
/// An `m`-fold root is split by roughly `eps^(1/m)` relative to the sampling
/// radius; the cluster mean is well conditioned, so such groups are replaced
/// by their mean repeated `m` times. Genuine complex pairs and distinct real
/// roots further apart are left alone.
fn merge_multiple_roots(mut roots: Vec<Complex64>, scale: f64) -> Vec<RootGroup> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut out: Vec<RootGroup> = Vec::with_capacity(roots.len());
    let mut i = 0;
    while i < roots.len() {
        let mut best = RootGroup { center: roots[i], mult: 1, spread: 0.0 };
        // Try the largest admissible cluster starting at i.
        for j in (i + 1..roots.len()).rev() {
            let group = &roots[i..=j];
            let m = group.len();
            let mean = group.iter().sum::<Complex64>() / m as f64;
            let spread = group.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
            let allowed = 10.0 * f64::EPSILON.powf(1.0 / m as f64) * (scale + mean.norm());
            if spread <= allowed {
                best = RootGroup { center: mean, mult: m, spread };
                break;
            }
        }
        out.push(best);
        i += best.mult;
    }
    out
}

fn total(groups: &[RootGroup]) -> usize {
    groups.iter().map(|g| g.mult).sum()
}

/// Hyperbolic eigenvalues of `x` in direction `e`, descending, with the
/// default imaginary-residue tolerance.
pub fn eigenvalues<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    eigenvalues_with_tol(p, x, e, DEFAULT_IMAG_TOL)
}

/// As [`eigenvalues`]; roots with `|Im| > imag_tol (1 + |root|)` raise
/// [`Error::NotHyperbolic`].
pub fn eigenvalues_with_tol<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64], imag_tol: f64) -> Result<Vec<f64>> {
    check_inputs(p, x, e)?;
    let it = adaptive_interpolate(p, x, e)?;
    let nonreal = |c: &Complex64| c.im.abs() > imag_tol * (1.0 + c.norm());
    let mut groups = root_groups(&it.scaled, it.radius);
    if total(&groups) != p.degree() {
        return Err(Error::NumericalFailure("root finding on the restriction failed".into()));
    }
    let mut radius = it.radius;
    // Eigenvalues far inside the circle are poorly resolved by its samples;
    // re-sample on a circle matched to them and keep the result when it
    // accounts for the same number of roots.
    for _ in 0..REFINE_ROUNDS {
        let small = |c: &Complex64| c.norm() < REFINE_RATIO * radius;
        let reach = groups.iter().filter(|g| small(&g.center)).map(|g| g.center.norm()).fold(-1.0, f64::max);
        if reach < 0.0 {
            break;
        }
        let rho = if reach > 0.0 { 4.0 * reach } else { REFINE_RATIO * radius };
        if !resample(p, &it, &mut groups, 0.0, rho)? {
            break;
        }
        radius = rho;
    }
    // Close eigenvalues come out as complex pairs, or get merged into one
    // multiple root, when rounding dominates their separation; a circle
    // around the cluster resolves them.
    // A group counts as settled once re-sampling no longer halves its spread.
    let mut settled: Vec<RootGroup> = Vec::new();
    for _ in 0..p.degree() {
        let resolvable = |g: &RootGroup| g.mult > 1 && g.spread > 8.0 * f64::EPSILON * (1.0 + g.center.norm());
        let seen = |g: &RootGroup| {
            settled.iter().any(|s| {
                (g.center - s.center).norm() <= s.spread.max(f64::EPSILON * (1.0 + s.center.norm()))
                    && g.spread >= 0.5 * s.spread
            })
        };
        let Some(target) = groups.iter().find(|g| (nonreal(&g.center) || resolvable(g)) && !seen(g)).copied() else {
            break;
        };
        settled.push(target);
        let width = target.center.im.abs().max(target.spread);
        for widen in [4.0, 16.0] {
            if resample(p, &it, &mut groups, target.center.re, widen * width)? {
                break;
            }
        }
    }
    if let Some(g) = groups.iter().find(|g| nonreal(&g.center)) {
        return Err(Error::NotHyperbolic { re: -g.center.re, im: -g.center.im });
    }
    let centers: Vec<f64> = groups.iter().map(|g| -g.center.re).collect();
    let mut vals = Vec::with_capacity(p.degree());
    for (i, (lam, g)) in centers.iter().zip(&groups).enumerate() {
        let lam = if g.mult == 1 {
            let spacing = centers
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| (c - lam).abs())
                .fold(f64::INFINITY, f64::min);
            let spacing = if spacing.is_finite() { spacing } else { 1.0 + lam.abs() };
            polish_root(p, &it.base, &it.dir, *lam, spacing)
        } else {
            *lam
        };
        vals.extend(std::iter::repeat_n(lam, g.mult));
    }
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Re-interpolates on the circle of radius `rho` about the real shift
/// `center` (in the variable `t` of `p(x + t e)`) and swaps in the roots
/// found within half that radius when their number matches the current
/// estimates there. `d + 1` oracle calls.
fn resample<O: Oracle + ?Sized>(
    p: &O,
    it: &Interpolation,
    groups: &mut Vec<RootGroup>,
    center: f64,
    rho: f64,
) -> Result<bool> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Ok(false);
    }
    let near = |c: &Complex64| (c - center).norm() < 0.5 * rho;
    let count: usize = groups.iter().filter(|g| near(&g.center)).map(|g| g.mult).sum();
    let base: Vec<f64> = it.base.iter().zip(&it.dir).map(|(x, e)| x + center * e).collect();
    let local = interpolate(p, &base, &it.dir, rho)?;
    let inside: Vec<RootGroup> = root_groups(&local.scaled, rho)
        .into_iter()
        .filter(|g| g.center.norm() < 0.5 * rho)
        .map(|g| RootGroup { center: g.center + center, ..g })
        .collect();
    if total(&inside) != count {
        return Ok(false);
    }
    groups.retain(|g| !near(&g.center));
    groups.extend(inside);
    Ok(true)
}

const REFINE_ROUNDS: usize = 3;
const REFINE_RATIO: f64 = 1e-2;

/// Roots of `t -> p(x + t e)` (the negated eigenvalues) from scaled
/// coefficients, grouped by multiplicity. Unresolvable coefficient sets give
/// no roots.
fn root_groups(scaled: &[f64], radius: f64) -> Vec<RootGroup> {
    match polynomial_roots(scaled) {
        Ok(roots) => merge_multiple_roots(roots.into_iter().map(|u| u * radius).collect(), radius),
        Err(_) => Vec::new(),
    }
}

const POLISH_STEPS: usize = 4;

/// Newton refinement of a simple eigenvalue on `mu -> p(x - mu e)` evaluated
/// by the oracle itself. The derivative comes from a complex step, so each
/// step is one call. Steps that would move more than a quarter of the way
/// to the nearest other eigenvalue are rejected.
fn polish_root<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64], lam: f64, spacing: f64) -> f64 {
    let mut mu = lam;
    for _ in 0..POLISH_STEPS {
        let h = 1e-30 * (1.0 + mu.abs());
        let z: Vec<Complex64> = x.iter().zip(e).map(|(xi, ei)| Complex64::new(xi - mu * ei, -h * ei)).collect();
        let v = p.eval(&z);
        let slope = v.im / h;
        if !v.re.is_finite() || !slope.is_finite() || slope == 0.0 {
            break;
        }
        let step = v.re / slope;
        let next = mu - step;
        if (next - lam).abs() > 0.25 * spacing {
            return lam;
        }
        mu = next;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + mu.abs()) {
            break;
        }
    }
    mu
}

/// Smallest hyperbolic eigenvalue; `x` is interior iff it is positive.
pub fn min_eigenvalue<O: Oracle + ?Sized>(p: &O, x: &[f64], e: &[f64]) -> Result<f64> {
    Ok(*eigenvalues(p, x, e)?.last().expect("degree >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CountingOracle;
    use crate::poly::HyperbolicPolynomial;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn restrict_product_fixture() {
        let p = HyperbolicPolynomial::product(3);
        let r = restrict(&p, &[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap();
        for (a, b) in r.coeffs.iter().zip([6.0, 11.0, 6.0, 1.0]) {
            assert!(close(*a, b, 1e-13), "{:?}", r.coeffs);
        }
    }

    #[test]
    fn restrict_lorentz_fixture() {
        let p = HyperbolicPolynomial::lorentz(3);
        let r = restrict(&p, &[3.0, 4.0, 10.0], &[0.0, 0.0, 1.0]).unwrap();
        for (a, b) in r.coeffs.iter().zip([75.0, 20.0, 1.0]) {
            assert!(close(*a, b, 1e-13), "{:?}", r.coeffs);
        }
    }

    #[test]
    fn restrict_at_origin_is_monomial() {
        let p = HyperbolicPolynomial::determinant(3);
        let e = p.direction().to_vec();
        let r = restrict(&p, &[0.0; 6], &e).unwrap();
        for a in &r.coeffs[..3] {
            assert!(a.abs() < 1e-14);
        }
        assert!(close(r.coeffs[3], 1.0, 1e-14));
    }

    #[test]
    fn restrict_uses_d_plus_one_calls() {
        let p = CountingOracle::new(HyperbolicPolynomial::product(5));
        restrict(&p, &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0; 5]).unwrap();
        assert_eq!(p.calls(), 6);
    }

    #[test]
    fn moment_fixtures() {
        let p = HyperbolicPolynomial::product(3);
        let m = moments(&p, &[1.0, 2.0, 3.0], &[1.0; 3]).unwrap();
        for (a, b) in m.as_array().iter().zip([6.0, 14.0, 36.0, 98.0]) {
            assert!(close(*a, b, 1e-10), "{m:?}");
        }
        let l = HyperbolicPolynomial::lorentz(3);
        let m = moments(&l, &[3.0, 4.0, 10.0], &[0.0, 0.0, 1.0]).unwrap();
        for (a, b) in m.as_array().iter().zip([20.0, 250.0, 3500.0, 51250.0]) {
            assert!(close(*a, b, 1e-10), "{m:?}");
        }
    }

    #[test]
    fn moments_at_direction_are_degree() {
        for p in
            [HyperbolicPolynomial::product(4), HyperbolicPolynomial::determinant(3), HyperbolicPolynomial::lorentz(5)]
        {
            let e = p.direction().to_vec();
            let d = p.degree() as f64;
            let m = moments(&p, &e, &e).unwrap();
            for v in m.as_array() {
                assert!(close(v, d, 1e-10), "{} {m:?}", p.kind());
            }
        }
    }

    #[test]
    fn eigenvalue_fixtures() {
        let p = HyperbolicPolynomial::product(3);
        let v = eigenvalues(&p, &[1.0, 2.0, 3.0], &[1.0; 3]).unwrap();
        for (a, b) in v.iter().zip([3.0, 2.0, 1.0]) {
            assert!(close(*a, b, 1e-10));
        }
        let l = HyperbolicPolynomial::lorentz(3);
        let v = eigenvalues(&l, &[3.0, 4.0, 10.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!(close(v[0], 15.0, 1e-10) && close(v[1], 5.0, 1e-10));

        let v = eigenvalues(&p, &[-1.0, -1.0, -1.0], &[1.0; 3]).unwrap();
        for a in v {
            assert!(close(a, -1.0, 1e-7));
        }
    }

    #[test]
    fn min_eigenvalue_fixtures() {
        let p = HyperbolicPolynomial::product(3);
        assert!(close(min_eigenvalue(&p, &[1.0, 2.0, 3.0], &[1.0; 3]).unwrap(), 1.0, 1e-10));
        assert!(close(min_eigenvalue(&p, &[1.0, -2.0, 3.0], &[1.0; 3]).unwrap(), -2.0, 1e-10));
        let l = HyperbolicPolynomial::lorentz(3);
        assert!(min_eigenvalue(&l, &[3.0, 4.0, 5.0], &[0.0, 0.0, 1.0]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn complex_roots_rejected() {
        use crate::poly::{MonomialTerm, PolynomialSpec};
        let p = PolynomialSpec::sparse_monomial(
            vec![
                MonomialTerm { coeff: 1.0, exponents: vec![2, 0] },
                MonomialTerm { coeff: 1.0, exponents: vec![0, 2] },
            ],
            vec![1.0, 0.0],
        )
        .build()
        .unwrap();
        assert!(matches!(eigenvalues(&p, &[0.0, 1.0], &[1.0, 0.0]), Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn degenerate_direction() {
        let p = HyperbolicPolynomial::product(2);
        assert!(matches!(restrict(&p, &[1.0, 1.0], &[1.0, 0.0]), Err(Error::DegenerateDirection(_))));
    }

    #[test]
    fn large_degree_moments_stay_accurate() {
        let d = 64;
        let p = HyperbolicPolynomial::product(d);
        let x: Vec<f64> = (0..d).map(|i| 0.5 + (i as f64) / d as f64).collect();
        let m = moments(&p, &x, &vec![1.0; d]).unwrap();
        let exact = EigenMoments::from_eigenvalues(&x);
        for (a, b) in m.as_array().iter().zip(exact.as_array()) {
            assert!(close(*a, b, 1e-9), "{m:?} vs {exact:?}");
        }
    }

    #[test]
    fn moments_survive_underflow() {
        let p = HyperbolicPolynomial::product(64);
        let x: Vec<f64> = (0..64).map(|i| 1e-6 * (1.0 + i as f64)).collect();
        let e: Vec<f64> = vec![1e-6; 64];
        let m = moments(&p, &x, &e).unwrap();
        let exact = EigenMoments::from_eigenvalues(&(1..=64).map(|i| i as f64).collect::<Vec<_>>());
        for (a, b) in m.as_array().iter().zip(exact.as_array()) {
            assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
        }
    }
}
