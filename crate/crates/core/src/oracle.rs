//! Evaluation-oracle abstraction.
//!
//! Every routine that only needs point evaluations of a polynomial is written
//! against [`Oracle`]. Oracles must be complex-analytic: the interpolation
//! routines evaluate at complex-shifted points such as `x + w^k e` with `w` a
//! root of unity.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

pub trait Oracle: Sync {
    /// Homogeneity degree `d`.
    fn degree(&self) -> usize;

    /// Number of variables `n`.
    fn dimension(&self) -> usize;

    /// Evaluates the polynomial at a complex point of length `dimension()`.
    ///
    /// Callers guarantee the length; implementations may panic otherwise.
    fn eval(&self, x: &[Complex64]) -> Complex64;

    /// Convenience wrapper for real points.
    fn eval_real(&self, x: &[f64]) -> f64 {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&z).re
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn eval(&self, x: &[Complex64]) -> Complex64 {
        (**self).eval(x)
    }
}

/// Wraps an oracle and counts evaluations.
///
/// The counter is atomic so the wrapper can be shared with the parallel
/// assembly routines.
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicU64,
}

impl<O: Oracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) -> u64 {
        self.calls.swap(0, Ordering::Relaxed)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Oracle> Oracle for CountingOracle<O> {
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x)
    }
}

/// Closure-backed oracle, mostly for tests and user-defined polynomials.
pub struct FnOracle<F> {
    degree: usize,
    dimension: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    pub fn new(degree: usize, dimension: usize, f: F) -> Self {
        Self { degree, dimension, f }
    }
}

impl<F> Oracle for FnOracle<F>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    fn degree(&self) -> usize {
        self.degree
    }
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn eval(&self, x: &[Complex64]) -> Complex64 {
        (self.f)(x)
    }
}

/// Lifts a real vector to complex.
pub(crate) fn complexify(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `k`-th power of the primitive `d`-th root of unity, computed from the
/// reduced angle so that `unit_root(d, d) == 1` exactly.
pub(crate) fn unit_root(d: usize, k: i64) -> Complex64 {
    let d_i = d as i64;
    let r = k.rem_euclid(d_i);
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * r == d_i {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == d_i {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * r == 3 * d_i {
        return Complex64::new(0.0, -1.0);
    }
    let theta = 2.0 * std::f64::consts::PI * (r as f64) / (d as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// `|p|` values outside `[2^-500, 2^500]` are rescaled before use.
const SCALE_LO: f64 = 3.054936363499605e-151;
const SCALE_HI: f64 = 3.273390607896142e150;

pub(crate) fn well_scaled(v: Complex64) -> bool {
    let a = v.norm();
    a.is_finite() && (SCALE_LO..=SCALE_HI).contains(&a)
}

/// Power of two `s` with `|p(s x)|` in the normal range, together with
/// `p(s x)`. Homogeneity `p(s x) = s^d p(x)` lets callers undo the scaling;
/// powers of two keep `s x` exact. Gives up after a few rounds (for instance
/// when `x` is a genuine root), returning the last attempt.
pub(crate) fn homogeneous_scale<O: Oracle + ?Sized>(p: &O, x: &[f64], first: Complex64) -> (f64, Complex64) {
    let d = p.degree().max(1) as f64;
    let mut log2_s = 0i32;
    let mut v = first;
    for _ in 0..8 {
        if well_scaled(v) {
            break;
        }
        let a = v.norm();
        let step = if a == 0.0 {
            (1100.0 / d).ceil()
        } else if !a.is_finite() {
            -(1100.0 / d).ceil()
        } else {
            (-a.log2() / d).round()
        };
        if step == 0.0 {
            break;
        }
        log2_s += step as i32;
        let s = 2f64.powi(log2_s);
        let xs: Vec<Complex64> = x.iter().map(|&xi| Complex64::new(xi * s, 0.0)).collect();
        v = p.eval(&xs);
    }
    (2f64.powi(log2_s), v)
}
