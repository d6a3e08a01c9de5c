//! Derivative and moment validation for the `check` subcommand.

use hypersolve::calculus;
use hypersolve::poly::{hyperbolicity_probe, HyperbolicPolynomial, ProbeReport};
use hypersolve::problems::generators::random_interior_point;
use hypersolve::univariate::{self, EigenMoments, DEFAULT_IMAG_TOL};
use hypersolve::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const PROBE_TRIALS: usize = 64;
const GRAD_TOL: f64 = 1e-8;
const HESS_TOL: f64 = 1e-6;
const FD_GRAD_STEP: f64 = 1e-6;
const FD_GRAD_TOL: f64 = 1e-5;
const FD_HESS_STEP: f64 = 1e-5;
const FD_HESS_TOL: f64 = 1e-4;
const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    /// Largest relative error over all checked points.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First evaluation error, if any point could not be checked.
    pub error: Option<String>,
}

impl Metric {
    fn new(name: &str, tolerance: f64) -> Self {
        Self { name: name.into(), max_error: 0.0, tolerance, passed: true, error: None }
    }

    fn record(&mut self, value: Result<f64>) {
        match value {
            Ok(v) if v.is_finite() => self.max_error = self.max_error.max(v),
            Ok(v) => self.fail(format!("non-finite error {v}")),
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn fail(&mut self, msg: String) {
        self.max_error = f64::INFINITY;
        self.error.get_or_insert(msg);
    }

    fn finish(&mut self) {
        self.passed = self.max_error <= self.tolerance;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub kind: String,
    pub degree: usize,
    pub dimension: usize,
    pub points: usize,
    pub probe: ProbeReport,
    pub metrics: Vec<Metric>,
    pub passed: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(f64::MIN_POSITIVE)
}

fn moment_error(p: &HyperbolicPolynomial, x: &[f64]) -> Result<f64> {
    let dir = p.direction();
    let m = univariate::moments(p, x, dir)?;
    let eig = p.analytic_eigenvalues(x, dir).or_else(|_| univariate::eigenvalues(p, x, dir))?;
    let direct = EigenMoments::from_eigenvalues(&eig);
    let mut worst = 0.0f64;
    for (k, (a, b)) in m.as_array().iter().zip(direct.as_array()).enumerate() {
        let scale: f64 = eig.iter().map(|l| l.abs().powi(k as i32 + 1)).sum();
        worst = worst.max((a - b).abs() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Probes hyperbolicity, then compares oracle derivatives with analytic
/// formulas (when the family has them) and with finite differences at `e0`
/// and `points` random interior points.
pub fn run(p: &HyperbolicPolynomial, e0: &[f64], points: usize, seed: u64) -> CheckReport {
    let probe = hyperbolicity_probe(p, p.direction(), PROBE_TRIALS, seed, DEFAULT_IMAG_TOL);
    let mut report = CheckReport {
        kind: p.kind().into(),
        degree: p.degree(),
        dimension: p.dimension(),
        points: 0,
        probe,
        metrics: Vec::new(),
        passed: false,
    };
    if report.probe.flagged {
        return report;
    }

    let analytic = p.has_analytic();
    let mut grad = Metric::new("gradient: oracle vs analytic", GRAD_TOL);
    let mut hess = Metric::new("hessian-vector: oracle vs analytic", HESS_TOL);
    let mut fd_grad = Metric::new("gradient: finite differences", FD_GRAD_TOL);
    let mut fd_hess = Metric::new("hessian-vector: finite differences", FD_HESS_TOL);
    let mut moments = Metric::new("moments vs eigenvalue power sums", MOMENT_TOL);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(points + 1);
    if e0.len() == p.dimension() {
        xs.push(e0.to_vec());
    }
    for _ in 0..points {
        match random_interior_point(p, &mut rng) {
            Ok(x) => xs.push(x),
            Err(e) => {
                moments.fail(format!("sampling interior points: {e}"));
                break;
            }
        }
    }

    for x in &xs {
        let w: Vec<f64> = (0..x.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gradient = |z: &[f64]| {
            if analytic {
                p.analytic_gradient(z)
            } else {
                calculus::full_gradient(p, z)
            }
        };
        let reference = gradient(x)
            .and_then(|g| Ok((g, if analytic { p.analytic_hess_vec(x, &w)? } else { calculus::hess_vec(p, x, &w)? })));
        let (g_ref, hw_ref) = match reference {
            Ok(r) => r,
            Err(e) => {
                grad.fail(e.to_string());
                continue;
            }
        };
        if analytic {
            grad.record(calculus::full_gradient(p, x).map(|g| rel_diff(&g, &g_ref)));
            hess.record(calculus::hess_vec(p, x, &w).map(|h| rel_diff(&h, &hw_ref)));
        }
        fd_grad.record(calculus::fd_gradient(p, x, FD_GRAD_STEP).map(|g| rel_diff(&g, &g_ref)));
        fd_hess.record(calculus::fd_hess_vec(gradient, x, &w, FD_HESS_STEP).map(|h| rel_diff(&h, &hw_ref)));
        moments.record(moment_error(p, x));
    }

    report.points = xs.len();
    let mut metrics = Vec::new();
    if analytic {
        metrics.extend([grad, hess]);
    } else if grad.error.is_some() {
        metrics.push(grad);
    }
    metrics.extend([fd_grad, fd_hess, moments]);
    for m in &mut metrics {
        m.finish();
    }
    report.passed = metrics.iter().all(|m| m.passed);
    report.metrics = metrics;
    report
}
