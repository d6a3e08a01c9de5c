//! Swath-following affine scaling.
//!
//! Each iteration solves the relaxation `QP_e(alpha)` at the current center
//! `e`, computes the first four eigenvalue power sums of its optimizer `x_e`
//! in direction `e`, minimizes the step quadratic `a t^2 + b t + c` and moves
//! to `e' = (e + t x_e) / (1 + t)`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::{BarrierPoint, DerivativeMode};
use crate::error::{Error, Result};
use crate::oracle::{CountingOracle, Oracle};
use crate::poly::HyperbolicPolynomial;
use crate::problems::HyperbolicProgram;
use crate::qp::{solve_qp_with, QpProblem, QpSolution, QpTolerances};
use crate::univariate::{self, EigenMoments};

/// Trace output requested by front ends. The solver records the trace
/// regardless; this only selects how it is streamed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFormat {
    #[default]
    None,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub alpha: f64,
    pub delta: f64,
    /// `None` selects twice the theoretical iteration bound.
    pub max_iters: Option<usize>,
    pub derivatives: DerivativeMode,
    /// Relative residual allowed in `A e = b`.
    pub feasibility_tol: f64,
    /// `e'` is accepted when its smallest eigenvalue exceeds this times `|e'|`.
    pub interiority_tol: f64,
    /// Largest relative imaginary part tolerated in computed eigenvalues.
    pub imag_tol: f64,
    pub qp: QpTolerances,
    /// Re-verify derivative identities and relaxation invariants every step.
    pub debug_checks: bool,
    pub trace: TraceFormat,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            delta: 1e-6,
            max_iters: None,
            derivatives: DerivativeMode::Analytic,
            feasibility_tol: 1e-8,
            interiority_tol: 1e-12,
            imag_tol: univariate::DEFAULT_IMAG_TOL,
            qp: QpTolerances::default(),
            debug_checks: false,
            trace: TraceFormat::None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Input(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::Input(format!("delta = {} must be positive", self.delta)));
        }
        for (name, v) in [
            ("feasibility_tol", self.feasibility_tol),
            ("interiority_tol", self.interiority_tol),
            ("imag_tol", self.imag_tol),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Input(format!("{name} = {v} must be a nonnegative number")));
            }
        }
        Ok(())
    }
}

/// `alpha sqrt((1 - alpha) / 8)`.
pub fn kappa(alpha: f64) -> f64 {
    alpha * ((1.0 - alpha) / 8.0).sqrt()
}

/// Guaranteed gap contraction over every two iterations,
/// `1 - kappa / (kappa + sqrt(d))`.
pub fn contraction_bound(degree: usize, alpha: f64) -> f64 {
    let k = kappa(alpha);
    1.0 - k / (k + (degree as f64).sqrt())
}

/// `ceil(2 (kappa + sqrt(d)) / kappa * ln(max(gap0, 1) / delta))`.
pub fn iteration_bound(degree: usize, alpha: f64, gap0: f64, delta: f64) -> usize {
    let k = kappa(alpha);
    let v = 2.0 * (k + (degree as f64).sqrt()) / k * (gap0.max(1.0) / delta).ln();
    if v.is_finite() && v > 0.0 {
        v.ceil() as usize
    } else {
        0
    }
}

/// Coefficients of the step quadratic `a t^2 + b t + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl StepQuadratic {
    pub fn minimizer(&self) -> f64 {
        -self.b / (2.0 * self.a)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }
}

pub fn step_quadratic(m: &EigenMoments, degree: usize, alpha: f64) -> StepQuadratic {
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    StepQuadratic {
        a: m.s1 * m.s1 * m.s2 - 2.0 * a2 * m.s1 * m.s3 + a4 * m.s4,
        b: 2.0 * a4 * m.s3 - 2.0 * m.s1 * m.s1 * m.s1,
        c: (degree as f64 - a2) * m.s1 * m.s1,
    }
}

/// Solver state between iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub e: Vec<f64>,
    pub iteration: usize,
    /// Gap of the last relaxation solved (at the previous center).
    pub gap: f64,
    pub t_step: f64,
    pub qp: Option<QpSolution>,
    pub oracle_calls: u64,
}

/// One accepted step from `e_k` to `e_{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// `<c, e_k>`.
    pub objective: f64,
    /// `<b, y_k>`.
    pub dual_objective: f64,
    /// `<c, e_k - x_k>`.
    pub gap: f64,
    pub t_step: f64,
    /// Smallest eigenvalue of `e_{k+1}`.
    pub min_eigenvalue: f64,
    /// `|A e_{k+1} - b|`.
    pub residual: f64,
    /// `|x_k|_{e_k}`.
    pub x_local_norm: f64,
    pub oracle_calls: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub termination: Termination,
    /// Set when the run stopped on an error.
    pub message: Option<String>,
    pub e: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Gap at the final center; infinite if it could not be computed.
    pub gap: f64,
    pub gap0: f64,
    pub iterations: usize,
    pub max_iters: usize,
    pub oracle_calls: u64,
    pub degree: usize,
    pub alpha: f64,
    pub delta: f64,
    pub trace: Vec<TraceRow>,
}

impl SolveReport {
    /// Gaps `gap_0, ..., gap_K` including the final one when known.
    pub fn gap_sequence(&self) -> Vec<f64> {
        let mut gaps: Vec<f64> = self.trace.iter().map(|r| r.gap).collect();
        if self.gap.is_finite() {
            gaps.push(self.gap);
        }
        gaps
    }

    /// The report with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for row in &mut r.trace {
            row.wall_time_s = 0.0;
        }
        r
    }
}

/// Everything the loop needs about one instance.
pub struct Solver<'a, O: Oracle + ?Sized> {
    poly: &'a HyperbolicPolynomial,
    oracle: &'a O,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    opts: SolverOptions,
}

impl<'a, O: Oracle + ?Sized> Solver<'a, O> {
    pub fn new(
        poly: &'a HyperbolicPolynomial,
        oracle: &'a O,
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        opts: SolverOptions,
    ) -> Result<Self> {
        opts.validate()?;
        let n = poly.dimension();
        if oracle.dimension() != n || oracle.degree() != poly.degree() {
            return Err(Error::Input("oracle and polynomial disagree on degree or dimension".into()));
        }
        if a.ncols() != n || b.len() != a.nrows() || c.len() != n {
            return Err(Error::Input(format!(
                "A is {}x{}, b has {} entries, c has {}, polynomial has {n} variables",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { poly, oracle, a, b, c, opts })
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    fn residual(&self, e: &DVector<f64>) -> f64 {
        (&self.a * e - &self.b).norm()
    }

    fn feasible(&self, e: &DVector<f64>) -> bool {
        self.residual(e) <= self.opts.feasibility_tol * (1.0 + self.b.norm())
    }

    /// Smallest eigenvalue in the polynomial's hyperbolic direction.
    pub fn min_eigenvalue(&self, x: &[f64]) -> Result<f64> {
        let dir = self.poly.direction();
        let vals = if self.opts.derivatives == DerivativeMode::Analytic && self.poly.has_analytic() {
            self.poly.analytic_eigenvalues(x, dir)?
        } else {
            univariate::eigenvalues_with_tol(self.oracle, x, dir, self.opts.imag_tol)?
        };
        Ok(*vals.last().expect("degree >= 1"))
    }

    /// Checks `A e0 = b` and that `e0` is strictly inside the cone.
    pub fn check_initial(&self, e0: &[f64]) -> Result<()> {
        if e0.len() != self.poly.dimension() {
            return Err(Error::Initialization(format!(
                "e0 has {} entries, expected {}",
                e0.len(),
                self.poly.dimension()
            )));
        }
        let ev = DVector::from_column_slice(e0);
        if !self.feasible(&ev) {
            return Err(Error::Initialization(format!("A e0 = b violated: residual {:e}", self.residual(&ev))));
        }
        let lam = self
            .min_eigenvalue(e0)
            .map_err(|err| Error::Initialization(format!("cannot evaluate eigenvalues at e0: {err}")))?;
        if !(lam > 0.0) {
            return Err(Error::Initialization(format!(
                "e0 is not in the interior of the hyperbolicity cone (min eigenvalue {lam:e})"
            )));
        }
        Ok(())
    }

    /// Builds and solves `QP_e(alpha)` at `e`.
    pub fn relax(&self, e: &[f64]) -> Result<(QpProblem, QpSolution)> {
        let bp = BarrierPoint::evaluate(self.poly, self.oracle, e, self.opts.derivatives)?;
        if self.opts.debug_checks {
            bp.check_identities(self.poly.degree(), 1e-6)?;
        }
        let q = QpProblem {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            e: DVector::from_column_slice(e),
            g: bp.gradient().clone(),
            h: bp.hessian().clone(),
            alpha: self.opts.alpha,
            degree: self.poly.degree(),
        };
        let sol = solve_qp_with(&q, &self.opts.qp)?;
        if self.opts.debug_checks {
            check_solution(&q, &sol)?;
        }
        Ok((q, sol))
    }

    /// Moves from `q.e` along the relaxation optimizer.
    pub fn advance(&self, q: &QpProblem, sol: &QpSolution, iteration: usize) -> Result<(Vec<f64>, StepQuadratic, f64)> {
        let fail = |reason: String| Error::StepFailure { iteration, reason };
        let e = q.e.as_slice();
        // Moments of x_e are taken in direction e, the current center.
        let m = univariate::moments(self.oracle, &sol.x_e, e).map_err(|err| fail(format!("moments: {err}")))?;
        let sq = step_quadratic(&m, self.poly.degree(), self.opts.alpha);
        if !(sq.a > 0.0) {
            return Err(fail(format!("step quadratic is not convex (a = {:e})", sq.a)));
        }
        let t = sq.minimizer();
        if !(t > 0.0) || !t.is_finite() {
            return Err(fail(format!("step length t = {t:e} is not positive")));
        }
        let next: Vec<f64> = e.iter().zip(&sol.x_e).map(|(ei, xi)| (ei + t * xi) / (1.0 + t)).collect();
        let nv = DVector::from_column_slice(&next);
        if !self.feasible(&nv) {
            return Err(fail(format!("A e' = b violated: residual {:e}", self.residual(&nv))));
        }
        let lam = self.min_eigenvalue(&next).map_err(|err| fail(format!("eigenvalues of e': {err}")))?;
        if !(lam > self.opts.interiority_tol * nv.norm()) {
            return Err(fail(format!("e' left the interior (min eigenvalue {lam:e})")));
        }
        Ok((next, sq, lam))
    }

    /// One full iteration from `state`.
    pub fn step(&self, state: &IterateState) -> Result<IterateState> {
        let (q, sol) = self.relax(&state.e)?;
        let (e, sq, _) = self.advance(&q, &sol, state.iteration + 1)?;
        Ok(IterateState {
            e,
            iteration: state.iteration + 1,
            gap: sol.gap,
            t_step: sq.minimizer(),
            qp: Some(sol),
            oracle_calls: state.oracle_calls,
        })
    }

    /// Runs the main loop from `e0`. Failures after initialization are
    /// reported in the returned report with the trace so far.
    pub fn run(&self, e0: &[f64], calls: impl Fn() -> u64) -> Result<SolveReport> {
        self.check_initial(e0)?;
        let d = self.poly.degree();
        let start_calls = calls();
        let mut report = SolveReport {
            termination: Termination::NumericalFailure,
            message: None,
            e: e0.to_vec(),
            objective: self.c.dot(&DVector::from_column_slice(e0)),
            dual_objective: f64::NEG_INFINITY,
            gap: f64::INFINITY,
            gap0: f64::INFINITY,
            iterations: 0,
            max_iters: self.opts.max_iters.unwrap_or(0),
            oracle_calls: 0,
            degree: d,
            alpha: self.opts.alpha,
            delta: self.opts.delta,
            trace: Vec::new(),
        };
        let mut e = e0.to_vec();
        let mut iteration = 0usize;
        loop {
            let timer = Instant::now();
            let before = calls();
            let (q, sol) = match self.relax(&e) {
                Ok(v) => v,
                Err(err) => {
                    report.message = Some(format!("iteration {}: {err}", iteration + 1));
                    break;
                }
            };
            let dual = self.b.dot(&DVector::from_vec(sol.y_dual.clone()));
            report.e = e.clone();
            report.objective = self.c.dot(&q.e);
            report.dual_objective = dual;
            report.gap = sol.gap;
            if iteration == 0 {
                report.gap0 = sol.gap;
                if self.opts.max_iters.is_none() {
                    report.max_iters = 2 * iteration_bound(d, self.opts.alpha, sol.gap, self.opts.delta);
                }
            }
            if sol.gap < self.opts.delta {
                report.termination = Termination::Converged;
                break;
            }
            if iteration >= report.max_iters {
                report.termination = Termination::MaxIterations;
                break;
            }
            let (next, sq, lam) = match self.advance(&q, &sol, iteration + 1) {
                Ok(v) => v,
                Err(err) => {
                    report.message = Some(err.to_string());
                    break;
                }
            };
            iteration += 1;
            let nv = DVector::from_column_slice(&next);
            report.trace.push(TraceRow {
                iteration,
                objective: report.objective,
                dual_objective: dual,
                gap: sol.gap,
                t_step: sq.minimizer(),
                min_eigenvalue: lam,
                residual: self.residual(&nv),
                x_local_norm: q.local_norm(&DVector::from_vec(sol.x_e.clone())),
                oracle_calls: calls() - before,
                wall_time_s: timer.elapsed().as_secs_f64(),
            });
            log::debug!("iteration {iteration}: gap {:.3e}, t {:.3e}", sol.gap, sq.minimizer());
            e = next;
            report.iterations = iteration;
        }
        report.iterations = iteration;
        if report.termination == Termination::NumericalFailure {
            // The last accepted center.
            report.e = e.clone();
            report.objective = self.c.dot(&DVector::from_column_slice(&e));
        }
        report.oracle_calls = calls() - start_calls;
        Ok(report)
    }
}

fn check_solution(q: &QpProblem, sol: &QpSolution) -> Result<()> {
    let x = DVector::from_vec(sol.x_e.clone());
    let s = DVector::from_vec(sol.s_dual.clone());
    let y = DVector::from_vec(sol.y_dual.clone());
    let scale = 1.0 + q.b.norm();
    let checks = [
        ("A x = b", (&q.a * &x - &q.b).norm() / scale),
        ("boundary", q.boundary_value(&x).abs() / (1.0 + q.g.dot(&x).powi(2))),
        ("complementarity", x.dot(&s).abs() / (1.0 + x.norm() * s.norm())),
        ("strong duality", (q.b.dot(&y) - q.c.dot(&x)).abs() / (1.0 + q.c.dot(&x).abs())),
    ];
    for (name, v) in checks {
        if !(v <= 1e-8) {
            return Err(Error::NumericalFailure(format!("relaxation invariant '{name}' off by {v:e}")));
        }
    }
    Ok(())
}

/// Solves `hp` with its own options.
pub fn solve(hp: &HyperbolicProgram) -> Result<SolveReport> {
    solve_with_options(hp, &hp.options)
}

pub fn solve_with_options(hp: &HyperbolicProgram, opts: &SolverOptions) -> Result<SolveReport> {
    let poly = hp.polynomial()?;
    let counter = CountingOracle::new(&poly);
    solve_with_oracle(hp, &poly, &counter, opts, || counter.calls())
}

/// Runs the solver with a caller-provided oracle for `p`; `poly` supplies
/// the hyperbolic direction and, in analytic mode, closed-form derivatives.
pub fn solve_with_oracle<O: Oracle + ?Sized>(
    hp: &HyperbolicProgram,
    poly: &HyperbolicPolynomial,
    oracle: &O,
    opts: &SolverOptions,
    calls: impl Fn() -> u64,
) -> Result<SolveReport> {
    let solver = Solver::new(poly, oracle, hp.a_matrix()?, hp.b_vector(), hp.c_vector(), opts.clone())?;
    solver.run(&hp.e0, calls)
}

/// Outcome of checking the two-step contraction guarantee on a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionAudit {
    pub passed: bool,
    pub bound: f64,
    pub tolerance: f64,
    /// `(i, gap_{i+1}/gap_i, gap_{i+2}/gap_{i+1})` for the worst pair.
    pub worst: Option<(usize, f64, f64)>,
    pub iterations: usize,
    pub iteration_bound: usize,
    pub within_iteration_bound: bool,
}

/// Verifies that among every two consecutive gap ratios at least one is
/// within `1 - kappa / (kappa + sqrt(d)) + tol`, and that the iteration count
/// respects the theoretical bound.
pub fn contraction_audit(report: &SolveReport, degree: usize, alpha: f64, tol: f64) -> ContractionAudit {
    let bound = contraction_bound(degree, alpha);
    let gaps = report.gap_sequence();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    let mut worst: Option<(usize, f64, f64)> = None;
    let mut passed = true;
    for (i, pair) in ratios.windows(2).enumerate() {
        let best = pair[0].min(pair[1]);
        if worst.is_none_or(|(_, a, b)| best > a.min(b)) {
            worst = Some((i, pair[0], pair[1]));
        }
        if !(best <= bound + tol) {
            passed = false;
        }
    }
    let it_bound = iteration_bound(degree, alpha, report.gap0, report.delta);
    ContractionAudit {
        passed,
        bound,
        tolerance: tol,
        worst,
        iterations: report.iterations,
        iteration_bound: it_bound,
        within_iteration_bound: report.iterations <= it_bound,
    }
}

/// Per-run monotonicity and swath checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantAudit {
    pub objective_decreasing: bool,
    pub dual_nondecreasing: bool,
    pub feasible: bool,
    pub interior: bool,
}

impl InvariantAudit {
    pub fn passed(&self) -> bool {
        self.objective_decreasing && self.dual_nondecreasing && self.feasible && self.interior
    }
}

/// `dual_slack` absorbs rounding in `<b, y>` between consecutive iterates,
/// relative to `1 + |<b, y>|`.
pub fn invariant_audit(report: &SolveReport, feasibility_tol: f64, b_norm: f64, dual_slack: f64) -> InvariantAudit {
    let mut objectives: Vec<f64> = report.trace.iter().map(|r| r.objective).collect();
    let mut duals: Vec<f64> = report.trace.iter().map(|r| r.dual_objective).collect();
    if report.gap.is_finite() {
        objectives.push(report.objective);
        duals.push(report.dual_objective);
    }
    InvariantAudit {
        objective_decreasing: objectives.windows(2).all(|w| w[1] < w[0]),
        dual_nondecreasing: duals.windows(2).all(|w| w[1] >= w[0] - dual_slack * (1.0 + w[0].abs())),
        feasible: report.trace.iter().all(|r| r.residual <= feasibility_tol * (1.0 + b_norm)),
        interior: report.trace.iter().all(|r| r.min_eigenvalue > 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_quadratic_fixture() {
        let m = EigenMoments::from_eigenvalues(&[5.0, 15.0]);
        let q = step_quadratic(&m, 2, 0.1);
        assert!((q.a - 98605.125).abs() < 1e-9);
        assert!((q.b + 15999.3).abs() < 1e-9);
        assert!((q.c - 796.0).abs() < 1e-12);
    }

    #[test]
    fn step_quadratic_at_center() {
        for d in [1usize, 2, 5, 9] {
            let m = EigenMoments::from_eigenvalues(&vec![1.0; d]);
            let q = step_quadratic(&m, d, 0.1);
            let df = d as f64;
            let (a2, a4) = (0.01, 1e-4);
            assert!((q.a - (df.powi(3) - 2.0 * a2 * df * df + a4 * df)).abs() < 1e-10 * df.powi(3));
            assert!((q.b - (2.0 * a4 * df - 2.0 * df.powi(3))).abs() < 1e-10 * df.powi(3));
            assert!((q.c - (df - a2) * df * df).abs() < 1e-10 * df.powi(3));
        }
    }

    #[test]
    fn minimizer_scales_inversely() {
        let lam = [0.3, 1.7, 2.2];
        let m = EigenMoments::from_eigenvalues(&lam);
        let t = step_quadratic(&m, 3, 0.1).minimizer();
        let scaled: Vec<f64> = lam.iter().map(|v| v * 4.0).collect();
        let ts = step_quadratic(&EigenMoments::from_eigenvalues(&scaled), 3, 0.1).minimizer();
        assert!((ts - t / 4.0).abs() < 1e-14 * t);
    }

    #[test]
    fn constants() {
        assert!((kappa(0.1) - 0.0335410).abs() < 1e-7);
        assert!((contraction_bound(2, 0.1) - 0.97683).abs() < 1e-5);
        assert_eq!(iteration_bound(2, 0.1, 0.5, 10.0), 0);
    }

    #[test]
    fn options_round_trip() {
        let o = SolverOptions { max_iters: Some(7), derivatives: DerivativeMode::Oracle, ..Default::default() };
        let s = serde_json::to_string(&o).unwrap();
        assert_eq!(serde_json::from_str::<SolverOptions>(&s).unwrap(), o);
        let partial: SolverOptions = serde_json::from_str(r#"{"alpha": 0.2}"#).unwrap();
        assert_eq!(partial.alpha, 0.2);
        assert_eq!(partial.delta, 1e-6);
        assert!(serde_json::from_str::<SolverOptions>(r#"{"alpah": 0.2}"#).is_err());
        assert!(SolverOptions { alpha: 1.0, ..Default::default() }.validate().is_err());
    }
}
