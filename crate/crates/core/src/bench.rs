//! Iteration and oracle-call scaling runs over random product-family LPs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::DerivativeMode;
use crate::error::{Error, Result};
use crate::ipm::{self, SolverOptions, Termination};
use crate::problems::generators::random_lp;

/// One solve of the benchmark grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub degree: usize,
    pub repetition: usize,
    pub iterations: usize,
    pub oracle_calls: u64,
    /// Largest per-iteration oracle-call count.
    pub max_iteration_calls: u64,
    pub gap: f64,
    pub termination: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub family: String,
    pub degrees: Vec<usize>,
    pub delta: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub derivatives: DerivativeMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            family: "product".into(),
            degrees: vec![4, 16, 64],
            delta: 1e-6,
            repetitions: 1,
            seed: 0,
            derivatives: DerivativeMode::Analytic,
        }
    }
}

/// Seed of the instance for `(degree, repetition)`.
pub fn instance_seed(seed: u64, degree: usize, repetition: usize) -> u64 {
    seed ^ ((degree as u64) << 32) ^ repetition as u64
}

/// Number of equality constraints used for a bench instance of degree `d`.
pub fn constraints_for(degree: usize) -> usize {
    if degree > 2 {
        2
    } else {
        1
    }
}

/// Runs every `(degree, repetition)` pair; rows come back in grid order.
pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.family != "product" {
        return Err(Error::Capability(format!("bench supports the product family only (got {})", cfg.family)));
    }
    if let Some(d) = cfg.degrees.iter().find(|d| **d < 2) {
        return Err(Error::Input(format!("bench degree {d} must be at least 2")));
    }
    let grid: Vec<(usize, usize)> =
        cfg.degrees.iter().flat_map(|&d| (0..cfg.repetitions).map(move |r| (d, r))).collect();
    grid.par_iter()
        .map(|&(d, rep)| {
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(cfg.seed, d, rep));
            let hp = random_lp(d, constraints_for(d), &mut rng)?;
            let opts = SolverOptions { delta: cfg.delta, derivatives: cfg.derivatives, ..SolverOptions::default() };
            let start = std::time::Instant::now();
            let report = ipm::solve_with_options(&hp, &opts)?;
            let termination = match report.termination {
                Termination::Converged => "converged",
                Termination::MaxIterations => "max-iterations",
                Termination::NumericalFailure => "numerical-failure",
            };
            Ok(BenchRow {
                family: cfg.family.clone(),
                degree: d,
                repetition: rep,
                iterations: report.iterations,
                oracle_calls: report.oracle_calls,
                max_iteration_calls: report.trace.iter().map(|r| r.oracle_calls).max().unwrap_or(0),
                gap: report.gap,
                termination: termination.into(),
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}
