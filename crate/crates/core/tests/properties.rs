use hypersolve::calculus::{self, DerivativeMode};
use hypersolve::ipm::{self, SolverOptions, Termination};
use hypersolve::poly::HyperbolicPolynomial;
use hypersolve::problems::generators::{self, random_interior_point, QpFamily};
use hypersolve::problems::HyperbolicProgram;
use hypersolve::qp::solve_qp;
use hypersolve::univariate::{self, EigenMoments};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(idx: usize, size: usize) -> HyperbolicPolynomial {
    match idx % 3 {
        0 => HyperbolicPolynomial::product(size + 1),
        1 => HyperbolicPolynomial::determinant(size.min(4)),
        _ => HyperbolicPolynomial::lorentz(size + 1),
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_scale_homogeneously(idx in 0usize..3, size in 1usize..6, seed in any::<u64>(), s in 0.05f64..20.0) {
        let p = family(idx, size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_interior_point(&p, &mut rng).unwrap();
        let e = p.direction().to_vec();
        let m = univariate::moments(&p, &x, &e).unwrap().as_array();
        let sx: Vec<f64> = x.iter().map(|v| v * s).collect();
        let ms = univariate::moments(&p, &sx, &e).unwrap().as_array();
        for k in 0..4 {
            let factor = s.powi(k as i32 + 1);
            prop_assert!(rel(ms[k], factor * m[k], factor * m[k].abs().max(1.0)) < 1e-9, "k={} {} vs {}", k, ms[k], factor * m[k]);
        }
    }

    #[test]
    fn moments_are_eigenvalue_power_sums(idx in 0usize..3, size in 1usize..6, seed in any::<u64>()) {
        let p = family(idx, size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_interior_point(&p, &mut rng).unwrap();
        let e = p.direction().to_vec();
        let eig = p.analytic_eigenvalues(&x, &e).unwrap();
        let m = univariate::moments(&p, &x, &e).unwrap().as_array();
        let direct = EigenMoments::from_eigenvalues(&eig).as_array();
        for k in 0..4 {
            let scale: f64 = eig.iter().map(|l| l.abs().powi(k as i32 + 1)).sum();
            prop_assert!(rel(m[k], direct[k], scale) < 1e-9);
        }
    }

    #[test]
    fn eigenvalues_shift_along_direction(idx in 0usize..3, size in 1usize..6, seed in any::<u64>(), t in -0.1f64..5.0) {
        let p = family(idx, size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_interior_point(&p, &mut rng).unwrap();
        let e = p.direction().to_vec();
        let shifted: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + t * b).collect();
        let base = univariate::eigenvalues(&p, &x, &e).unwrap();
        let moved = univariate::eigenvalues(&p, &shifted, &e).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((a + t - b).abs() < 1e-8 * (1.0 + b.abs()), "{:?} {:?}", base, moved);
        }
    }

    #[test]
    fn oracle_derivatives_satisfy_euler_identities(idx in 0usize..3, size in 1usize..5, seed in any::<u64>()) {
        let p = family(idx, size);
        let d = p.degree() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_interior_point(&p, &mut rng).unwrap();
        let g = calculus::full_gradient(&p, &x).unwrap();
        let gx: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((gx + d).abs() < 1e-9 * d);
        // H(x) x = -g(x)
        let hx = calculus::hess_vec(&p, &x, &x).unwrap();
        let resid: Vec<f64> = hx.iter().zip(&g).map(|(a, b)| a + b).collect();
        prop_assert!(norm(&resid) < 1e-7 * norm(&g));
    }

    #[test]
    fn gradient_scales_inversely(idx in 0usize..3, size in 1usize..5, seed in any::<u64>(), s in 0.01f64..100.0) {
        let p = family(idx, size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_interior_point(&p, &mut rng).unwrap();
        let g = calculus::full_gradient(&p, &x).unwrap();
        let sx: Vec<f64> = x.iter().map(|v| v * s).collect();
        let gs = calculus::full_gradient(&p, &sx).unwrap();
        let diff: Vec<f64> = gs.iter().zip(&g).map(|(a, b)| a * s - b).collect();
        prop_assert!(norm(&diff) < 1e-9 * norm(&g));
    }

    #[test]
    fn relaxation_solution_invariants(lorentz in any::<bool>(), n in 3usize..7, m in 1usize..3, seed in any::<u64>(), alpha in 0.05f64..0.9) {
        prop_assume!(m < n);
        let fam = if lorentz { QpFamily::Lorentz } else { QpFamily::Product };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, q) = generators::random_qp(fam, n, m, alpha, &mut rng).unwrap();
        let sol = solve_qp(&q).unwrap();
        let x = DVector::from_vec(sol.x_e.clone());
        let y = DVector::from_vec(sol.y_dual.clone());
        let s = DVector::from_vec(sol.s_dual.clone());
        let cx = q.c.dot(&x);
        let gx = q.g.dot(&x);
        prop_assert!((&q.a * &x - &q.b).norm() <= 1e-9 * (1.0 + q.b.norm()));
        prop_assert!(q.boundary_value(&x).abs() <= 1e-9 * gx * gx);
        prop_assert!(sol.e_inner_x > 0.0);
        prop_assert!(x.dot(&s).abs() <= 1e-9 * (x.norm() * s.norm()).max(1.0));
        prop_assert!((q.b.dot(&y) - cx).abs() <= 1e-9 * cx.abs().max(1.0));
        prop_assert!(sol.gap > 0.0);
        prop_assert!((sol.gap - (q.c.dot(&q.e) - cx)).abs() <= 1e-9 * q.c.dot(&q.e).abs().max(1.0));
    }

    #[test]
    fn problem_json_round_trips(n in 2usize..8, m in 1usize..3, seed in any::<u64>()) {
        prop_assume!(m < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = generators::random_lp(n, m, &mut rng).unwrap();
        let back = HyperbolicProgram::from_json_str(&hp.to_json_string().unwrap()).unwrap();
        prop_assert_eq!(&back, &hp);
        for (a, b) in back.c.iter().zip(&hp.c) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_lp_runs_keep_invariants(n in 3usize..7, m in 1usize..3, seed in any::<u64>()) {
        prop_assume!(m < n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = generators::random_lp(n, m, &mut rng).unwrap();
        let r = ipm::solve(&hp).unwrap();
        prop_assert_eq!(r.termination, Termination::Converged);
        let mut prev = f64::INFINITY;
        for row in &r.trace {
            prop_assert!(row.objective <= prev + 1e-12 * prev.abs().max(1.0));
            prop_assert!(row.min_eigenvalue > 0.0);
            prop_assert!(row.residual <= 1e-8 * (1.0 + norm(&hp.b)));
            prop_assert!(row.dual_objective <= row.objective + 1e-9);
            prev = row.objective;
        }
        let json = serde_json::to_string(&r).unwrap();
        let back: ipm::SolveReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, r);
    }
}

#[test]
fn clustered_eigenvalues_resolved() {
    for gap in [1e-3, 1e-5, 1e-7] {
        let x: Vec<f64> = (0..6).map(|i| 1.0 + gap * i as f64).collect();
        let p = HyperbolicPolynomial::product(x.len());
        let eig = univariate::eigenvalues(&p, &x, &vec![1.0; x.len()]).unwrap();
        let mut want = x.clone();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in eig.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8, "gap {gap}: {eig:?}");
        }
    }
}

#[test]
fn widely_spread_eigenvalues_resolved() {
    let x = vec![1e3, 40.0, 1.0, 2e-2, 1e-4, 1e-6];
    let p = HyperbolicPolynomial::product(x.len());
    let eig = univariate::eigenvalues(&p, &x, &vec![1.0; x.len()]).unwrap();
    for (a, b) in eig.iter().zip(&x) {
        assert!((a - b).abs() <= 1e-9 * b.max(1.0) + 1e-12, "{eig:?}");
    }
    assert!(univariate::min_eigenvalue(&p, &x, &vec![1.0; x.len()]).unwrap() > 0.0);
}

#[test]
fn oracle_and_analytic_runs_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let hp = generators::random_sdp(3, &mut rng).unwrap();
    let analytic = ipm::solve(&hp).unwrap();
    let oracle =
        ipm::solve_with_options(&hp, &SolverOptions { derivatives: DerivativeMode::Oracle, ..hp.options.clone() })
            .unwrap();
    assert_eq!(analytic.termination, Termination::Converged);
    assert_eq!(oracle.termination, Termination::Converged);
    assert!((analytic.objective - oracle.objective).abs() < 1e-5);
    assert!(oracle.oracle_calls > analytic.oracle_calls);
}

#[test]
fn repeated_eigenvalues_stay_exact() {
    for x in [vec![1.0, 1.0, 1.0, 2.0], vec![0.5; 5], vec![3.0, 3.0, 1e-3, 1e-3]] {
        let p = HyperbolicPolynomial::product(x.len());
        let eig = univariate::eigenvalues(&p, &x, &vec![1.0; x.len()]).unwrap();
        let mut want = x.clone();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in eig.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "{x:?}: {eig:?}");
        }
    }
    let p = HyperbolicPolynomial::determinant(3);
    let x = hypersolve::poly::pack_symmetric(&(nalgebra::DMatrix::identity(3, 3) * 0.5));
    let eig = univariate::eigenvalues(&p, &x, p.direction()).unwrap();
    assert!(eig.iter().all(|v| (v - 0.5).abs() < 1e-12), "{eig:?}");
}
