//! Problem construction, validation, JSON I/O and reference solvers.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipm::SolverOptions;
use crate::linalg::{numerical_rank, project_off_row_space};
use crate::poly::{
    pack_symmetric, pack_symmetric_weighted, packed_len, FamilySpec, HyperbolicPolynomial, PolynomialSpec,
};

pub mod generators;

/// Current version of the problem file format.
pub const FORMAT_VERSION: u32 = 1;

fn format_version() -> u32 {
    FORMAT_VERSION
}

/// `min <c, x>  s.t.  A x = b,  x` in the hyperbolicity cone of `poly`,
/// together with a strictly feasible starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicProgram {
    #[serde(default = "format_version")]
    pub format: u32,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub poly: PolynomialSpec,
    pub e0: Vec<f64>,
    #[serde(default)]
    pub options: SolverOptions,
}

/// Result of one named validation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

impl HyperbolicProgram {
    /// Assembles a program and rejects it unless every check passes.
    pub fn new(
        a: &DMatrix<f64>,
        b: &[f64],
        c: &[f64],
        poly: PolynomialSpec,
        e0: &[f64],
        options: SolverOptions,
    ) -> Result<Self> {
        let hp = Self {
            format: FORMAT_VERSION,
            a: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: b.to_vec(),
            c: c.to_vec(),
            poly,
            e0: e0.to_vec(),
            options,
        };
        hp.ensure_valid()?;
        Ok(hp)
    }

    /// LP in standard form over the nonnegative orthant.
    pub fn from_lp(a: &DMatrix<f64>, b: &[f64], c: &[f64], interior_point: &[f64]) -> Result<Self> {
        Self::new(a, b, c, PolynomialSpec::product(a.ncols()), interior_point, SolverOptions::default())
    }

    /// SDP `min tr(C X)  s.t.  tr(A_i X) = b_i,  X psd` over packed symmetric
    /// vectors. Objective and constraint rows get doubled off-diagonals so
    /// that `<c, x> = tr(C X)` and `(A x)_i = tr(A_i X)`.
    pub fn from_sdp(a_ops: &[DMatrix<f64>], b: &[f64], c: &DMatrix<f64>, interior: &DMatrix<f64>) -> Result<Self> {
        let k = c.nrows();
        let check_sym = |m: &DMatrix<f64>, name: &str| -> Result<()> {
            if m.shape() != (k, k) {
                return Err(Error::Input(format!("{name} is {}x{}, expected {k}x{k}", m.nrows(), m.ncols())));
            }
            if (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
                return Err(Error::Input(format!("{name} is not symmetric")));
            }
            Ok(())
        };
        check_sym(c, "C")?;
        check_sym(interior, "X0")?;
        for (i, ai) in a_ops.iter().enumerate() {
            check_sym(ai, &format!("A_{}", i + 1))?;
        }
        if interior.clone().cholesky().is_none() {
            return Err(Error::Initialization("X0 is not positive definite".into()));
        }
        let rows: Vec<f64> = a_ops.iter().flat_map(pack_symmetric_weighted).collect();
        let a = DMatrix::from_row_slice(a_ops.len(), packed_len(k), &rows);
        Self::new(
            &a,
            b,
            &pack_symmetric_weighted(c),
            PolynomialSpec::determinant(k),
            &pack_symmetric(interior),
            SolverOptions::default(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.c.len()
    }

    pub fn a_matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.a.len();
        let n = self.c.len();
        if let Some((i, row)) = self.a.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Input(format!("row {i} of A has {} entries, expected {n}", row.len())));
        }
        Ok(DMatrix::from_fn(m, n, |i, j| self.a[i][j]))
    }

    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.b)
    }

    pub fn c_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.c)
    }

    /// Builds the polynomial, using `e0` as direction when the spec needs one
    /// and names none.
    pub fn polynomial(&self) -> Result<HyperbolicPolynomial> {
        self.poly.build_with_fallback(Some(&self.e0))
    }

    /// Runs every check and reports each one by name.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport { checks: Vec::new() };
        r.push(
            "format",
            self.format == FORMAT_VERSION,
            format!("format {} (supported: {FORMAT_VERSION})", self.format),
        );
        let n = self.c.len();
        let a = match self.a_matrix() {
            Ok(a) => a,
            Err(e) => {
                r.push("dimensions", false, e.to_string());
                return r;
            }
        };
        let m = a.nrows();
        let dims_ok = m > 0 && self.b.len() == m && self.e0.len() == n && n > 0;
        r.push("dimensions", dims_ok, format!("A {m}x{n}, b {}, c {n}, e0 {}", self.b.len(), self.e0.len()));
        if !dims_ok {
            return r;
        }
        let finite = self.a.iter().flatten().chain(&self.b).chain(&self.c).chain(&self.e0).all(|v| v.is_finite());
        r.push("finite", finite, if finite { "all entries finite" } else { "non-finite entry" });
        if let Err(e) = self.options.validate() {
            r.push("options", false, e.to_string());
        } else {
            r.push("options", true, "ok");
        }
        let poly = match self.polynomial() {
            Ok(p) if p.dimension() == n => {
                r.push("polynomial", true, format!("{} of degree {}", p.kind(), p.degree()));
                Some(p)
            }
            Ok(p) => {
                r.push("polynomial", false, format!("polynomial has {} variables, c has {n}", p.dimension()));
                None
            }
            Err(e) => {
                r.push("polynomial", false, e.to_string());
                None
            }
        };
        let rank = numerical_rank(&a, 1e-11);
        r.push("full_row_rank", rank == m, format!("rank {rank} of {m} rows"));
        let b = self.b_vector();
        r.push("b_nonzero", b.norm() > 0.0, format!("|b| = {:e}", b.norm()));
        let c = self.c_vector();
        if rank == m {
            let off = project_off_row_space(&a, &c).norm();
            r.push(
                "c_off_row_space",
                off > 1e-10 * c.norm(),
                format!("component of c off the row space: {off:e} (|c| = {:e})", c.norm()),
            );
        } else {
            r.push("c_off_row_space", false, "skipped: A is rank deficient");
        }
        let e0 = DVector::from_column_slice(&self.e0);
        let resid = (&a * &e0 - &b).norm();
        r.push(
            "e0_feasible",
            resid <= self.options.feasibility_tol * (1.0 + b.norm()),
            format!("|A e0 - b| = {resid:e}"),
        );
        match poly.map(|p| {
            p.analytic_eigenvalues(&self.e0, p.direction())
                .or_else(|_| crate::univariate::eigenvalues(&p, &self.e0, p.direction()))
        }) {
            Some(Ok(vals)) => {
                let lam = *vals.last().expect("degree >= 1");
                r.push("e0_interior", lam > 0.0, format!("min eigenvalue {lam:e}"));
            }
            Some(Err(e)) => r.push("e0_interior", false, e.to_string()),
            None => r.push("e0_interior", false, "skipped: polynomial invalid"),
        }
        r
    }

    /// Converts the first failing check into an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        let Some(fail) = report.failures().into_iter().next() else {
            return Ok(());
        };
        let msg = format!("{}: {}", fail.name, fail.detail);
        Err(match fail.name.as_str() {
            "e0_feasible" | "e0_interior" => Error::Initialization(msg),
            "full_row_rank" | "b_nonzero" | "c_off_row_space" => Error::AssumptionViolation(msg),
            _ => Error::Input(msg),
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json_string()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Optimal value by a method independent of the interior-point solver:
/// vertex enumeration for LPs (`n <= 10`), `lambda_min` scaling for SDPs
/// with a single trace constraint, and boundary search over a 1-D or 2-D
/// feasible slice for the Lorentz cone.
pub fn brute_force_reference(hp: &HyperbolicProgram) -> Result<f64> {
    let a = hp.a_matrix()?;
    let b = hp.b_vector();
    let c = hp.c_vector();
    match &hp.poly.family {
        FamilySpec::Product { .. } => lp_vertex_enumeration(&a, &b, &c),
        FamilySpec::Determinant { k } => sdp_trace_reference(&a, &b, &c, *k),
        FamilySpec::Lorentz { .. } => {
            let poly = hp.polynomial()?;
            boundary_search(&poly, &a, &c, &hp.e0)
        }
        _ => Err(Error::Capability(format!("no reference solver for the {} family", hp.poly.kind()))),
    }
}

fn lp_vertex_enumeration(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
    let (m, n) = a.shape();
    if n > 10 {
        return Err(Error::Capability(format!("vertex enumeration limited to n <= 10 (got {n})")));
    }
    let mut best = f64::INFINITY;
    let mut basis: Vec<usize> = (0..m).collect();
    loop {
        let ab = DMatrix::from_fn(m, m, |i, j| a[(i, basis[j])]);
        if let Some(xb) = ab.clone().full_piv_lu().solve(b) {
            if (&ab * &xb - b).norm() <= 1e-9 * (1.0 + b.norm()) && xb.iter().all(|v| *v >= -1e-10) {
                let val: f64 = basis.iter().zip(xb.iter()).map(|(j, v)| c[*j] * v).sum();
                best = best.min(val);
            }
        }
        // Next combination in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return if best.is_finite() {
                    Ok(best)
                } else {
                    Err(Error::NumericalFailure("no feasible vertex".into()))
                };
            }
            i -= 1;
            if basis[i] < n - m + i {
                basis[i] += 1;
                for j in i + 1..m {
                    basis[j] = basis[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn sdp_trace_reference(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, k: usize) -> Result<f64> {
    let identity = DVector::from_vec(pack_symmetric_weighted(&DMatrix::identity(k, k)));
    if a.nrows() != 1 {
        return Err(Error::Capability("SDP reference needs a single trace constraint".into()));
    }
    let row = a.row(0).transpose();
    let beta = row.dot(&identity) / identity.norm_squared();
    if (&row - &identity * beta).norm() > 1e-12 * row.norm() || beta == 0.0 {
        return Err(Error::Capability("SDP reference needs the constraint tr(X) = const".into()));
    }
    let cm = unpack_weighted(c.as_slice(), k);
    let lam_min = cm.symmetric_eigenvalues().min();
    Ok(b[0] / beta * lam_min)
}

/// Inverse of [`pack_symmetric_weighted`].
pub fn unpack_weighted(v: &[f64], k: usize) -> DMatrix<f64> {
    let mut m = crate::poly::unpack_symmetric(v, k);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                m[(i, j)] *= 0.5;
            }
        }
    }
    m
}

/// Minimizes `<c, x>` over the slice `{A x = b}` of the cone by casting
/// rays from the interior point `e0`: along direction `v` the boundary is
/// reached at `t = -1 / lambda_min(v)` (eigenvalues relative to `e0`). The
/// slice must have dimension 1 or 2; directions are gridded then refined by
/// golden-section search.
fn boundary_search(poly: &HyperbolicPolynomial, a: &DMatrix<f64>, c: &DVector<f64>, e0: &[f64]) -> Result<f64> {
    let null = crate::linalg::null_space(a, 1e-12);
    let k = null.ncols();
    let e = DVector::from_column_slice(e0);
    let value_along = |v: &DVector<f64>| -> Result<f64> {
        let vals = poly.analytic_eigenvalues(v.as_slice(), e0)?;
        let lam = *vals.last().expect("degree >= 1");
        if lam >= 0.0 {
            // The ray never leaves the cone.
            return if c.dot(v) < 0.0 { Ok(f64::NEG_INFINITY) } else { Ok(c.dot(&e)) };
        }
        Ok(c.dot(&(&e - v / lam)))
    };
    match k {
        1 => {
            let v = null.column(0).into_owned();
            let best = value_along(&v)?.min(value_along(&(-&v))?);
            finite_or_unbounded(best)
        }
        2 => {
            let dir = |theta: f64| null.column(0) * theta.cos() + null.column(1) * theta.sin();
            let f = |theta: f64| value_along(&dir(theta));
            let grid = 3600;
            let step = std::f64::consts::TAU / grid as f64;
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..grid {
                let th = i as f64 * step;
                let v = f(th)?;
                if v < best.0 {
                    best = (v, th);
                }
            }
            if best.0 == f64::NEG_INFINITY {
                return finite_or_unbounded(best.0);
            }
            let (mut lo, mut hi) = (best.1 - step, best.1 + step);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = hi - g * (hi - lo);
            let mut x2 = lo + g * (hi - lo);
            let (mut f1, mut f2) = (f(x1)?, f(x2)?);
            for _ in 0..200 {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - g * (hi - lo);
                    f1 = f(x1)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + g * (hi - lo);
                    f2 = f(x2)?;
                }
            }
            finite_or_unbounded(best.0.min(f1).min(f2))
        }
        _ => Err(Error::Capability(format!("boundary search supports slices of dimension 1 or 2 (got {k})"))),
    }
}

fn finite_or_unbounded(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalFailure("problem is unbounded below".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_example() -> HyperbolicProgram {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        HyperbolicProgram::from_lp(&a, &[2.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn lp_construction() {
        let hp = lp_example();
        assert_eq!(hp.polynomial().unwrap().degree(), 2);
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let r = HyperbolicProgram::from_lp(&a, &[2.0], &[1.0, 0.0], &[2.0, 0.0]);
        assert!(matches!(r, Err(Error::Initialization(ref m)) if m.starts_with("e0_interior")), "{r:?}");
        let r = HyperbolicProgram::from_lp(&a, &[2.0], &[1.0, 0.0], &[1.0, 2.0]);
        assert!(matches!(r, Err(Error::Initialization(ref m)) if m.starts_with("e0_feasible")), "{r:?}");
    }

    #[test]
    fn validation_names_failures() {
        let mut hp = lp_example();
        hp.c = vec![1.0, 1.0];
        let r = hp.validate();
        let names: Vec<&str> = r.failures().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["c_off_row_space"]);

        let mut hp = lp_example();
        hp.a = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]];
        hp.b = vec![2.0, 4.0];
        hp.c = vec![1.0, 0.0, 0.0];
        hp.e0 = vec![1.0, 1.0, 1.0];
        hp.poly = PolynomialSpec::product(3);
        let names: Vec<String> = hp.validate().failures().iter().map(|c| c.name.clone()).collect();
        assert!(names.contains(&"full_row_rank".to_string()), "{names:?}");
    }

    #[test]
    fn sdp_construction_and_reference() {
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0]));
        let hp = HyperbolicProgram::from_sdp(&[DMatrix::identity(2, 2)], &[1.0], &c, &(DMatrix::identity(2, 2) * 0.5))
            .unwrap();
        assert_eq!(hp.polynomial().unwrap().degree(), 2);
        assert!((brute_force_reference(&hp).unwrap() - 1.0).abs() < 1e-12);

        // C = I puts c in the row space of the trace constraint.
        let r = HyperbolicProgram::from_sdp(
            &[DMatrix::identity(2, 2)],
            &[1.0],
            &DMatrix::identity(2, 2),
            &(DMatrix::identity(2, 2) * 0.5),
        );
        assert!(matches!(r, Err(Error::AssumptionViolation(_))));

        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(
            HyperbolicProgram::from_sdp(&[DMatrix::identity(2, 2)], &[1.0], &asym, &DMatrix::identity(2, 2)).is_err()
        );
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(HyperbolicProgram::from_sdp(&[DMatrix::identity(2, 2)], &[0.0], &c, &not_pd).is_err());
    }

    #[test]
    fn lp_reference() {
        assert_eq!(brute_force_reference(&lp_example()).unwrap(), 0.0);
    }

    #[test]
    fn lorentz_reference() {
        // min x3 s.t. x3 - x1 = 1: the optimum x = (-1/2, 0, 1/2) has value 1/2.
        let a = DMatrix::from_row_slice(1, 3, &[-1.0, 0.0, 1.0]);
        let hp = HyperbolicProgram::new(
            &a,
            &[1.0],
            &[0.0, 0.0, 1.0],
            PolynomialSpec::lorentz(3),
            &[0.0, 0.0, 1.0],
            SolverOptions::default(),
        )
        .unwrap();
        let v = brute_force_reference(&hp).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn json_round_trip_and_errors() {
        let hp = lp_example();
        let s = hp.to_json_string().unwrap();
        assert_eq!(HyperbolicProgram::from_json_str(&s).unwrap(), hp);
        let err = HyperbolicProgram::from_json_str("{\n  \"A\": [[1, 1]],\n  \"b\": [2,\n}").unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.starts_with("line 4")), "{err:?}");
        let err = HyperbolicProgram::from_json_str(
            r#"{"A": [[1]], "b": [1], "c": [1], "poly": {"kind": "product", "n": 1}, "e0": [1], "extra": 1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn weighted_unpack_inverts_pack() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        assert_eq!(unpack_weighted(&pack_symmetric_weighted(&m), 3), m);
    }
}
