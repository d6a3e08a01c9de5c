//! Hyperbolic polynomial families and their analytic barrier derivatives.
//!
//! Four families ship with closed-form derivatives of `-ln p`:
//!
//! | family       | `p(x)`                         | degree |
//! |--------------|--------------------------------|--------|
//! | product      | `x_1 x_2 ... x_n`              | `n`    |
//! | determinant  | `det X`, `X` packed symmetric  | `k`    |
//! | lorentz      | `x_n^2 - (x_1^2 + ... )`       | `2`    |
//! | pencil       | `det(x_1 A_1 + ... + x_n A_n)` | `k`    |
//!
//! A fifth, `sparse-monomial`, is evaluated term by term and only reachable
//! through the oracle routines.
//!
//! Symmetric `k x k` matrices are stored as packed upper-triangular vectors
//! of length `k(k+1)/2`, row by row, with off-diagonal entries unscaled. The
//! Euclidean gradient of a linear functional `X -> tr(M X)` in these
//! coordinates is `M` packed with doubled off-diagonals; see
//! [`pack_symmetric_weighted`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_det, generalized_sym_eigenvalues};
use crate::oracle::Oracle;
use crate::univariate;

/// One monomial `coeff * x_1^{a_1} ... x_n^{a_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// Family-specific payload of a [`PolynomialSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    Product {
        n: usize,
    },
    Determinant {
        k: usize,
    },
    Lorentz {
        n: usize,
    },
    /// Row-major `k x k` symmetric matrices.
    Pencil {
        matrices: Vec<Vec<Vec<f64>>>,
    },
    SparseMonomial {
        terms: Vec<MonomialTerm>,
    },
}

/// Serialized description of a polynomial.
///
/// `direction` is optional for the families with a canonical hyperbolic
/// direction (product: all ones, determinant: identity, lorentz: last unit
/// vector) and required for pencil and sparse-monomial unless a fallback is
/// supplied at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

impl PolynomialSpec {
    pub fn product(n: usize) -> Self {
        Self { family: FamilySpec::Product { n }, direction: None }
    }

    pub fn determinant(k: usize) -> Self {
        Self { family: FamilySpec::Determinant { k }, direction: None }
    }

    pub fn lorentz(n: usize) -> Self {
        Self { family: FamilySpec::Lorentz { n }, direction: None }
    }

    pub fn pencil(matrices: Vec<DMatrix<f64>>, direction: Vec<f64>) -> Self {
        let matrices =
            matrices.iter().map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()).collect();
        Self { family: FamilySpec::Pencil { matrices }, direction: Some(direction) }
    }

    pub fn sparse_monomial(terms: Vec<MonomialTerm>, direction: Vec<f64>) -> Self {
        Self { family: FamilySpec::SparseMonomial { terms }, direction: Some(direction) }
    }

    pub fn kind(&self) -> &'static str {
        match self.family {
            FamilySpec::Product { .. } => "product",
            FamilySpec::Determinant { .. } => "determinant",
            FamilySpec::Lorentz { .. } => "lorentz",
            FamilySpec::Pencil { .. } => "pencil",
            FamilySpec::SparseMonomial { .. } => "sparse-monomial",
        }
    }

    /// Validates the spec and builds the evaluable polynomial.
    pub fn build(&self) -> Result<HyperbolicPolynomial> {
        self.build_with_fallback(None)
    }

    /// As [`build`](Self::build), using `fallback` as the hyperbolic direction
    /// when the spec carries none and the family has no canonical one.
    pub fn build_with_fallback(&self, fallback: Option<&[f64]>) -> Result<HyperbolicPolynomial> {
        let family = match &self.family {
            FamilySpec::Product { n } => {
                if *n == 0 {
                    return Err(Error::Input("product family needs n >= 1".into()));
                }
                Family::Product { n: *n }
            }
            FamilySpec::Determinant { k } => {
                if *k == 0 {
                    return Err(Error::Input("determinant family needs k >= 1".into()));
                }
                Family::Determinant { k: *k }
            }
            FamilySpec::Lorentz { n } => {
                if *n < 2 {
                    return Err(Error::Input("lorentz family needs n >= 2".into()));
                }
                Family::Lorentz { n: *n }
            }
            FamilySpec::Pencil { matrices } => Family::Pencil { mats: parse_pencil(matrices)? },
            FamilySpec::SparseMonomial { terms } => {
                let degree = check_monomials(terms)?;
                Family::SparseMonomial { terms: terms.clone(), degree }
            }
        };
        let direction = match (&self.direction, fallback) {
            (Some(d), _) => d.clone(),
            (None, fb) => match family.canonical_direction() {
                Some(d) => d,
                None => fb
                    .map(|f| f.to_vec())
                    .ok_or_else(|| Error::Input(format!("{} polynomial needs an explicit direction", self.kind())))?,
            },
        };
        HyperbolicPolynomial::new(family, direction)
    }
}

fn parse_pencil(matrices: &[Vec<Vec<f64>>]) -> Result<Vec<DMatrix<f64>>> {
    if matrices.is_empty() {
        return Err(Error::Input("pencil needs at least one matrix".into()));
    }
    let k = matrices[0].len();
    if k == 0 {
        return Err(Error::Input("pencil matrices must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(matrices.len());
    for (idx, rows) in matrices.iter().enumerate() {
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Input(format!("pencil matrix {idx} is not {k}x{k}")));
        }
        let m = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Input(format!("pencil matrix {idx} is not symmetric")));
        }
        out.push(m);
    }
    Ok(out)
}

fn check_monomials(terms: &[MonomialTerm]) -> Result<usize> {
    let first = terms.first().ok_or_else(|| Error::Input("sparse-monomial polynomial has no terms".into()))?;
    let n = first.exponents.len();
    if n == 0 {
        return Err(Error::Input("sparse-monomial exponents must be non-empty".into()));
    }
    let degree: u32 = first.exponents.iter().sum();
    if degree == 0 {
        return Err(Error::Input("sparse-monomial polynomial must have positive degree".into()));
    }
    for (idx, t) in terms.iter().enumerate() {
        if t.exponents.len() != n {
            return Err(Error::Input(format!("term {idx} has {} exponents, expected {n}", t.exponents.len())));
        }
        let td: u32 = t.exponents.iter().sum();
        if td != degree {
            return Err(Error::Input(format!(
                "term {idx} has total degree {td}, expected {degree} (polynomial must be homogeneous)"
            )));
        }
    }
    Ok(degree as usize)
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Product { n: usize },
    Determinant { k: usize },
    Lorentz { n: usize },
    Pencil { mats: Vec<DMatrix<f64>> },
    SparseMonomial { terms: Vec<MonomialTerm>, degree: usize },
}

impl Family {
    fn dimension(&self) -> usize {
        match self {
            Family::Product { n } | Family::Lorentz { n } => *n,
            Family::Determinant { k } => packed_len(*k),
            Family::Pencil { mats } => mats.len(),
            Family::SparseMonomial { terms, .. } => terms[0].exponents.len(),
        }
    }

    fn degree(&self) -> usize {
        match self {
            Family::Product { n } => *n,
            Family::Determinant { k } => *k,
            Family::Lorentz { .. } => 2,
            Family::Pencil { mats } => mats[0].nrows(),
            Family::SparseMonomial { degree, .. } => *degree,
        }
    }

    fn canonical_direction(&self) -> Option<Vec<f64>> {
        match self {
            Family::Product { n } => Some(vec![1.0; *n]),
            Family::Determinant { k } => Some(pack_symmetric(&DMatrix::identity(*k, *k))),
            Family::Lorentz { n } => {
                let mut e = vec![0.0; *n];
                e[*n - 1] = 1.0;
                Some(e)
            }
            Family::Pencil { .. } | Family::SparseMonomial { .. } => None,
        }
    }
}

/// An evaluable homogeneous polynomial with a declared hyperbolic direction.
///
/// Immutable once built; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicPolynomial {
    family: Family,
    degree: usize,
    dimension: usize,
    direction: Vec<f64>,
}

impl HyperbolicPolynomial {
    fn new(family: Family, direction: Vec<f64>) -> Result<Self> {
        let dimension = family.dimension();
        let degree = family.degree();
        if direction.len() != dimension {
            return Err(Error::Input(format!(
                "direction has length {}, polynomial has {dimension} variables",
                direction.len()
            )));
        }
        if direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("direction has non-finite entries".into()));
        }
        let p = Self { family, degree, dimension, direction };
        if let Family::Pencil { mats } = &p.family {
            let e_mat = pencil_combination(mats, &p.direction);
            let k = e_mat.nrows();
            let is_identity = (&e_mat - DMatrix::<f64>::identity(k, k)).amax() <= 1e-12;
            if !is_identity && e_mat.clone().cholesky().is_none() {
                return Err(Error::Input(
                    "pencil direction must give sum e_i A_i = I or a positive definite matrix".into(),
                ));
            }
        }
        let pe = p.eval(&crate::oracle::complexify(&p.direction));
        if !(pe.re > 0.0) || pe.im.abs() > 1e-12 * pe.re.abs() {
            return Err(Error::Input(format!(
                "polynomial at its direction must be real and positive, got {} + {}i",
                pe.re, pe.im
            )));
        }
        Ok(p)
    }

    pub fn product(n: usize) -> Self {
        PolynomialSpec::product(n).build().expect("valid product family")
    }

    pub fn determinant(k: usize) -> Self {
        PolynomialSpec::determinant(k).build().expect("valid determinant family")
    }

    pub fn lorentz(n: usize) -> Self {
        PolynomialSpec::lorentz(n).build().expect("valid lorentz family")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn kind(&self) -> &'static str {
        match self.family {
            Family::Product { .. } => "product",
            Family::Determinant { .. } => "determinant",
            Family::Lorentz { .. } => "lorentz",
            Family::Pencil { .. } => "pencil",
            Family::SparseMonomial { .. } => "sparse-monomial",
        }
    }

    /// Whether closed-form barrier derivatives and eigenvalues are available.
    pub fn has_analytic(&self) -> bool {
        !matches!(self.family, Family::SparseMonomial { .. })
    }

    /// Checked evaluation at a complex point.
    pub fn evaluate(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_len(x.len())?;
        Ok(self.eval(x))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dimension {
            return Err(Error::Input(format!("point has length {len}, polynomial has {} variables", self.dimension)));
        }
        Ok(())
    }

    fn capability_error(&self, what: &str) -> Error {
        Error::Capability(format!("{what} is not available for the {} family", self.kind()))
    }

    /// `<grad(-ln p(x)), w>` by the closed-form family formula.
    pub fn analytic_grad_dot(&self, x: &[f64], w: &[f64]) -> Result<f64> {
        self.check_len(x.len())?;
        self.check_len(w.len())?;
        match &self.family {
            Family::Product { .. } => {
                check_product_interior(x)?;
                Ok(-x.iter().zip(w).map(|(xi, wi)| wi / xi).sum::<f64>())
            }
            Family::Lorentz { n } => {
                let p = lorentz_value(x)?;
                // d/dx(-ln p) = -grad p / p with grad p = (-2 x_1, ..., -2 x_{n-1}, 2 x_n),
                // so the sign printed for this family is the correct one.
                Ok(2.0 / p * lorentz_gamma(x, w, *n))
            }
            Family::Determinant { k } => {
                let xinv = inverse_interior(&unpack_symmetric(x, *k))?;
                Ok(-(xinv * unpack_symmetric(w, *k)).trace())
            }
            Family::Pencil { mats } => {
                let xinv = inverse_interior(&pencil_combination(mats, x))?;
                Ok(-(xinv * pencil_combination(mats, w)).trace())
            }
            Family::SparseMonomial { .. } => Err(self.capability_error("analytic gradient")),
        }
    }

    /// `hess(-ln p(x)) w` by the closed-form family formula.
    pub fn analytic_hess_vec(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        self.check_len(w.len())?;
        match &self.family {
            Family::Product { .. } => {
                check_product_interior(x)?;
                Ok(x.iter().zip(w).map(|(xi, wi)| wi / (xi * xi)).collect())
            }
            Family::Lorentz { n } => {
                let n = *n;
                let p = lorentz_value(x)?;
                let gamma = lorentz_gamma(x, w, n);
                let p2 = p * p;
                // Last coordinate: (-4 x_n Gamma - 2 p w_n) / p^2. The printed
                // form has +2 p w_n, which fails H(x) x = -g(x) (at x = e_n it
                // gives 6 instead of the true second derivative 2 of -2 ln x_n).
                Ok((0..n)
                    .map(|i| {
                        if i + 1 < n {
                            (4.0 * x[i] * gamma + 2.0 * p * w[i]) / p2
                        } else {
                            (-4.0 * x[i] * gamma - 2.0 * p * w[i]) / p2
                        }
                    })
                    .collect())
            }
            Family::Determinant { k } => {
                let xinv = inverse_interior(&unpack_symmetric(x, *k))?;
                let m = &xinv * unpack_symmetric(w, *k) * &xinv;
                Ok(pack_symmetric_weighted(&m))
            }
            Family::Pencil { mats } => {
                let xinv = inverse_interior(&pencil_combination(mats, x))?;
                let right = &xinv * pencil_combination(mats, w);
                Ok(mats.iter().map(|a| (&xinv * a * &right).trace()).collect())
            }
            Family::SparseMonomial { .. } => Err(self.capability_error("analytic Hessian")),
        }
    }

    /// Full analytic gradient of `-ln p` at `x`.
    pub fn analytic_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dimension;
        let mut basis = vec![0.0; n];
        let mut g = Vec::with_capacity(n);
        for i in 0..n {
            basis[i] = 1.0;
            g.push(self.analytic_grad_dot(x, &basis)?);
            basis[i] = 0.0;
        }
        Ok(g)
    }

    /// Full analytic Hessian of `-ln p` at `x`, symmetrized.
    pub fn analytic_hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dimension;
        let mut h = DMatrix::zeros(n, n);
        let mut basis = vec![0.0; n];
        for j in 0..n {
            basis[j] = 1.0;
            let col = self.analytic_hess_vec(x, &basis)?;
            basis[j] = 0.0;
            h.set_column(j, &DVector::from_vec(col));
        }
        Ok((&h + h.transpose()) * 0.5)
    }

    /// Hyperbolic eigenvalues of `x` in direction `e` (roots of
    /// `t -> p(t e - x)`), descending, computed from the family structure.
    pub fn analytic_eigenvalues(&self, x: &[f64], e: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        self.check_len(e.len())?;
        let mut vals = match &self.family {
            Family::Product { .. } => {
                if e.contains(&0.0) {
                    return Err(Error::DegenerateDirection("direction has a zero coordinate".into()));
                }
                x.iter().zip(e).map(|(xi, ei)| xi / ei).collect::<Vec<_>>()
            }
            Family::Lorentz { n } => lorentz_eigenvalues(x, e, *n)?,
            Family::Determinant { k } => {
                generalized_sym_eigenvalues(&unpack_symmetric(x, *k), &unpack_symmetric(e, *k))
                    .ok_or_else(|| Error::DegenerateDirection("direction matrix is not positive definite".into()))?
            }
            Family::Pencil { mats } => {
                generalized_sym_eigenvalues(&pencil_combination(mats, x), &pencil_combination(mats, e))
                    .ok_or_else(|| Error::DegenerateDirection("direction pencil is not positive definite".into()))?
            }
            Family::SparseMonomial { .. } => return Err(self.capability_error("analytic eigenvalues")),
        };
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(vals)
    }
}

impl Oracle for HyperbolicPolynomial {
    fn degree(&self) -> usize {
        self.degree
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn eval(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.dimension, "oracle input has wrong length");
        match &self.family {
            Family::Product { .. } => x.iter().product(),
            Family::Lorentz { n } => {
                let last = x[n - 1];
                let rest: Complex64 = x[..n - 1].iter().map(|v| v * v).sum();
                last * last - rest
            }
            Family::Determinant { k } => {
                let k = *k;
                let mut m = vec![Complex64::new(0.0, 0.0); k * k];
                let mut idx = 0;
                for i in 0..k {
                    for j in i..k {
                        m[i * k + j] = x[idx];
                        m[j * k + i] = x[idx];
                        idx += 1;
                    }
                }
                complex_det(m, k)
            }
            Family::Pencil { mats } => {
                let k = mats[0].nrows();
                let mut m = vec![Complex64::new(0.0, 0.0); k * k];
                for (a, xi) in mats.iter().zip(x) {
                    for r in 0..k {
                        for c in 0..k {
                            m[r * k + c] += xi * a[(r, c)];
                        }
                    }
                }
                complex_det(m, k)
            }
            Family::SparseMonomial { terms, .. } => terms
                .iter()
                .map(|t| t.exponents.iter().zip(x).fold(Complex64::new(t.coeff, 0.0), |acc, (&a, xi)| acc * xi.powu(a)))
                .sum(),
        }
    }
}

fn check_product_interior(x: &[f64]) -> Result<()> {
    let scale = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 || x.iter().any(|v| v.abs() <= 1e-15 * scale) {
        return Err(Error::Singularity("product polynomial vanishes at x".into()));
    }
    Ok(())
}

fn lorentz_value(x: &[f64]) -> Result<f64> {
    let n = x.len();
    let rest: f64 = x[..n - 1].iter().map(|v| v * v).sum();
    let p = x[n - 1] * x[n - 1] - rest;
    let scale = x[n - 1] * x[n - 1] + rest;
    if scale == 0.0 || p.abs() <= 1e-14 * scale {
        return Err(Error::Singularity("lorentz polynomial vanishes at x".into()));
    }
    Ok(p)
}

/// `x_1 w_1 + ... + x_{n-1} w_{n-1} - x_n w_n`.
fn lorentz_gamma(x: &[f64], w: &[f64], n: usize) -> f64 {
    x[..n - 1].iter().zip(&w[..n - 1]).map(|(a, b)| a * b).sum::<f64>() - x[n - 1] * w[n - 1]
}

/// Roots of `t -> p(t e - x)` for the Lorentz form, any direction with p(e) > 0.
fn lorentz_eigenvalues(x: &[f64], e: &[f64], n: usize) -> Result<Vec<f64>> {
    let q = |u: &[f64], v: &[f64]| {
        u[n - 1] * v[n - 1] - u[..n - 1].iter().zip(&v[..n - 1]).map(|(a, b)| a * b).sum::<f64>()
    };
    // p(t e - x) = q(e,e) t^2 - 2 q(e,x) t + q(x,x)
    let a = q(e, e);
    if a <= 0.0 {
        return Err(Error::DegenerateDirection("direction is outside the Lorentz cone".into()));
    }
    let b_half = q(e, x);
    let c = q(x, x);
    let disc = (b_half * b_half - a * c).max(0.0);
    let root = disc.sqrt();
    // Stable pair: the larger-magnitude root first, the other via Vieta.
    let (r1, r2) = if b_half >= 0.0 {
        let big = (b_half + root) / a;
        let small = if big != 0.0 { c / (a * big) } else { (b_half - root) / a };
        (big, small)
    } else {
        let big = (b_half - root) / a;
        let small = if big != 0.0 { c / (a * big) } else { (b_half + root) / a };
        (big, small)
    };
    Ok(vec![r1.max(r2), r1.min(r2)])
}

fn inverse_interior(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let singular = || Error::Singularity("matrix polynomial is singular at x".into());
    let inv = m.clone().lu().try_inverse().ok_or_else(singular)?;
    let norm1 = |a: &DMatrix<f64>| a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max);
    let rcond = 1.0 / (norm1(m) * norm1(&inv));
    if !(rcond > f64::EPSILON) {
        return Err(singular());
    }
    Ok(inv)
}

fn pencil_combination(mats: &[DMatrix<f64>], x: &[f64]) -> DMatrix<f64> {
    let k = mats[0].nrows();
    let mut out = DMatrix::zeros(k, k);
    for (a, xi) in mats.iter().zip(x) {
        out += a * *xi;
    }
    out
}

/// Length of the packed representation of a `k x k` symmetric matrix.
pub fn packed_len(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Matrix side `k` with `k(k+1)/2 == len`, if any.
pub fn side_from_packed_len(len: usize) -> Option<usize> {
    let mut k = 0;
    while packed_len(k) < len {
        k += 1;
    }
    (packed_len(k) == len).then_some(k)
}

/// Position of entry `(i, j)` (either order) in the packed vector.
pub fn packed_index(i: usize, j: usize, k: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    r * k - (r * r.saturating_sub(1)) / 2 + c - r
}

/// Unpacks a packed symmetric vector into a full matrix.
pub fn unpack_symmetric(x: &[f64], k: usize) -> DMatrix<f64> {
    debug_assert_eq!(x.len(), packed_len(k));
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            m[(i, j)] = x[idx];
            m[(j, i)] = x[idx];
            idx += 1;
        }
    }
    m
}

/// Packs the upper triangle of `m`, entries unscaled.
pub fn pack_symmetric(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(packed_len(k));
    for i in 0..k {
        for j in i..k {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Packs `m` with off-diagonals doubled, so that the Euclidean dot product
/// with a packed `X` equals `tr(M X)`.
pub fn pack_symmetric_weighted(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(packed_len(k));
    for i in 0..k {
        for j in i..k {
            out.push(if i == j { m[(i, j)] } else { m[(i, j)] + m[(j, i)] });
        }
    }
    out
}

/// Outcome of [`hyperbolicity_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub trials: usize,
    /// Largest `|Im r|` over all roots of all sampled restrictions.
    pub max_imag: f64,
    /// Largest `|Im r| / (1 + |r|)`.
    pub max_relative_imag: f64,
    /// Trials whose restriction could not be formed (degenerate direction).
    pub failed_trials: usize,
    /// Whether any root exceeded the relative tolerance.
    pub flagged: bool,
    pub tolerance: f64,
}

/// Samples random real points and reports how far the restrictions
/// `t -> p(x + t e)` are from having only real roots. Advisory only.
pub fn hyperbolicity_probe<O: Oracle + ?Sized>(
    p: &O,
    direction: &[f64],
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dimension();
    let mut report =
        ProbeReport { trials, max_imag: 0.0, max_relative_imag: 0.0, failed_trials: 0, flagged: false, tolerance };
    for _ in 0..trials {
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        match univariate::restrict(p, &x, direction).and_then(|r| univariate::restriction_roots(&r)) {
            Ok(roots) => {
                for r in roots {
                    report.max_imag = report.max_imag.max(r.im.abs());
                    report.max_relative_imag = report.max_relative_imag.max(r.im.abs() / (1.0 + r.norm()));
                }
            }
            Err(_) => report.failed_trials += 1,
        }
    }
    report.flagged = report.max_relative_imag > tolerance;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::complexify;

    fn c(v: &[f64]) -> Vec<Complex64> {
        complexify(v)
    }

    #[test]
    fn evaluate_examples() {
        let p = HyperbolicPolynomial::product(3);
        assert_eq!(p.evaluate(&c(&[1.0, 2.0, 3.0])).unwrap().re, 6.0);
        let l = HyperbolicPolynomial::lorentz(3);
        assert_eq!(l.evaluate(&c(&[3.0, 4.0, 10.0])).unwrap().re, 75.0);
        let d = HyperbolicPolynomial::determinant(2);
        assert_eq!(d.evaluate(&c(&[1.0, 0.0, 1.0])).unwrap().re, 1.0);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let p = HyperbolicPolynomial::product(3);
        assert!(matches!(p.evaluate(&c(&[1.0, 2.0])), Err(Error::Input(_))));
    }

    #[test]
    fn analytic_gradient_examples() {
        let p = HyperbolicPolynomial::product(2);
        assert_eq!(p.analytic_grad_dot(&[1.0, 2.0], &[1.0, 1.0]).unwrap(), -1.5);
        let d = HyperbolicPolynomial::determinant(2);
        assert!((d.analytic_grad_dot(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]).unwrap() + 2.0).abs() < 1e-15);
        let l = HyperbolicPolynomial::lorentz(3);
        assert!((l.analytic_grad_dot(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_hessian_examples() {
        let p = HyperbolicPolynomial::product(2);
        assert_eq!(p.analytic_hess_vec(&[1.0, 2.0], &[1.0, 1.0]).unwrap(), vec![1.0, 0.25]);

        // At X = I the Hessian map sends W to W, represented with the
        // trace-inner-product weights.
        let d = HyperbolicPolynomial::determinant(2);
        let w = [0.3, -0.7, 2.0];
        let hw = d.analytic_hess_vec(&[1.0, 0.0, 1.0], &w).unwrap();
        assert!((hw[0] - 0.3).abs() < 1e-14);
        assert!((hw[1] + 1.4).abs() < 1e-14);
        assert!((hw[2] - 2.0).abs() < 1e-14);

        let pencil = PolynomialSpec::pencil(vec![DMatrix::identity(2, 2)], vec![1.0]).build().unwrap();
        assert!((pencil.analytic_hess_vec(&[1.0], &[1.0]).unwrap()[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lorentz_hessian_satisfies_euler_identity() {
        let l = HyperbolicPolynomial::lorentz(4);
        let x = [0.3, -0.2, 0.1, 1.5];
        let hx = l.analytic_hess_vec(&x, &x).unwrap();
        let g = l.analytic_gradient(&x).unwrap();
        for (a, b) in hx.iter().zip(&g) {
            assert!((a + b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn sparse_monomial_has_no_analytic_path() {
        let spec =
            PolynomialSpec::sparse_monomial(vec![MonomialTerm { coeff: 1.0, exponents: vec![1, 1] }], vec![1.0, 1.0]);
        let p = spec.build().unwrap();
        assert!(matches!(p.analytic_grad_dot(&[1.0, 1.0], &[1.0, 0.0]), Err(Error::Capability(_))));
    }

    #[test]
    fn inhomogeneous_monomials_rejected() {
        let spec = PolynomialSpec::sparse_monomial(
            vec![
                MonomialTerm { coeff: 1.0, exponents: vec![2, 0] },
                MonomialTerm { coeff: 1.0, exponents: vec![1, 0] },
            ],
            vec![1.0, 0.0],
        );
        assert!(matches!(spec.build(), Err(Error::Input(_))));
    }

    #[test]
    fn boundary_point_is_singular() {
        let p = HyperbolicPolynomial::product(2);
        assert!(matches!(p.analytic_grad_dot(&[0.0, 1.0], &[1.0, 1.0]), Err(Error::Singularity(_))));
        let l = HyperbolicPolynomial::lorentz(3);
        assert!(matches!(l.analytic_hess_vec(&[3.0, 4.0, 5.0], &[1.0, 0.0, 0.0]), Err(Error::Singularity(_))));
    }

    #[test]
    fn packing_round_trip_and_index() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let packed = pack_symmetric(&m);
        assert_eq!(packed, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unpack_symmetric(&packed, 3), m);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(packed[packed_index(i, j, 3)], m[(i, j)]);
            }
        }
        assert_eq!(side_from_packed_len(6), Some(3));
        assert_eq!(side_from_packed_len(5), None);
    }

    #[test]
    fn pencil_direction_validated() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let spec = PolynomialSpec::pencil(vec![a], vec![1.0]);
        assert!(spec.build().is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec = PolynomialSpec::product(3);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"product","n":3}"#);
        let back: PolynomialSpec = serde_json::from_str(r#"{"kind":"lorentz","n":4}"#).unwrap();
        assert_eq!(back, PolynomialSpec::lorentz(4));
    }

    #[test]
    fn probe_flags_sum_of_squares() {
        let spec = PolynomialSpec::sparse_monomial(
            vec![
                MonomialTerm { coeff: 1.0, exponents: vec![2, 0] },
                MonomialTerm { coeff: 1.0, exponents: vec![0, 2] },
            ],
            vec![1.0, 0.0],
        );
        let p = spec.build().unwrap();
        let report = hyperbolicity_probe(&p, p.direction(), 20, 7, 1e-7);
        assert!(report.flagged);

        for seed in [1, 2, 3] {
            let prod = HyperbolicPolynomial::product(4);
            let r = hyperbolicity_probe(&prod, prod.direction(), 20, seed, 1e-7);
            assert!(r.max_imag <= 1e-8, "{r:?}");
            let lor = HyperbolicPolynomial::lorentz(5);
            let r = hyperbolicity_probe(&lor, lor.direction(), 20, seed, 1e-7);
            assert!(r.max_imag <= 1e-8, "{r:?}");
        }
    }
}
