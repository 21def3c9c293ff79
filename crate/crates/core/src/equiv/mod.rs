//! Product conjugacy, product similarity and product unitary equivalence of
//! relation permutations.
//!
//! For grid permutations `theta`, `tau` on an `n x m` grid the question is
//! whether `pi(theta) (A ⊗ B) = (A ⊗ B) pi(tau)` has a solution with `A`, `B`
//! unitary. Entrywise, with `K = A ⊗ B`, this reads `K[x][y] = K[theta x][tau y]`.

mod rank1;
mod replay;
mod tensor;

pub use rank1::{rank1_families, rank1_orbit_analysis, FamilyKind, Rank1Family, Rank1Report, RANK1_CELL_LIMIT};
pub use replay::{rank1_grid_search, replay_verdict, unitary_intertwiner_search, NumericSearch, ReplayOutcome};
pub use tensor::{
    analyze_tensor_system, orbit_parametrization, search_sign_pattern, GaussianWitness, OrbitParametrization,
    SupportComponent, TensorAnalysis, SIGN_SEARCH_LIMIT, TENSOR_REALIGNED_LIMIT,
};

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::nullspace;
use crate::perm::{embed_product, product_group, GridPermutation, GridShape, PermError, Permutation};
use crate::semigroup::{multiply, NormalWord, RelationSet, SemigroupError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EquivError {
    #[error("shape mismatch: {0} vs {1}")]
    ShapeMismatch(GridShape, GridShape),
    #[error("unsupported input: {0}")]
    UnsupportedShape(String),
    #[error("tensor system too large: {cells} cells, {vars} orbit variables")]
    TensorSystemTooLarge { cells: usize, vars: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    MatrixSize { expected: usize, rows: usize, cols: usize },
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
}

fn same_shape(theta: &GridPermutation, tau: &GridPermutation) -> Result<GridShape, EquivError> {
    if theta.shape() != tau.shape() {
        return Err(EquivError::ShapeMismatch(theta.shape(), tau.shape()));
    }
    Ok(theta.shape())
}

/// First `(sigma, rho)` in lexicographic order with
/// `embed(sigma, rho) tau embed(sigma, rho)^-1 = theta`.
pub fn product_conjugate(
    theta: &GridPermutation,
    tau: &GridPermutation,
) -> Result<Option<(Permutation, Permutation)>, EquivError> {
    let shape = same_shape(theta, tau)?;
    if theta.cycle_type() != tau.cycle_type() {
        return Ok(None);
    }
    Ok(product_group(shape)?
        .into_iter()
        .find(|(_, _, g)| &tau.conjugate_by(g) == theta)
        .map(|(s, r, _)| (s, r)))
}

/// The space `{X : pi(theta) X = X pi(tau)}` of `nm x nm` rational matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct IntertwinerSpace {
    pub size: usize,
    pub basis: Vec<Vec<Vec<BigRational>>>,
}

impl IntertwinerSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Exact check of the intertwining identity on every basis element.
    pub fn verify(&self, theta: &GridPermutation, tau: &GridPermutation) -> bool {
        let (t, s) = (theta.perm(), tau.perm());
        self.basis.iter().all(|x| {
            (0..self.size).all(|a| (0..self.size).all(|b| x[a][b] == x[t.apply(a)][s.apply(b)]))
        })
    }
}

pub fn intertwiner_space(theta: &GridPermutation, tau: &GridPermutation) -> Result<IntertwinerSpace, EquivError> {
    let shape = same_shape(theta, tau)?;
    let size = shape.cells();
    let (t, s) = (theta.perm(), tau.perm());
    let unknowns = size * size;
    let mut rows = Vec::with_capacity(unknowns);
    for a in 0..size {
        for b in 0..size {
            let (a2, b2) = (t.apply(a), s.apply(b));
            if (a2, b2) == (a, b) {
                continue;
            }
            let mut row = vec![BigRational::zero(); unknowns];
            row[a * size + b] = BigRational::one();
            row[a2 * size + b2] = -BigRational::one();
            rows.push(row);
        }
    }
    let basis = nullspace(&rows, unknowns)
        .into_iter()
        .map(|v| v.chunks(size).map(<[BigRational]>::to_vec).collect())
        .collect();
    Ok(IntertwinerSpace { size, basis })
}

/// `sum over cycles c of theta, c' of tau of gcd(|c|, |c'|)`.
pub fn intertwiner_dimension_formula(theta: &Permutation, tau: &Permutation) -> usize {
    let a = theta.cycle_type();
    let b = tau.cycle_type();
    a.parts()
        .iter()
        .map(|x| b.parts().iter().map(|y| x.gcd(y)).sum::<usize>())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Equivalent,
    NotEquivalent,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Equivalent => "equivalent",
            Status::NotEquivalent => "not_equivalent",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    ProductConjugacy,
    CycleType,
    Rank1Orbit,
    TensorSystem,
    SignPattern,
    NumericUnitary,
    Undecided,
}

/// Which of the two permutations a one-sided obstruction refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Theta,
    Tau,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub filter: Filter,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Permutations { sigma: Permutation, rho: Permutation },
    Gaussian(GaussianWitness),
    Numeric {
        a: DMatrix<Complex64>,
        b: DMatrix<Complex64>,
        residual: f64,
    },
}

fn intertwining_residual(theta: &GridPermutation, tau: &GridPermutation, k: &DMatrix<Complex64>) -> f64 {
    let (t, s) = (theta.perm(), tau.perm());
    let cells = theta.shape().cells();
    let mut sum = 0.0;
    for x in 0..cells {
        for y in 0..cells {
            sum += (k[(x, y)] - k[(t.apply(x), s.apply(y))]).norm_sqr();
        }
    }
    sum.sqrt()
}

fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    (u * u.adjoint() - DMatrix::identity(u.nrows(), u.nrows())).norm()
}

fn permutation_matrix(p: &Permutation) -> DMatrix<Complex64> {
    let k = p.size();
    DMatrix::from_fn(k, k, |i, j| {
        if p.apply(j) == i {
            Complex64::one()
        } else {
            Complex64::zero()
        }
    })
}

impl Witness {
    /// The unitaries `(A, B)`.
    pub fn matrices(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        match self {
            Witness::Permutations { sigma, rho } => (permutation_matrix(sigma), permutation_matrix(rho)),
            Witness::Gaussian(w) => w.unitaries(),
            Witness::Numeric { a, b, .. } => (a.clone(), b.clone()),
        }
    }

    /// Verification of the intertwining identity and unitarity: exact for
    /// permutation and Gaussian witnesses, to `NUMERIC_WITNESS_TOL` otherwise.
    pub fn verify(&self, theta: &GridPermutation, tau: &GridPermutation) -> bool {
        match self {
            Witness::Permutations { sigma, rho } => {
                sigma.size() == theta.shape().n
                    && rho.size() == theta.shape().m
                    && &tau.conjugate_by(&embed_product(sigma, rho)) == theta
            }
            Witness::Gaussian(w) => w.verify(theta, tau),
            Witness::Numeric { a, b, .. } => {
                let shape = theta.shape();
                a.shape() == (shape.n, shape.n)
                    && b.shape() == (shape.m, shape.m)
                    && unitarity_defect(a) <= NUMERIC_WITNESS_TOL
                    && unitarity_defect(b) <= NUMERIC_WITNESS_TOL
                    && intertwining_residual(theta, tau, &a.kronecker(b)) <= NUMERIC_WITNESS_TOL
            }
        }
    }

    fn to_json_value(&self) -> Value {
        match self {
            Witness::Permutations { sigma, rho } => json!({
                "kind": "permutation",
                "sigma": sigma.to_string(),
                "rho": rho.to_string(),
            }),
            Witness::Gaussian(w) => w.to_json_value(),
            Witness::Numeric { a, b, residual } => {
                let rows = |m: &DMatrix<Complex64>| -> Value {
                    (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect::<Vec<_>>())
                        .collect::<Vec<_>>()
                        .into()
                };
                json!({"kind": "numeric", "a": rows(a), "b": rows(b), "residual": residual})
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceVerdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub certificate: Option<Certificate>,
}

impl EquivalenceVerdict {
    fn equivalent(witness: Witness, filter: Filter, detail: impl Into<String>) -> Self {
        EquivalenceVerdict {
            status: Status::Equivalent,
            witness: Some(witness),
            certificate: Some(Certificate {
                filter,
                side: None,
                detail: detail.into(),
            }),
        }
    }

    fn not_equivalent(filter: Filter, side: Option<Side>, detail: impl Into<String>) -> Self {
        EquivalenceVerdict {
            status: Status::NotEquivalent,
            witness: None,
            certificate: Some(Certificate {
                filter,
                side,
                detail: detail.into(),
            }),
        }
    }

    fn unknown(detail: impl Into<String>) -> Self {
        EquivalenceVerdict {
            status: Status::Unknown,
            witness: None,
            certificate: Some(Certificate {
                filter: Filter::Undecided,
                side: None,
                detail: detail.into(),
            }),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("status".into(), json!(self.status));
        if let Some(c) = &self.certificate {
            obj.insert("certificate".into(), json!(c));
        }
        if let Some(w) = &self.witness {
            obj.insert("witness".into(), w.to_json_value());
        }
        Value::Object(obj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("verdict serializes")
    }
}

/// Product conjugacy alone, as a verdict.
pub fn decide_product_conjugacy(
    theta: &GridPermutation,
    tau: &GridPermutation,
) -> Result<EquivalenceVerdict, EquivError> {
    let shape = same_shape(theta, tau)?;
    Ok(match product_conjugate(theta, tau)? {
        Some((sigma, rho)) => EquivalenceVerdict::equivalent(
            Witness::Permutations { sigma, rho },
            Filter::ProductConjugacy,
            "conjugator in the product subgroup",
        ),
        None if theta.cycle_type() != tau.cycle_type() => EquivalenceVerdict::not_equivalent(
            Filter::CycleType,
            None,
            format!("cycle types {} and {} differ", theta.cycle_type(), tau.cycle_type()),
        ),
        None => EquivalenceVerdict::not_equivalent(
            Filter::ProductConjugacy,
            None,
            format!("exhaustive search over all {} conjugators", shape.product_group_order()),
        ),
    })
}

/// Decision pipeline for product unitary equivalence.
///
/// Runs product conjugacy, cycle type, the rank-one orbit filter on both
/// sides, and finally the exact analysis of elementary-tensor intertwiners
/// followed by a search for unitary sign patterns. Anything left over is
/// reported as `Unknown`.
pub fn decide_product_unitary_equivalence(
    theta: &GridPermutation,
    tau: &GridPermutation,
) -> Result<EquivalenceVerdict, EquivError> {
    let shape = same_shape(theta, tau)?;
    if let Some((sigma, rho)) = product_conjugate(theta, tau)? {
        return Ok(EquivalenceVerdict::equivalent(
            Witness::Permutations { sigma, rho },
            Filter::ProductConjugacy,
            "conjugator in the product subgroup",
        ));
    }
    if theta.cycle_type() != tau.cycle_type() {
        return Ok(EquivalenceVerdict::not_equivalent(
            Filter::CycleType,
            None,
            format!("cycle types {} and {} differ", theta.cycle_type(), tau.cycle_type()),
        ));
    }
    if shape.cells() <= RANK1_CELL_LIMIT {
        for (side, g) in [(Side::Theta, theta), (Side::Tau, tau)] {
            let report = rank1_families(g)?;
            if !report.has_admissible() {
                return Ok(EquivalenceVerdict::not_equivalent(
                    Filter::Rank1Orbit,
                    Some(side),
                    format!(
                        "no admissible rank-one matrix C keeps rank one along the orbit of {g}; \
                         a non-monomial unitary intertwiner would need one on both sides"
                    ),
                ));
            }
        }
    }
    let analysis = match analyze_tensor_system(theta, tau) {
        Ok(a) => a,
        Err(EquivError::TensorSystemTooLarge { cells, vars }) => {
            return Ok(EquivalenceVerdict::unknown(format!(
                "tensor system with {cells} cells and {vars} orbit variables is beyond the exact search"
            )))
        }
        Err(e) => return Err(e),
    };
    if !analysis.product_similar() {
        return Ok(EquivalenceVerdict::not_equivalent(
            Filter::TensorSystem,
            None,
            format!(
                "elementary-tensor intertwiners fall into {} support patterns over {} orbit variables; \
                 the determinant vanishes identically on each",
                analysis.components.len(),
                analysis.n_vars
            ),
        ));
    }
    if let Some(w) = search_sign_pattern(theta, tau, &analysis) {
        return Ok(EquivalenceVerdict::equivalent(
            Witness::Gaussian(w),
            Filter::SignPattern,
            "unitary intertwiner with entries in {0, ±1, ±i} up to scale",
        ));
    }
    let search = unitary_intertwiner_search(theta, tau, NUMERIC_RESTARTS, NUMERIC_ITERATIONS, NUMERIC_SEED);
    let witness = Witness::Numeric {
        residual: search.best_residual,
        a: search.a,
        b: search.b,
    };
    if witness.verify(theta, tau) {
        return Ok(EquivalenceVerdict::equivalent(
            witness,
            Filter::NumericUnitary,
            format!("floating-point unitaries with residual {:.1e}", search.best_residual),
        ));
    }
    Ok(EquivalenceVerdict::unknown(format!(
        "product similar via invertible elementary tensors; no exact sign pattern, \
         and numerical search stalls at residual {:.1e}",
        search.best_residual
    )))
}

/// Residual bound for floating-point witnesses.
pub const NUMERIC_WITNESS_TOL: f64 = 1e-10;
const NUMERIC_RESTARTS: usize = 16;
const NUMERIC_ITERATIONS: usize = 500;
const NUMERIC_SEED: u64 = 0x006b_6774;

/// Verdicts for all unordered pairs `i < j` of the given representatives.
pub fn decide_catalog_pairs(
    reps: &[GridPermutation],
) -> Result<Vec<(usize, usize, EquivalenceVerdict)>, EquivError> {
    let pairs: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (i + 1..reps.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| decide_product_unitary_equivalence(&reps[i], &reps[j]).map(|v| (i, j, v)))
        .collect()
}

const ISO_TOL: f64 = 1e-9;

fn check_square(a: &DMatrix<Complex64>, k: usize) -> Result<(), EquivError> {
    if a.nrows() != k || a.ncols() != k {
        return Err(EquivError::MatrixSize {
            expected: k,
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.determinant().norm() < 1e-12 {
        return Err(EquivError::SingularMatrix);
    }
    Ok(())
}

type Expansion = BTreeMap<NormalWord, Complex64>;

/// Image of a normal word of the `theta` semigroup under `e_i -> sum_j a_ij e_j`,
/// `f_i -> sum_j b_ij f_j`, expanded in normal words of the `tau` semigroup.
fn phi_word(
    w: &NormalWord,
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    target: &RelationSet,
) -> Result<Expansion, EquivError> {
    let mut acc: Expansion = BTreeMap::new();
    acc.insert(NormalWord::unit(2), Complex64::one());
    for letter in w.letters() {
        let m = if letter.class == 0 { a } else { b };
        let mut next: Expansion = BTreeMap::new();
        for (word, c) in &acc {
            for j in 0..m.ncols() {
                let coeff = m[(letter.index, j)];
                if coeff.norm() < ISO_TOL {
                    continue;
                }
                let mut blocks = vec![Vec::new(), Vec::new()];
                blocks[letter.class].push(j);
                let img = multiply(target, word, &NormalWord::from_blocks(blocks))?;
                *next.entry(img).or_insert_with(Complex64::zero) += c * coeff;
            }
        }
        acc = next;
    }
    Ok(acc)
}

fn product_expansion(x: &Expansion, y: &Expansion, target: &RelationSet) -> Result<Expansion, EquivError> {
    let mut out: Expansion = BTreeMap::new();
    for (u, cu) in x {
        for (v, cv) in y {
            *out.entry(multiply(target, u, v)?).or_insert_with(Complex64::zero) += cu * cv;
        }
    }
    Ok(out)
}

fn expansions_agree(x: &Expansion, y: &Expansion) -> bool {
    let zero = Complex64::zero();
    x.keys()
        .chain(y.keys())
        .all(|k| (x.get(k).unwrap_or(&zero) - y.get(k).unwrap_or(&zero)).norm() < ISO_TOL)
}

fn words_up_to(shape: GridShape, max_len: usize) -> Vec<NormalWord> {
    let mut out = Vec::new();
    for total in 1..=max_len {
        for e_len in 0..=total {
            let f_len = total - e_len;
            let e_words = sequences(shape.n, e_len);
            let f_words = sequences(shape.m, f_len);
            for e in &e_words {
                for f in &f_words {
                    out.push(NormalWord::from_blocks(vec![e.clone(), f.clone()]));
                }
            }
        }
    }
    out
}

fn sequences(alphabet: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..alphabet).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Checks that `(A, B)` induces a graded isomorphism from the `theta`
/// semigroup algebra onto the `tau` one.
///
/// Verifies the tensor identity `pi(theta)(A ⊗ B) = (A ⊗ B) pi(tau)` and,
/// separately, that the induced map on words is multiplicative for all pairs
/// of words of total length at most `max_len`.
pub fn check_bigraded_iso(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    theta: &GridPermutation,
    tau: &GridPermutation,
    max_len: usize,
) -> Result<bool, EquivError> {
    let shape = same_shape(theta, tau)?;
    check_square(a, shape.n)?;
    check_square(b, shape.m)?;
    let k = a.kronecker(b);
    let (t, s) = (theta.perm(), tau.perm());
    let cells = shape.cells();
    let tensor_ok = (0..cells)
        .all(|x| (0..cells).all(|y| (k[(x, y)] - k[(t.apply(x), s.apply(y))]).norm() < ISO_TOL));

    let source = RelationSet::from_grid(theta);
    let target = RelationSet::from_grid(tau);
    let words = words_up_to(shape, max_len.saturating_sub(1));
    let mut images = BTreeMap::new();
    for w in &words {
        images.insert(w.clone(), phi_word(w, a, b, &target)?);
    }
    let mut words_ok = true;
    'outer: for u in &words {
        for v in &words {
            if u.total_degree() + v.total_degree() > max_len {
                continue;
            }
            let uv = multiply(&source, u, v)?;
            let lhs = phi_word(&uv, a, b, &target)?;
            let rhs = product_expansion(&images[u], &images[v], &target)?;
            if !expansions_agree(&lhs, &rhs) {
                words_ok = false;
                break 'outer;
            }
        }
    }
    Ok(tensor_ok && words_ok)
}
