//! Truncated Fock space of a single-vertex higher-rank graph semigroup.
//!
//! The basis consists of normal words of total degree at most `N`, ordered by
//! total degree and then lexicographically by blocks; index 0 is the vacuum.
//! Shift operators send words pushed past degree `N` to zero, so identities
//! between them are only checked on the degrees where truncation cannot
//! interfere.

mod fourier;
mod intertwine;
mod omega;

pub use fourier::{cesaro_sum, fourier_coefficients, fourier_sum, word_operator, FourierCoefficients};
pub use intertwine::{check_graded_intertwining, check_left_right_duality, graded_unitary, phi_expand};
pub use omega::{
    character_eval, character_of_operator, check_adjoint_eigenrelation, omega_norm_closed_form, omega_norm_partial, omega_vector,
    sample_gelfand_point, vector_to_json, GelfandPoint,
};

use std::collections::HashMap;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::diagram::DiagramError;
use crate::semigroup::{multiply_letter, Letter, NormalWord, RelationSet, SemigroupError};
use crate::sparse::SparseMat;

pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FockError {
    #[error("truncated basis would have {size} words, above the cap of {cap}")]
    TruncationTooLarge { size: u128, cap: usize },
    #[error("point is not on the variety of the relations")]
    NotInVariety,
    #[error("block {block} has squared norm {norm_sq}, not inside the open unit ball")]
    NotInOpenBall { block: usize, norm_sq: f64 },
    #[error("Cesaro order must be between 1 and the truncation degree {max}, got {n}")]
    InvalidCesaroOrder { n: usize, max: usize },
    #[error("operator has shape {rows}x{cols}, expected {expected}x{expected}")]
    OperatorShape { rows: usize, cols: usize, expected: usize },
    #[error("coefficient matrices do not match the generator multiplicities")]
    MatrixShape,
    #[error("relation sets have different multiplicities")]
    MultiplicityMismatch,
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Clone, Debug)]
pub struct TruncatedFock {
    rel: RelationSet,
    degree: usize,
    words: Vec<NormalWord>,
    index: HashMap<NormalWord, usize>,
    grading: Vec<Range<usize>>,
}

/// `sum over |d| <= N of prod n_i^{d_i}`.
pub fn basis_size(multiplicities: &[usize], n: usize) -> u128 {
    // by_degree[t] = number of words of total degree t
    let mut by_degree = vec![0u128; n + 1];
    by_degree[0] = 1;
    for &k in multiplicities {
        let mut next = vec![0u128; n + 1];
        for (t, &c) in by_degree.iter().enumerate() {
            let mut pow = 1u128;
            for extra in 0..=n - t {
                next[t + extra] = next[t + extra].saturating_add(c.saturating_mul(pow));
                pow = pow.saturating_mul(k as u128);
            }
        }
        by_degree = next;
    }
    by_degree.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

pub fn build_fock(rel: &RelationSet, n: usize) -> Result<TruncatedFock, FockError> {
    build_fock_with_cap(rel, n, DEFAULT_BASIS_CAP)
}

pub fn build_fock_with_cap(rel: &RelationSet, n: usize, cap: usize) -> Result<TruncatedFock, FockError> {
    let size = basis_size(rel.multiplicities(), n);
    if size > cap as u128 {
        return Err(FockError::TruncationTooLarge { size, cap });
    }
    if rel.rank() > 2 && !rel.is_certified() {
        return Err(SemigroupError::UncheckedHigherRankRelations.into());
    }
    let mut words = Vec::with_capacity(size as usize);
    let mut grading = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let start = words.len();
        let mut layer = Vec::new();
        words_of_degree(rel.multiplicities(), d, &mut Vec::new(), &mut layer);
        layer.sort();
        words.extend(layer);
        grading.push(start..words.len());
    }
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Ok(TruncatedFock {
        rel: rel.clone(),
        degree: n,
        words,
        index,
        grading,
    })
}

fn words_of_degree(mult: &[usize], remaining: usize, prefix: &mut Vec<Vec<usize>>, out: &mut Vec<NormalWord>) {
    let class = prefix.len();
    if class == mult.len() {
        if remaining == 0 {
            out.push(NormalWord::from_blocks(prefix.clone()));
        }
        return;
    }
    let last = class + 1 == mult.len();
    let lens: Vec<usize> = if last { vec![remaining] } else { (0..=remaining).collect() };
    for len in lens {
        for block in sequences(mult[class], len) {
            prefix.push(block);
            words_of_degree(mult, remaining - len, prefix, out);
            prefix.pop();
        }
    }
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

impl TruncatedFock {
    pub fn rel(&self) -> &RelationSet {
        &self.rel
    }

    /// The truncation degree `N`.
    pub fn truncation(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: usize) -> &NormalWord {
        &self.words[i]
    }

    pub fn words(&self) -> &[NormalWord] {
        &self.words
    }

    pub fn index_of(&self, w: &NormalWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Basis indices of total degree `d`.
    pub fn degree_range(&self, d: usize) -> Range<usize> {
        self.grading.get(d).cloned().unwrap_or(self.words.len()..self.words.len())
    }

    /// Basis indices of total degree at most `d`.
    pub fn up_to_degree(&self, d: usize) -> Range<usize> {
        0..self.degree_range(d.min(self.degree)).end
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    /// Orthogonal projection onto degree `d`.
    pub fn degree_projection(&self, d: usize) -> SparseMat<i64> {
        let range = self.degree_range(d);
        let map: Vec<Option<usize>> = (0..self.len()).map(|i| range.contains(&i).then_some(i)).collect();
        SparseMat::from_column_map(self.len(), &map)
    }

    fn shift_images(&self, side: ShiftSide, letter: Letter) -> Vec<Option<usize>> {
        self.words
            .iter()
            .map(|w| {
                if w.total_degree() >= self.degree {
                    return None;
                }
                let img = multiply_letter(&self.rel, w, letter, side == ShiftSide::Left);
                self.index_of(&img)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSide {
    Left,
    Right,
}

/// `L_g` (left) or `R_g` (right) on the truncated space, as a 0/1 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    pub side: ShiftSide,
    pub letter: Letter,
    images: Vec<Option<usize>>,
    pub matrix: SparseMat<i64>,
}

impl GeneratorMatrix {
    /// Basis index of the image of basis vector `col`, if it survives truncation.
    pub fn image(&self, col: usize) -> Option<usize> {
        self.images[col]
    }

    pub fn to_scalar<T: crate::scalar::Scalar>(&self) -> SparseMat<T> {
        SparseMat::from_column_map(self.matrix.nrows(), &self.images)
    }
}

pub fn generator_matrix(f: &TruncatedFock, side: ShiftSide, letter: Letter) -> Result<GeneratorMatrix, FockError> {
    let mult = f.rel.multiplicities();
    if letter.class >= mult.len() || letter.index >= mult[letter.class] {
        return Err(SemigroupError::LetterOutOfRange(letter.to_string()).into());
    }
    let images = f.shift_images(side, letter);
    let matrix = SparseMat::from_column_map(f.len(), &images);
    Ok(GeneratorMatrix {
        side,
        letter,
        images,
        matrix,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckFamily {
    /// `L_{g_i[p]} L_{g_j[q]} = L_{g_j[q']} L_{g_i[p']}`.
    Relations,
    /// Left and right shifts commute.
    Commutation,
    /// `E_{d+1} R_g = R_g E_d`.
    Grading,
    /// `L_g^* L_g = I` and `R_g^* R_g = I` below the top degree.
    Isometry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub family: CheckFamily,
    pub detail: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelationReport {
    pub identities_checked: usize,
    pub violations: Vec<Violation>,
}

impl RelationReport {
    pub fn all_passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passed(&self, family: CheckFamily) -> bool {
        self.violations.iter().all(|v| v.family != family)
    }
}

pub fn verify_relations(f: &TruncatedFock) -> RelationReport {
    verify_relations_with(f, &f.rel).expect("a Fock space matches its own relations")
}

/// Like [`verify_relations`], but the relation identities are taken from
/// `expected` instead of the relations the space was built from.
pub fn verify_relations_with(f: &TruncatedFock, expected: &RelationSet) -> Result<RelationReport, FockError> {
    if expected.multiplicities() != f.rel.multiplicities() {
        return Err(FockError::MultiplicityMismatch);
    }
    let alphabet = f.rel.alphabet();
    let left: HashMap<Letter, GeneratorMatrix> = alphabet
        .iter()
        .map(|&g| Ok((g, generator_matrix(f, ShiftSide::Left, g)?)))
        .collect::<Result<_, FockError>>()?;
    let right: HashMap<Letter, GeneratorMatrix> = alphabet
        .iter()
        .map(|&g| Ok((g, generator_matrix(f, ShiftSide::Right, g)?)))
        .collect::<Result<_, FockError>>()?;
    let n = f.degree;
    let low = f.up_to_degree(n.saturating_sub(2));
    let below_top = f.up_to_degree(n.saturating_sub(1));
    let mut report = RelationReport::default();
    let record = |report: &mut RelationReport, family, detail: String, col: Option<usize>| {
        report.identities_checked += 1;
        if let Some(c) = col {
            report.violations.push(Violation {
                family,
                detail,
                witness: f.words[c].to_string(),
            });
        }
    };

    let mult = expected.multiplicities();
    for ((i, j), perm) in expected.relations() {
        let nj = mult[j];
        for cell in 0..perm.size() {
            let img = perm.apply(cell);
            let (p, q) = (Letter::new(i, cell / nj), Letter::new(j, cell % nj));
            let (p2, q2) = (Letter::new(i, img / nj), Letter::new(j, img % nj));
            let lhs = left[&p].matrix.mul(&left[&q].matrix);
            let rhs = left[&q2].matrix.mul(&left[&p2].matrix);
            let bad = if n >= 2 { lhs.first_column_mismatch(&rhs, low.clone(), 0.0) } else { None };
            record(
                &mut report,
                CheckFamily::Relations,
                format!("relation ({},{}): {p}{q} = {q2}{p2}", i + 1, j + 1),
                bad,
            );
        }
    }

    for &g in &alphabet {
        for &h in &alphabet {
            let lr = left[&g].matrix.mul(&right[&h].matrix);
            let rl = right[&h].matrix.mul(&left[&g].matrix);
            let bad = if n >= 2 { lr.first_column_mismatch(&rl, low.clone(), 0.0) } else { None };
            record(&mut report, CheckFamily::Commutation, format!("L_{g} R_{h} = R_{h} L_{g}"), bad);
        }
    }

    for &g in &alphabet {
        let r = &right[&g].matrix;
        for d in 0..n {
            let lhs = f.degree_projection(d + 1).mul(r);
            let rhs = r.mul(&f.degree_projection(d));
            let bad = lhs.first_column_mismatch(&rhs, 0..f.len(), 0.0);
            record(&mut report, CheckFamily::Grading, format!("E_{} R_{g} = R_{g} E_{d}", d + 1), bad);
        }
    }

    let identity = SparseMat::<i64>::identity(f.len());
    for &g in &alphabet {
        for (name, m) in [("L", &left[&g].matrix), ("R", &right[&g].matrix)] {
            let gram = m.adjoint().mul(m);
            let bad = gram.first_column_mismatch(&identity, below_top.clone(), 0.0);
            record(&mut report, CheckFamily::Isometry, format!("{name}_{g}* {name}_{g} = I"), bad);
        }
    }
    Ok(report)
}
