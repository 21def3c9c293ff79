use super::{generator_matrix, FockError, ShiftSide, TruncatedFock};
use crate::scalar::Scalar;
use crate::semigroup::{normal_form, opposite, Letter, NormalWord, RelationSet, Word};
use crate::sparse::SparseMat;

fn check_mats<T>(f: &TruncatedFock, mats: &[Vec<Vec<T>>]) -> Result<(), FockError> {
    let mult = f.rel().multiplicities();
    let ok = mats.len() == mult.len()
        && mats
            .iter()
            .zip(mult)
            .all(|(m, &n)| m.len() == n && m.iter().all(|row| row.len() == n));
    if ok {
        Ok(())
    } else {
        Err(FockError::MatrixShape)
    }
}

/// Image of `w` under the graded map `g_i[p] ↦ Σ_k M_i[p][k] g_i[k]`.
///
/// Blocks stay in class order, so every term is already a normal word.
pub fn phi_expand<T: Scalar>(mats: &[Vec<Vec<T>>], w: &NormalWord) -> Vec<(NormalWord, T)> {
    let mut terms: Vec<(Vec<Vec<usize>>, T)> = vec![(Vec::new(), T::one())];
    for (class, block) in w.blocks().iter().enumerate() {
        let m = &mats[class];
        let mut partial: Vec<(Vec<usize>, T)> = vec![(Vec::new(), T::one())];
        for &p in block {
            let mut next = Vec::new();
            for (prefix, c) in &partial {
                for (k, entry) in m[p].iter().enumerate() {
                    if entry.is_zero() {
                        continue;
                    }
                    let mut word = prefix.clone();
                    word.push(k);
                    next.push((word, c.clone() * entry.clone()));
                }
            }
            partial = next;
        }
        terms = terms
            .into_iter()
            .flat_map(|(blocks, c)| {
                partial.iter().map(move |(b, d)| {
                    let mut blocks = blocks.clone();
                    blocks.push(b.clone());
                    (blocks, c.clone() * d.clone())
                })
            })
            .collect();
    }
    terms
        .into_iter()
        .map(|(blocks, c)| (NormalWord::from_blocks(blocks), c))
        .collect()
}

/// `U = ⊕_d M_1^{⊗d_1} ⊗ ... ⊗ M_r^{⊗d_r}` from `src` to `dst`, column `ξ_w ↦ Φ(w)`.
pub fn graded_unitary<T: Scalar>(
    src: &TruncatedFock,
    dst: &TruncatedFock,
    mats: &[Vec<Vec<T>>],
) -> Result<SparseMat<T>, FockError> {
    if src.rel().multiplicities() != dst.rel().multiplicities() || src.truncation() != dst.truncation() {
        return Err(FockError::MultiplicityMismatch);
    }
    check_mats(src, mats)?;
    let mut triplets = Vec::new();
    for (col, w) in src.words().iter().enumerate() {
        for (img, c) in phi_expand(mats, w) {
            let row = dst.index_of(&img).expect("graded image keeps the degree");
            triplets.push((row, col, c));
        }
    }
    Ok(SparseMat::from_triplets(dst.len(), src.len(), triplets))
}

/// Checks `U L^src_g = L^dst_{Φ(g)} U` on degrees below the top for every
/// generator; returns the first failing generator and basis word.
pub fn check_graded_intertwining<T: Scalar>(
    src: &TruncatedFock,
    dst: &TruncatedFock,
    mats: &[Vec<Vec<T>>],
    tol: f64,
) -> Result<Option<(Letter, NormalWord)>, FockError> {
    let u = graded_unitary(src, dst, mats)?;
    let below_top = src.up_to_degree(src.truncation().saturating_sub(1));
    for g in src.rel().alphabet() {
        let lhs = u.mul(&generator_matrix(src, ShiftSide::Left, g)?.to_scalar::<T>());
        let mut phi_g = SparseMat::<T>::zeros(dst.len(), dst.len());
        for (k, c) in mats[g.class][g.index].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let l = generator_matrix(dst, ShiftSide::Left, Letter::new(g.class, k))?.to_scalar::<T>();
            phi_g = phi_g.add(&l.scale(c));
        }
        let rhs = phi_g.mul(&u);
        if let Some(col) = lhs.first_column_mismatch(&rhs, below_top.clone(), tol) {
            return Ok(Some((g, src.word(col).clone())));
        }
    }
    Ok(None)
}

fn reversed(op: &RelationSet, w: &NormalWord) -> Result<NormalWord, FockError> {
    let mut letters: Vec<Letter> = w.letters().collect();
    letters.reverse();
    Ok(normal_form(op, &Word::new(letters))?)
}

/// Checks that word reversal carries `R_g` on the Fock space of `rel` to
/// `L_g` on the Fock space of the opposite semigroup, up to degree `n`.
///
/// Returns the first generator for which the relabelled matrices differ.
pub fn check_left_right_duality(rel: &RelationSet, n: usize) -> Result<Option<Letter>, FockError> {
    let op = opposite(rel);
    let f = super::build_fock(rel, n)?;
    let fo = super::build_fock(&op, n)?;
    let mut relabel = Vec::with_capacity(f.len());
    let mut seen = vec![false; fo.len()];
    for w in f.words() {
        let j = fo.index_of(&reversed(&op, w)?).expect("reversal keeps the degree");
        if std::mem::replace(&mut seen[j], true) {
            return Err(FockError::MultiplicityMismatch);
        }
        relabel.push(Some(j));
    }
    let p = SparseMat::<i64>::from_column_map(fo.len(), &relabel);
    for g in rel.alphabet() {
        let lhs = p.mul(&generator_matrix(&f, ShiftSide::Right, g)?.matrix);
        let rhs = generator_matrix(&fo, ShiftSide::Left, g)?.matrix.mul(&p);
        if lhs != rhs {
            return Ok(Some(g));
        }
    }
    Ok(None)
}
