use std::collections::BTreeMap;

use super::{FockError, TruncatedFock};
use crate::scalar::{Field, Scalar};
use crate::semigroup::{multiply, NormalWord};
use crate::sparse::SparseMat;

/// `L_w` on the truncated space.
pub fn word_operator<T: Scalar>(f: &TruncatedFock, w: &NormalWord) -> Result<SparseMat<T>, FockError> {
    let room = f.truncation().checked_sub(w.total_degree());
    let mut images = vec![None; f.len()];
    if let Some(room) = room {
        for (col, slot) in images.iter_mut().enumerate().take(f.up_to_degree(room).end) {
            let img = multiply(f.rel(), w, f.word(col))?;
            *slot = f.index_of(&img);
        }
    }
    Ok(SparseMat::from_column_map(f.len(), &images))
}

/// Coefficients `a_w = <A ξ_e, ξ_w>` keyed by basis index; zeros are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients<T> {
    pub coeffs: BTreeMap<usize, T>,
}

impl<T: Scalar> FourierCoefficients<T> {
    pub fn get(&self, f: &TruncatedFock, w: &NormalWord) -> T {
        f.index_of(w)
            .and_then(|i| self.coeffs.get(&i).cloned())
            .unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coeffs.get(&0).cloned().unwrap_or_else(T::zero)
    }

    pub fn has_vanishing_constant_term(&self, tol: f64) -> bool {
        self.constant_term().is_negligible(tol)
    }

    /// `(word, coefficient)` pairs in basis order.
    pub fn named<'a>(&'a self, f: &'a TruncatedFock) -> impl Iterator<Item = (&'a NormalWord, &'a T)> + 'a {
        self.coeffs.iter().map(move |(&i, v)| (f.word(i), v))
    }
}

pub fn fourier_coefficients<T: Scalar>(f: &TruncatedFock, a: &SparseMat<T>) -> Result<FourierCoefficients<T>, FockError> {
    if a.nrows() != f.len() || a.ncols() != f.len() {
        return Err(FockError::OperatorShape {
            rows: a.nrows(),
            cols: a.ncols(),
            expected: f.len(),
        });
    }
    let coeffs = a
        .column(f.vacuum())
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .cloned()
        .collect();
    Ok(FourierCoefficients { coeffs })
}

fn weighted_sum<T: Scalar>(
    f: &TruncatedFock,
    coeffs: &FourierCoefficients<T>,
    weight: impl Fn(usize) -> Option<T>,
) -> Result<SparseMat<T>, FockError> {
    let mut acc = SparseMat::zeros(f.len(), f.len());
    for (&i, a) in &coeffs.coeffs {
        let w = f.word(i);
        if let Some(wt) = weight(w.total_degree()) {
            let term = word_operator::<T>(f, w)?.scale(&(wt * a.clone()));
            acc = acc.add(&term);
        }
    }
    Ok(acc)
}

/// `Σ_{|w|<=max_degree} a_w L_w` with unit weights.
pub fn fourier_sum<T: Scalar>(
    f: &TruncatedFock,
    coeffs: &FourierCoefficients<T>,
    max_degree: usize,
) -> Result<SparseMat<T>, FockError> {
    weighted_sum(f, coeffs, |d| (d <= max_degree).then(T::one))
}

/// Cesaro mean `Σ_{|w|<=n} (1 - |w|/n) a_w L_w`.
pub fn cesaro_sum<T: Field>(f: &TruncatedFock, coeffs: &FourierCoefficients<T>, n: usize) -> Result<SparseMat<T>, FockError> {
    if n == 0 || n > f.truncation() {
        return Err(FockError::InvalidCesaroOrder { n, max: f.truncation() });
    }
    weighted_sum(f, coeffs, |d| (d < n).then(|| T::from_ratio((n - d) as i64, n as i64)))
}
