use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::scalar::Scalar;

/// Column-compressed sparse matrix with rows sorted inside each column and
/// no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat<T> {
    nrows: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMat<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMat {
            nrows,
            ncols,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMat {
            nrows: n,
            ncols: n,
            cols: (0..n).map(|j| vec![(j, T::one())]).collect(),
        }
    }

    /// 0/1 matrix sending column `j` to row `map[j]`, or to zero.
    pub fn from_column_map(nrows: usize, map: &[Option<usize>]) -> Self {
        SparseMat {
            nrows,
            ncols: map.len(),
            cols: map
                .iter()
                .map(|t| t.map(|r| vec![(r, T::one())]).unwrap_or_default())
                .collect(),
        }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, entries: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); ncols];
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            let slot = acc[c].entry(r).or_insert_with(T::zero);
            *slot = slot.clone() + v;
        }
        SparseMat {
            nrows,
            ncols,
            cols: acc.into_iter().map(compress).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.cols[j]
            .binary_search_by_key(&i, |e| e.0)
            .map(|k| self.cols[j][k].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (*i, j, v)))
    }

    pub fn mul(&self, other: &SparseMat<T>) -> SparseMat<T> {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in product");
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, T> = BTreeMap::new();
                for (k, b) in col {
                    for (i, a) in &self.cols[*k] {
                        let slot = acc.entry(*i).or_insert_with(T::zero);
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
                compress(acc)
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: other.ncols,
            cols,
        }
    }

    pub fn add(&self, other: &SparseMat<T>) -> SparseMat<T> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SparseMat<T>) -> SparseMat<T> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &SparseMat<T>, op: impl Fn(T, T) -> T) -> SparseMat<T> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "dimension mismatch");
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut pairs: BTreeMap<usize, (T, T)> = BTreeMap::new();
                for (i, v) in a {
                    pairs.entry(*i).or_insert_with(|| (T::zero(), T::zero())).0 = v.clone();
                }
                for (i, v) in b {
                    pairs.entry(*i).or_insert_with(|| (T::zero(), T::zero())).1 = v.clone();
                }
                let acc: BTreeMap<usize, T> = pairs.into_iter().map(|(i, (x, y))| (i, op(x, y))).collect();
                compress(acc)
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            cols,
        }
    }

    pub fn scale(&self, s: &T) -> SparseMat<T> {
        let cols = self
            .cols
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(i, v)| (*i, v.clone() * s.clone()))
                    .filter(|(_, v)| !v.is_zero())
                    .collect()
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            cols,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> SparseMat<T> {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, v) in col {
                cols[*i].push((j, v.conj()));
            }
        }
        SparseMat {
            nrows: self.ncols,
            ncols: self.nrows,
            cols,
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch in matrix-vector product");
        let mut out = vec![T::zero(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            if x[j].is_zero() {
                continue;
            }
            for (i, v) in col {
                out[*i] = out[*i].clone() + v.clone() * x[j].clone();
            }
        }
        out
    }

    /// Keeps only the listed rows (in the given order) and drops the rest.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMat<T> {
        let mut pos = vec![None; self.nrows];
        for (k, &r) in rows.iter().enumerate() {
            pos[r] = Some(k);
        }
        let cols = self
            .cols
            .iter()
            .map(|col| {
                let mut c: Vec<(usize, T)> =
                    col.iter().filter_map(|(i, v)| pos[*i].map(|k| (k, v.clone()))).collect();
                c.sort_by_key(|e| e.0);
                c
            })
            .collect();
        SparseMat {
            nrows: rows.len(),
            ncols: self.ncols,
            cols,
        }
    }

    /// First column among `cols` where the two matrices differ by more than `tol`.
    pub fn first_column_mismatch(
        &self,
        other: &SparseMat<T>,
        cols: impl IntoIterator<Item = usize>,
        tol: f64,
    ) -> Option<usize> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "dimension mismatch");
        cols.into_iter().find(|&j| {
            let mut acc: BTreeMap<usize, T> = BTreeMap::new();
            for (i, v) in &self.cols[j] {
                acc.insert(*i, v.clone());
            }
            for (i, v) in &other.cols[j] {
                let slot = acc.entry(*i).or_insert_with(T::zero);
                *slot = slot.clone() - v.clone();
            }
            acc.values().any(|v| !v.is_negligible(tol))
        })
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.cols
            .iter()
            .flatten()
            .map(|(_, v)| v.modulus_sq().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SparseMat<U> {
        let cols = self
            .cols
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(i, v)| (*i, f(v)))
                    .filter(|(_, v)| !v.is_zero())
                    .collect()
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            cols,
        }
    }
}

fn compress<T: Scalar>(acc: BTreeMap<usize, T>) -> Vec<(usize, T)> {
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// Entry formatting for Matrix Market coordinate files.
pub trait MarketEntry {
    const FIELD: &'static str;
    fn write_entry(&self, out: &mut String);
}

impl MarketEntry for i64 {
    const FIELD: &'static str = "integer";
    fn write_entry(&self, out: &mut String) {
        let _ = write!(out, "{self}");
    }
}

impl MarketEntry for f64 {
    const FIELD: &'static str = "real";
    fn write_entry(&self, out: &mut String) {
        let _ = write!(out, "{self:e}");
    }
}

impl MarketEntry for Complex64 {
    const FIELD: &'static str = "complex";
    fn write_entry(&self, out: &mut String) {
        let _ = write!(out, "{:e} {:e}", self.re, self.im);
    }
}

impl<T: Scalar + MarketEntry> SparseMat<T> {
    /// Matrix Market coordinate text, entries in column-major order, 1-based.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "%%MatrixMarket matrix coordinate {} general", T::FIELD);
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = write!(out, "{} {} ", i + 1, j + 1);
            v.write_entry(&mut out);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_adjoint() {
        let a = SparseMat::<i64>::from_triplets(2, 2, [(0, 0, 1), (1, 0, 2), (0, 1, 3)]);
        let b = SparseMat::<i64>::from_triplets(2, 2, [(0, 0, 1), (1, 1, 1), (1, 0, -1)]);
        let c = a.mul(&b);
        // [[1,3],[2,0]] * [[1,0],[-1,1]] = [[-2,3],[2,0]]
        assert_eq!(c.get(0, 0), -2);
        assert_eq!(c.get(0, 1), 3);
        assert_eq!(c.get(1, 0), 2);
        assert_eq!(c.get(1, 1), 0);
        assert_eq!(a.adjoint().get(1, 0), 3);
        assert_eq!(a.sub(&a).nnz(), 0);
        assert_eq!(a.add(&a).get(1, 0), 4);
    }

    #[test]
    fn column_map_and_market_export() {
        let m = SparseMat::<i64>::from_column_map(3, &[Some(1), None, Some(2)]);
        assert_eq!(m.mul_vec(&[1, 5, 7]), vec![0, 1, 7]);
        let text = m.to_matrix_market();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate integer general\n3 3 2\n"));
        assert!(text.contains("2 1 1\n"));
        assert_eq!(m.first_column_mismatch(&m, 0..3, 0.0), None);
        let other = SparseMat::<i64>::from_column_map(3, &[Some(1), None, Some(0)]);
        assert_eq!(m.first_column_mismatch(&other, 0..3, 0.0), Some(2));
    }
}
