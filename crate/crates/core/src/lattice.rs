//! Integer lattices in `Z^d`: Hermite normal form, coset reduction and
//! Smith invariant factors.

use num_integer::Integer;

/// Sublattice of `Z^dim` stored as a row-echelon basis with positive pivots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    rows: Vec<(usize, Vec<i128>)>,
}

impl Lattice {
    pub fn zero(dim: usize) -> Self {
        Lattice { dim, rows: Vec::new() }
    }

    pub fn from_generators<I>(dim: usize, gens: I) -> Self
    where
        I: IntoIterator<Item = Vec<i64>>,
    {
        let mut lat = Lattice::zero(dim);
        for g in gens {
            assert_eq!(g.len(), dim, "generator has the wrong length");
            lat.insert(g.into_iter().map(i128::from).collect());
        }
        lat.reduce_above_pivots();
        lat
    }

    fn insert(&mut self, mut v: Vec<i128>) {
        let mut col = 0;
        while col < self.dim {
            if v[col] == 0 {
                col += 1;
                continue;
            }
            match self.rows.iter().position(|(p, _)| *p == col) {
                None => {
                    if v[col] < 0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    let at = self.rows.iter().position(|(p, _)| *p > col).unwrap_or(self.rows.len());
                    self.rows.insert(at, (col, v));
                    return;
                }
                Some(k) => {
                    let row = &self.rows[k].1;
                    let (a, b) = (row[col], v[col]);
                    let eg = a.extended_gcd(&b);
                    let (g, s, t) = (eg.gcd, eg.x, eg.y);
                    let new_row: Vec<i128> = row.iter().zip(&v).map(|(r, x)| s * r + t * x).collect();
                    let rest: Vec<i128> = row.iter().zip(&v).map(|(r, x)| (a / g) * x - (b / g) * r).collect();
                    let mut new_row = new_row;
                    if new_row[col] < 0 {
                        new_row.iter_mut().for_each(|x| *x = -*x);
                    }
                    self.rows[k].1 = new_row;
                    self.reduce_row_tail(k);
                    v = rest;
                    col += 1;
                }
            }
        }
    }

    fn reduce_row_tail(&mut self, k: usize) {
        for j in k + 1..self.rows.len() {
            let (pc, ref pivot_row) = self.rows[j];
            let p = pivot_row[pc];
            let q = Integer::div_floor(&self.rows[k].1[pc], &p);
            if q != 0 {
                let pr = pivot_row.clone();
                for (x, y) in self.rows[k].1.iter_mut().zip(pr) {
                    *x -= q * y;
                }
            }
        }
    }

    fn reduce_above_pivots(&mut self) {
        for k in (0..self.rows.len()).rev() {
            self.reduce_row_tail(k);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|(_, r)| r.iter().map(|&x| i64::try_from(x).expect("lattice entry fits in i64")).collect())
            .collect()
    }

    /// Canonical representative of `v + L`: every pivot coordinate lands in `[0, pivot)`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.dim, "vector has the wrong length");
        let mut w: Vec<i128> = v.iter().map(|&x| i128::from(x)).collect();
        for (pc, row) in &self.rows {
            let q = Integer::div_floor(&w[*pc], &row[*pc]);
            if q != 0 {
                for (x, y) in w.iter_mut().zip(row) {
                    *x -= q * y;
                }
            }
        }
        w.into_iter()
            .map(|x| i64::try_from(x).expect("reduced entry fits in i64"))
            .collect()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Nonzero invariant factors of the basis matrix, in divisibility order.
    pub fn invariant_factors(&self) -> Vec<i64> {
        let mut m: Vec<Vec<i128>> = self.rows.iter().map(|(_, r)| r.clone()).collect();
        let mut out = Vec::new();
        let rows = m.len();
        let cols = self.dim;
        let mut t = 0;
        while t < rows.min(cols) {
            // smallest nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in m.iter().enumerate().skip(t) {
                for (j, &x) in row.iter().enumerate().skip(t) {
                    if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            m.swap(t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            let mut clean = true;
            let p = m[t][t];
            for i in t + 1..rows {
                let q = Integer::div_floor(&m[i][t], &p);
                if q != 0 {
                    let pr = m[t].clone();
                    for (x, y) in m[i].iter_mut().zip(pr) {
                        *x -= q * y;
                    }
                }
                if m[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = Integer::div_floor(&m[t][j], &p);
                if q != 0 {
                    for row in m.iter_mut() {
                        let y = row[t];
                        row[j] -= q * y;
                    }
                }
                if m[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold a non-divisible trailing entry into row t
            let mut fixed = false;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if m[i][j] % p != 0 {
                        let ri = m[i].clone();
                        for (x, y) in m[t].iter_mut().zip(ri) {
                            *x += y;
                        }
                        fixed = true;
                        break 'scan;
                    }
                }
            }
            if fixed {
                continue;
            }
            out.push(i64::try_from(p.abs()).expect("invariant factor fits in i64"));
            t += 1;
        }
        out
    }

    /// Invariant factors greater than one: the torsion of `Z^dim / L`.
    pub fn torsion(&self) -> Vec<i64> {
        self.invariant_factors().into_iter().filter(|&d| d > 1).collect()
    }
}
