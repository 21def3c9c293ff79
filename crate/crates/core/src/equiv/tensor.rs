use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use serde_json::{json, Value};

use super::EquivError;
use crate::lattice::Lattice;
use crate::perm::{GridPermutation, GridShape};

/// Largest `n^2 + m^2`: row and column sets of the realigned matrix are enumerated.
pub const TENSOR_REALIGNED_LIMIT: usize = 20;
/// Largest support searched for `{±1, ±i}` sign patterns.
pub const SIGN_SEARCH_LIMIT: usize = 10;

type Gaussian = Complex<i64>;

/// The intertwiner space written with one variable per orbit of
/// `(a, b) -> (theta a, tau b)`: `X[a][b] = z[var_of[a][b]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitParametrization {
    pub shape: GridShape,
    pub n_vars: usize,
    pub var_of: Vec<Vec<usize>>,
}

impl OrbitParametrization {
    /// Realigned layout: row `(i,i')`, column `(j,j')` holds `X[(i,j)][(i',j')]`.
    pub fn realigned(&self) -> Vec<Vec<usize>> {
        let (n, m) = (self.shape.n, self.shape.m);
        (0..n * n)
            .map(|r| {
                let (i, i2) = (r / n, r % n);
                (0..m * m)
                    .map(|c| {
                        let (j, j2) = (c / m, c % m);
                        self.var_of[self.shape.cell(i, j)][self.shape.cell(i2, j2)]
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn orbit_parametrization(theta: &GridPermutation, tau: &GridPermutation) -> OrbitParametrization {
    let shape = theta.shape();
    let k = shape.cells();
    let (t, s) = (theta.perm(), tau.perm());
    let mut var_of = vec![vec![usize::MAX; k]; k];
    let mut n_vars = 0;
    for a in 0..k {
        for b in 0..k {
            if var_of[a][b] != usize::MAX {
                continue;
            }
            let (mut x, mut y) = (a, b);
            while var_of[x][y] == usize::MAX {
                var_of[x][y] = n_vars;
                x = t.apply(x);
                y = s.apply(y);
            }
            n_vars += 1;
        }
    }
    OrbitParametrization { shape, n_vars, var_of }
}

/// Orbit variables allowed to be nonzero, with the rank-one lattice of the
/// realigned matrix on that support.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportComponent {
    pub support: Vec<usize>,
    pub lattice: Lattice,
    /// Whether the determinant is not identically zero on the component.
    pub invertible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorAnalysis {
    pub params: OrbitParametrization,
    pub n_vars: usize,
    /// Supports whose realigned pattern is exactly a rectangle.
    pub components: Vec<SupportComponent>,
}

impl TensorAnalysis {
    /// Some invertible `A ⊗ B` intertwines the two permutations.
    pub fn product_similar(&self) -> bool {
        self.components.iter().any(|c| c.invertible)
    }
}

/// Exact description of all elementary-tensor intertwiners.
///
/// An intertwiner `X` is `A ⊗ B` exactly when its realignment has rank at
/// most one. Each support of orbit variables whose realigned pattern is a
/// rectangle contributes the binomial conditions of its 2x2 minors; the
/// solutions with that support form a diagonalizable group on which `det X`
/// vanishes identically iff every class of determinant monomials modulo the
/// minor lattice has zero coefficient sum.
pub fn analyze_tensor_system(theta: &GridPermutation, tau: &GridPermutation) -> Result<TensorAnalysis, EquivError> {
    let params = orbit_parametrization(theta, tau);
    let shape = params.shape;
    let (rn, rm) = (shape.n * shape.n, shape.m * shape.m);
    if rn + rm > TENSOR_REALIGNED_LIMIT || params.n_vars > 64 {
        return Err(EquivError::TensorSystemTooLarge {
            cells: shape.cells(),
            vars: params.n_vars,
        });
    }
    let realigned = params.realigned();
    let mut components = Vec::new();
    for row_mask in 1u32..(1 << rn) {
        for col_mask in 1u32..(1 << rm) {
            let Some((mask, rows, cols)) = realigned_rectangle(&realigned, row_mask, col_mask) else {
                continue;
            };
            let support: Vec<usize> = (0..params.n_vars).filter(|&v| mask >> v & 1 == 1).collect();
            let position = |v: usize| support.binary_search(&v).expect("variable lies in the support");
            let mut gens = Vec::new();
            for (a, &r1) in rows.iter().enumerate() {
                for &r2 in &rows[a + 1..] {
                    for (b, &q1) in cols.iter().enumerate() {
                        for &q2 in &cols[b + 1..] {
                            let mut v = vec![0i64; support.len()];
                            v[position(realigned[r1][q1])] += 1;
                            v[position(realigned[r2][q2])] += 1;
                            v[position(realigned[r1][q2])] -= 1;
                            v[position(realigned[r2][q1])] -= 1;
                            gens.push(v);
                        }
                    }
                }
            }
            let lattice = Lattice::from_generators(support.len(), gens);
            let invertible = determinant_survives(&params, mask, &support, &lattice);
            components.push(SupportComponent {
                support,
                lattice,
                invertible,
            });
        }
    }
    Ok(TensorAnalysis {
        n_vars: params.n_vars,
        params,
        components,
    })
}

/// The orbit variables on `rows x cols`, provided none of them also occurs outside it.
fn realigned_rectangle(realigned: &[Vec<usize>], row_mask: u32, col_mask: u32) -> Option<(u64, Vec<usize>, Vec<usize>)> {
    let rows: Vec<usize> = (0..realigned.len()).filter(|&r| row_mask >> r & 1 == 1).collect();
    let ncols = realigned.first().map_or(0, Vec::len);
    let cols: Vec<usize> = (0..ncols).filter(|&c| col_mask >> c & 1 == 1).collect();
    let mut mask = 0u64;
    for &r in &rows {
        for &c in &cols {
            mask |= 1 << realigned[r][c];
        }
    }
    let leaks = realigned.iter().enumerate().any(|(r, row)| {
        row.iter()
            .enumerate()
            .any(|(c, &v)| mask >> v & 1 == 1 && (row_mask >> r & 1 == 0 || col_mask >> c & 1 == 0))
    });
    (!leaks).then_some((mask, rows, cols))
}

fn determinant_survives(params: &OrbitParametrization, mask: u64, support: &[usize], lattice: &Lattice) -> bool {
    let k = params.shape.cells();
    let mut classes: HashMap<Vec<i64>, i64> = HashMap::new();
    let mut exps = vec![0i64; support.len()];
    let mut chosen = Vec::with_capacity(k);
    let mut used = vec![false; k];
    expand_det(params, mask, support, 0, &mut used, &mut chosen, &mut exps, &mut |exps, chosen| {
        let sign = permutation_sign(chosen);
        *classes.entry(lattice.reduce(exps)).or_insert(0) += sign;
    });
    classes.values().any(|&c| c != 0)
}

#[allow(clippy::too_many_arguments)]
fn expand_det(
    params: &OrbitParametrization,
    mask: u64,
    support: &[usize],
    row: usize,
    used: &mut [bool],
    chosen: &mut Vec<usize>,
    exps: &mut [i64],
    leaf: &mut impl FnMut(&[i64], &[usize]),
) {
    let k = used.len();
    if row == k {
        leaf(exps, chosen);
        return;
    }
    for col in 0..k {
        let v = params.var_of[row][col];
        if used[col] || mask >> v & 1 == 0 {
            continue;
        }
        let pos = support.binary_search(&v).expect("variable lies in the support");
        used[col] = true;
        chosen.push(col);
        exps[pos] += 1;
        expand_det(params, mask, support, row + 1, used, chosen, exps, leaf);
        exps[pos] -= 1;
        chosen.pop();
        used[col] = false;
    }
}

fn permutation_sign(images: &[usize]) -> i64 {
    let mut seen = vec![false; images.len()];
    let mut sign = 1;
    for start in 0..images.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = images[x];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Unitaries `A = a / sqrt(a_scale_sq)`, `B = b / sqrt(b_scale_sq)` with
/// Gaussian-integer entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianWitness {
    pub a: Vec<Vec<Gaussian>>,
    pub b: Vec<Vec<Gaussian>>,
    pub a_scale_sq: i64,
    pub b_scale_sq: i64,
}

fn gram_scale(m: &[Vec<Gaussian>]) -> Option<i64> {
    let k = m.len();
    let mut scale = None;
    for i in 0..k {
        for j in 0..k {
            let dot: Gaussian = (0..k).map(|t| m[i][t] * m[j][t].conj()).sum();
            if i == j {
                if dot.im != 0 || dot.re <= 0 || scale.is_some_and(|s| s != dot.re) {
                    return None;
                }
                scale = Some(dot.re);
            } else if dot != Gaussian::new(0, 0) {
                return None;
            }
        }
    }
    scale
}

impl GaussianWitness {
    /// Exact check: both factors are scaled unitaries with the recorded
    /// scales, and `K = a ⊗ b` satisfies `K[x][y] = K[theta x][tau y]`.
    pub fn verify(&self, theta: &GridPermutation, tau: &GridPermutation) -> bool {
        let shape = theta.shape();
        if self.a.len() != shape.n || self.b.len() != shape.m {
            return false;
        }
        if self.a.iter().any(|r| r.len() != shape.n) || self.b.iter().any(|r| r.len() != shape.m) {
            return false;
        }
        if gram_scale(&self.a) != Some(self.a_scale_sq) || gram_scale(&self.b) != Some(self.b_scale_sq) {
            return false;
        }
        let k = shape.cells();
        let entry = |x: usize, y: usize| {
            let (i, j) = shape.coords(x);
            let (i2, j2) = shape.coords(y);
            self.a[i][i2] * self.b[j][j2]
        };
        let (t, s) = (theta.perm(), tau.perm());
        (0..k).all(|x| (0..k).all(|y| entry(x, y) == entry(t.apply(x), s.apply(y))))
    }

    pub fn unitaries(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let convert = |m: &[Vec<Gaussian>], s: i64| {
            let k = m.len();
            let f = (s as f64).sqrt();
            DMatrix::from_fn(k, k, |i, j| Complex64::new(m[i][j].re as f64 / f, m[i][j].im as f64 / f))
        };
        (convert(&self.a, self.a_scale_sq), convert(&self.b, self.b_scale_sq))
    }

    pub(crate) fn to_json_value(&self) -> Value {
        let rows = |m: &[Vec<Gaussian>]| -> Value {
            m.iter()
                .map(|r| r.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into()
        };
        json!({
            "kind": "gaussian",
            "a": rows(&self.a),
            "a_scale_sq": self.a_scale_sq,
            "b": rows(&self.b),
            "b_scale_sq": self.b_scale_sq,
        })
    }
}

const UNITS: [Gaussian; 4] = [
    Gaussian { re: 1, im: 0 },
    Gaussian { re: 0, im: 1 },
    Gaussian { re: -1, im: 0 },
    Gaussian { re: 0, im: -1 },
];

/// Looks for an intertwiner `A ⊗ B` whose orbit variables are fourth roots
/// of unity on an invertible component.
pub fn search_sign_pattern(
    theta: &GridPermutation,
    tau: &GridPermutation,
    analysis: &TensorAnalysis,
) -> Option<GaussianWitness> {
    let params = &analysis.params;
    let realigned = params.realigned();
    let (n, m) = (params.shape.n, params.shape.m);
    for comp in analysis.components.iter().filter(|c| c.invertible) {
        let s = comp.support.len();
        if s > SIGN_SEARCH_LIMIT {
            continue;
        }
        let mut z = vec![Gaussian::new(0, 0); params.n_vars];
        for code in 0..4usize.pow(s as u32 - 1) {
            let mut c = code;
            z[comp.support[0]] = UNITS[0];
            for &v in &comp.support[1..] {
                z[v] = UNITS[c % 4];
                c /= 4;
            }
            let r: Vec<Vec<Gaussian>> = realigned.iter().map(|row| row.iter().map(|&v| z[v]).collect()).collect();
            let Some((p, q)) = (0..n * n)
                .flat_map(|p| (0..m * m).map(move |q| (p, q)))
                .find(|&(p, q)| r[p][q] != Gaussian::new(0, 0))
            else {
                continue;
            };
            if !rank_at_most_one(&r) {
                continue;
            }
            let a: Vec<Vec<Gaussian>> = (0..n).map(|i| (0..n).map(|i2| r[i * n + i2][q]).collect()).collect();
            let b: Vec<Vec<Gaussian>> = (0..m).map(|j| (0..m).map(|j2| r[p][j * m + j2]).collect()).collect();
            let (Some(sa), Some(sb)) = (gram_scale(&a), gram_scale(&b)) else {
                continue;
            };
            let w = GaussianWitness {
                a,
                b,
                a_scale_sq: sa,
                b_scale_sq: sb,
            };
            if w.verify(theta, tau) {
                return Some(w);
            }
        }
    }
    None
}

fn rank_at_most_one(r: &[Vec<Gaussian>]) -> bool {
    let rows = r.len();
    let cols = r.first().map_or(0, Vec::len);
    for p1 in 0..rows {
        for p2 in p1 + 1..rows {
            for q1 in 0..cols {
                for q2 in q1 + 1..cols {
                    if r[p1][q1] * r[p2][q2] != r[p1][q2] * r[p2][q1] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::intertwiner_dimension_formula;
    use crate::perm::{product_group, Permutations};

    fn g(n: usize, m: usize, text: &str) -> GridPermutation {
        GridPermutation::parse(GridShape::new(n, m).unwrap(), text).unwrap()
    }

    #[test]
    fn orbit_count_matches_gcd_formula() {
        let s = GridShape::new(2, 2).unwrap();
        for a in Permutations::new(4) {
            for b in Permutations::new(4).step_by(3) {
                let (x, y) = (GridPermutation::new(s, a.clone()).unwrap(), GridPermutation::new(s, b).unwrap());
                assert_eq!(orbit_parametrization(&x, &y).n_vars, intertwiner_dimension_formula(x.perm(), y.perm()));
            }
        }
    }

    #[test]
    fn conjugate_pairs_are_product_similar() {
        let t = g(2, 3, "(1 2 3 6 5 4)");
        let group = product_group(t.shape()).unwrap();
        for (_, _, h) in group.iter().step_by(4) {
            let u = t.conjugate_by(h);
            let analysis = analyze_tensor_system(&t, &u).unwrap();
            assert!(analysis.product_similar());
            assert!(search_sign_pattern(&t, &u, &analysis).is_some());
        }
    }

    #[test]
    fn four_cycles_on_2x2_have_only_singular_tensors() {
        let analysis = analyze_tensor_system(&g(2, 2, "(1 2 4 3)"), &g(2, 2, "(1 2 3 4)")).unwrap();
        assert!(!analysis.components.is_empty());
        assert!(!analysis.product_similar());
    }

    #[test]
    fn hadamard_type_witness_for_three_cycles() {
        let (t, u) = (g(2, 2, "(142)"), g(2, 2, "(124)"));
        let analysis = analyze_tensor_system(&t, &u).unwrap();
        let w = search_sign_pattern(&t, &u, &analysis).unwrap();
        assert_eq!((w.a_scale_sq, w.b_scale_sq), (2, 2));
        assert!(w.verify(&t, &u));
        // independent check through dense matrices
        let (a, b) = w.unitaries();
        let k = a.kronecker(&b);
        let p = |perm: &crate::perm::Permutation| {
            DMatrix::from_fn(4, 4, |i, j| {
                if perm.apply(j) == i {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        };
        let residual = (p(t.perm()) * &k - &k * p(u.perm())).norm();
        assert!(residual < 1e-12);
        assert!((&a * a.adjoint() - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn too_large_systems_are_reported() {
        let t = GridPermutation::identity(GridShape::new(3, 4).unwrap());
        assert!(matches!(
            analyze_tensor_system(&t, &t),
            Err(EquivError::TensorSystemTooLarge { .. })
        ));
    }

    #[test]
    fn sign_of_permutations() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
    }
}
