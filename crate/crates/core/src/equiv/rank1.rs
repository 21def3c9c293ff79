use num_complex::Complex64;
use serde::Serialize;

use super::EquivError;
use crate::lattice::Lattice;
use crate::perm::{GridPermutation, GridShape};

/// Largest grid (in cells) for which supports are enumerated.
pub const RANK1_CELL_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    AdjacentPair,
    SingleRow,
    SingleColumn,
    FullSupport,
    Other,
}

/// All `n x m` matrices `C` with support exactly `support` such that
/// `C ∘ g^k` has rank at most one for every `k`.
///
/// On its support such a `C` is a point of the diagonalizable group cut out
/// by `x^v = 1` for `v` in `lattice` (the exponent vectors of the vanishing
/// 2x2 minors). Coordinates of `lattice` follow the order of `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Family {
    pub support: Vec<usize>,
    pub lattice: Lattice,
    pub kind: FamilyKind,
    /// At least two nonzero entries, and not every member has all entries equal.
    pub admissible: bool,
}

impl Rank1Family {
    /// Dimension of the family, counting the overall scale.
    pub fn free_parameters(&self) -> usize {
        self.support.len() - self.lattice.rank()
    }

    pub fn torsion(&self) -> Vec<i64> {
        self.lattice.torsion()
    }

    pub fn contains(&self, c: &[Complex64], tol: f64) -> bool {
        let on_support = |y: usize| self.support.binary_search(&y).is_ok();
        if (0..c.len()).any(|y| (c[y].norm() > tol) != on_support(y)) {
            return false;
        }
        self.lattice.basis().iter().all(|v| {
            let value = v
                .iter()
                .zip(&self.support)
                .fold(Complex64::new(1.0, 0.0), |acc, (&e, &y)| acc * c[y].powi(e as i32));
            (value - 1.0).norm() < tol
        })
    }

    pub fn describe(&self, shape: GridShape) -> String {
        let cells: Vec<String> = self
            .support
            .iter()
            .map(|&y| {
                let (i, j) = shape.coords(y);
                format!("({},{})", i + 1, j + 1)
            })
            .collect();
        let torsion = self.torsion();
        format!(
            "{:?} on {{{}}}, {} free parameter(s){}",
            self.kind,
            cells.join(", "),
            self.free_parameters(),
            if torsion.is_empty() {
                String::new()
            } else {
                format!(", torsion {torsion:?}")
            }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Report {
    pub shape: GridShape,
    pub families: Vec<Rank1Family>,
}

impl Rank1Report {
    pub fn admissible_families(&self) -> impl Iterator<Item = &Rank1Family> {
        self.families.iter().filter(|f| f.admissible)
    }

    pub fn has_admissible(&self) -> bool {
        self.families.iter().any(|f| f.admissible)
    }

    /// Whether `c` is a non-constant member of an admissible family.
    pub fn admits(&self, c: &[Complex64], tol: f64) -> bool {
        let constant = c.iter().all(|x| (x - c[0]).norm() < tol);
        !constant && self.admissible_families().any(|f| f.contains(c, tol))
    }
}

fn kind_of(shape: GridShape, support: &[usize]) -> FamilyKind {
    let coords: Vec<(usize, usize)> = support.iter().map(|&y| shape.coords(y)).collect();
    if support.len() == 2 {
        let ((a, b), (c, d)) = (coords[0], coords[1]);
        if (a == c && b.abs_diff(d) == 1) || (b == d && a.abs_diff(c) == 1) {
            return FamilyKind::AdjacentPair;
        }
    }
    if coords.iter().all(|c| c.0 == coords[0].0) {
        FamilyKind::SingleRow
    } else if coords.iter().all(|c| c.1 == coords[0].1) {
        FamilyKind::SingleColumn
    } else if support.len() == shape.cells() {
        FamilyKind::FullSupport
    } else {
        FamilyKind::Other
    }
}

fn rectangle(shape: GridShape, mask: u32) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for y in 0..shape.cells() {
        if mask >> y & 1 == 1 {
            let (i, j) = shape.coords(y);
            if !rows.contains(&i) {
                rows.push(i);
            }
            if !cols.contains(&j) {
                cols.push(j);
            }
        }
    }
    rows.sort_unstable();
    cols.sort_unstable();
    (rows.len() * cols.len() == mask.count_ones() as usize).then_some((rows, cols))
}

/// Every support pattern, with its rank-one family, for the orbit of `g`.
pub fn rank1_families(g: &GridPermutation) -> Result<Rank1Report, EquivError> {
    let shape = g.shape();
    let cells = shape.cells();
    if cells > RANK1_CELL_LIMIT {
        return Err(EquivError::UnsupportedShape(format!(
            "rank-one analysis handles at most {RANK1_CELL_LIMIT} cells, got {shape}"
        )));
    }
    let order = g.perm().order() as i64;
    let powers: Vec<Vec<usize>> = (0..order).map(|k| g.perm().pow(k).images().to_vec()).collect();
    let mut families = Vec::new();
    for mask in 1u32..(1 << cells) {
        if mask.count_ones() < 2 {
            continue;
        }
        let support: Vec<usize> = (0..cells).filter(|&y| mask >> y & 1 == 1).collect();
        let position = |y: usize| support.binary_search(&y).expect("cell lies in the support");
        let mut gens = Vec::new();
        let mut ok = true;
        for pk in &powers {
            // support of C ∘ g^k is the preimage of the support under g^k
            let shifted = (0..cells).filter(|&y| mask >> pk[y] & 1 == 1).fold(0u32, |acc, y| acc | 1 << y);
            let Some((rows, cols)) = rectangle(shape, shifted) else {
                ok = false;
                break;
            };
            for (a, &r1) in rows.iter().enumerate() {
                for &r2 in &rows[a + 1..] {
                    for (b, &q1) in cols.iter().enumerate() {
                        for &q2 in &cols[b + 1..] {
                            let mut v = vec![0i64; support.len()];
                            v[position(pk[shape.cell(r1, q1)])] += 1;
                            v[position(pk[shape.cell(r2, q2)])] += 1;
                            v[position(pk[shape.cell(r1, q2)])] -= 1;
                            v[position(pk[shape.cell(r2, q1)])] -= 1;
                            gens.push(v);
                        }
                    }
                }
            }
        }
        if !ok {
            continue;
        }
        let lattice = Lattice::from_generators(support.len(), gens);
        let admissible = support.len() < cells || !is_sum_zero_lattice(&lattice);
        families.push(Rank1Family {
            kind: kind_of(shape, &support),
            support,
            lattice,
            admissible,
        });
    }
    Ok(Rank1Report { shape, families })
}

fn is_sum_zero_lattice(lat: &Lattice) -> bool {
    let d = lat.dim();
    lat.rank() == d - 1
        && (1..d).all(|t| {
            let mut v = vec![0i64; d];
            v[0] = 1;
            v[t] = -1;
            lat.contains(&v)
        })
}

/// Rank-one orbit analysis for a full cycle on the `2 x 2` or `2 x 3` grid.
pub fn rank1_orbit_analysis(theta: &GridPermutation) -> Result<Rank1Report, EquivError> {
    let shape = theta.shape();
    if shape.n != 2 || !(shape.m == 2 || shape.m == 3) || !theta.perm().is_full_cycle() {
        return Err(EquivError::UnsupportedShape(format!(
            "expected a full cycle on a 2x2 or 2x3 grid, got {theta} on {shape}"
        )));
    }
    rank1_families(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{conjugacy_orbits, Scope};

    fn g(n: usize, m: usize, text: &str) -> GridPermutation {
        GridPermutation::parse(GridShape::new(n, m).unwrap(), text).unwrap()
    }

    fn c(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn rectangular_cycle_admits_adjacent_pairs() {
        let report = rank1_orbit_analysis(&g(2, 3, "(1 2 3 6 5 4)")).unwrap();
        let pairs: Vec<&Rank1Family> = report
            .admissible_families()
            .filter(|f| f.kind == FamilyKind::AdjacentPair)
            .collect();
        assert!(!pairs.is_empty());
        // the pair {1,2} along the top edge of the rectangle
        assert!(report.admits(&c(&[1.0, 3.0, 0.0, 0.0, 0.0, 0.0]), 1e-9));
        assert!(!report.admits(&c(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 1e-9));
    }

    #[test]
    fn exactly_three_cyclic_2x3_classes_have_no_admissible_family() {
        let cat = conjugacy_orbits(GridShape::new(2, 3).unwrap(), Scope::CyclicOnly).unwrap();
        let empty: Vec<String> = cat
            .entries
            .iter()
            .filter(|e| !rank1_orbit_analysis(&e.canonical_rep).unwrap().has_admissible())
            .map(|e| e.canonical_rep.to_string())
            .collect();
        assert_eq!(empty, vec!["(1 2 4 6 3 5)", "(1 2 4 3 6 5)", "(1 2 4 5 3 6)"]);
    }

    #[test]
    fn families_are_class_invariants() {
        let shape = GridShape::new(2, 3).unwrap();
        let cat = conjugacy_orbits(shape, Scope::CyclicOnly).unwrap();
        let group = crate::perm::product_group(shape).unwrap();
        for e in &cat.entries {
            let base = rank1_families(&e.canonical_rep).unwrap();
            for (_, _, h) in group.iter().step_by(5) {
                let other = rank1_families(&e.canonical_rep.conjugate_by(h)).unwrap();
                assert_eq!(other.families.len(), base.families.len());
                assert_eq!(
                    other.admissible_families().count(),
                    base.admissible_families().count()
                );
            }
        }
    }

    #[test]
    fn members_keep_rank_one_along_the_orbit() {
        let theta = g(2, 3, "(1 2 3 6 5 4)");
        let report = rank1_families(&theta).unwrap();
        let p = theta.perm();
        for f in report.admissible_families() {
            // the all-ones point on the support is always a member
            let mut x = vec![Complex64::new(0.0, 0.0); 6];
            for &y in &f.support {
                x[y] = Complex64::new(1.0, 0.0);
            }
            assert!(f.contains(&x, 1e-12));
            for k in 0..6 {
                let pk = p.pow(k);
                let shifted: Vec<Complex64> = (0..6).map(|y| x[pk.apply(y)]).collect();
                for (q1, q2) in [(0, 1), (0, 2), (1, 2)] {
                    let minor = shifted[q1] * shifted[3 + q2] - shifted[q2] * shifted[3 + q1];
                    assert!(minor.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unsupported_inputs() {
        assert!(rank1_orbit_analysis(&g(2, 3, "(1 2)")).is_err());
        assert!(rank1_orbit_analysis(&g(3, 3, "(1 2 3 4 5 6 7 8 9)")).is_err());
        assert!(rank1_families(&g(3, 3, "(1 2 3 4 5 6 7 8 9)")).is_ok());
    }
}
