//! Cycle diagrams on the grid and the binomial variety attached to a relation set.

use std::fmt::Write as _;

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::perm::{CycleType, GridPermutation, Permutation};
use crate::scalar::Scalar;
use crate::semigroup::RelationSet;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DiagramError {
    #[error("point has {found:?} coordinates per class, expected {expected:?}")]
    DimensionMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("minimality is only defined for rank-2 relation sets")]
    NotRankTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EdgeKind {
    Horizontal,
    Vertical,
    Diagonal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DiagramStats {
    pub h: usize,
    pub r: usize,
    pub v: usize,
    pub diag: usize,
    pub fixed: usize,
    pub cycle_type: CycleType,
}

impl DiagramStats {
    pub fn hrv(&self) -> (usize, usize, usize) {
        (self.h, self.r, self.v)
    }
}

fn edge_kind(g: &GridPermutation, cell: usize) -> Option<EdgeKind> {
    let shape = g.shape();
    let target = g.perm().apply(cell);
    if target == cell {
        return None;
    }
    let (r0, c0) = shape.coords(cell);
    let (r1, c1) = shape.coords(target);
    Some(if r0 == r1 {
        EdgeKind::Horizontal
    } else if c0 == c1 {
        EdgeKind::Vertical
    } else {
        EdgeKind::Diagonal
    })
}

/// Edge counts of the cycle diagram. A right angle is a pair of consecutive
/// edges `c -> θ(c) -> θ²(c)` where one is horizontal and the other vertical.
pub fn diagram_stats(g: &GridPermutation) -> DiagramStats {
    let cells = g.shape().cells();
    let kinds: Vec<Option<EdgeKind>> = (0..cells).map(|c| edge_kind(g, c)).collect();
    let mut stats = DiagramStats {
        h: 0,
        r: 0,
        v: 0,
        diag: 0,
        fixed: 0,
        cycle_type: g.cycle_type(),
    };
    for c in 0..cells {
        match kinds[c] {
            None => stats.fixed += 1,
            Some(EdgeKind::Horizontal) => stats.h += 1,
            Some(EdgeKind::Vertical) => stats.v += 1,
            Some(EdgeKind::Diagonal) => stats.diag += 1,
        }
        let next = kinds[g.perm().apply(c)];
        if matches!(
            (kinds[c], next),
            (Some(EdgeKind::Horizontal), Some(EdgeKind::Vertical)) | (Some(EdgeKind::Vertical), Some(EdgeKind::Horizontal))
        ) {
            stats.r += 1;
        }
    }
    stats
}

/// Classes of equal product monomials, one partition per pair of generator classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationClasses {
    pub pairs: Vec<PairClasses>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairClasses {
    /// 0-based generator classes `(i, j)`, `i < j`.
    pub classes: (usize, usize),
    /// Blocks of cell indices `p * n_j + q`, each sorted, ordered by least cell.
    pub blocks: Vec<Vec<usize>>,
}

impl EquationClasses {
    pub fn for_pair(&self, i: usize, j: usize) -> Option<&PairClasses> {
        self.pairs.iter().find(|p| p.classes == (i, j))
    }
}

fn partition_by_relation(p: &Permutation) -> Vec<Vec<usize>> {
    let k = p.size();
    let mut uf = UnionFind::<usize>::new(k);
    for c in 0..k {
        uf.union(c, p.apply(c));
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for c in 0..k {
        let root = uf.find(c);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(c);
    }
    blocks
}

pub fn equation_classes(rel: &RelationSet) -> EquationClasses {
    EquationClasses {
        pairs: rel
            .relations()
            .map(|(key, p)| PairClasses {
                classes: key,
                blocks: partition_by_relation(p),
            })
            .collect(),
    }
}

/// True iff the relation is a single cycle through every cell.
pub fn is_minimal_variety(rel: &RelationSet) -> Result<bool, DiagramError> {
    if rel.rank() != 2 {
        return Err(DiagramError::NotRankTwo);
    }
    let classes = equation_classes(rel);
    Ok(classes.pairs[0].blocks.len() == 1)
}

/// Coordinates `(α^(1), ..., α^(r))`, one vector per generator class.
#[derive(Clone, Debug, PartialEq)]
pub struct VarietyPoint<T = Complex64> {
    pub coords: Vec<Vec<T>>,
}

impl<T: Scalar> VarietyPoint<T> {
    pub fn new(coords: Vec<Vec<T>>) -> Self {
        VarietyPoint { coords }
    }

    pub fn zero(multiplicities: &[usize]) -> Self {
        VarietyPoint {
            coords: multiplicities.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn check_dimensions(&self, rel: &RelationSet) -> Result<(), DiagramError> {
        let found: Vec<usize> = self.coords.iter().map(Vec::len).collect();
        if found != rel.multiplicities() {
            return Err(DiagramError::DimensionMismatch {
                expected: rel.multiplicities().to_vec(),
                found,
            });
        }
        Ok(())
    }

    /// Squared Euclidean norm of each block.
    pub fn block_norms_sq(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|b| b.iter().map(Scalar::modulus_sq).sum())
            .collect()
    }
}

/// Values of `α_p β_q - α_p' β_q'` for every cell of every relation.
pub fn binomial_residuals<'a, T: Scalar>(
    rel: &'a RelationSet,
    p: &'a VarietyPoint<T>,
) -> impl Iterator<Item = T> + 'a {
    rel.relations().flat_map(move |((i, j), perm)| {
        let nj = rel.multiplicities()[j];
        (0..perm.size()).map(move |cell| {
            let img = perm.apply(cell);
            let lhs = p.coords[i][cell / nj].clone() * p.coords[j][cell % nj].clone();
            let rhs = p.coords[i][img / nj].clone() * p.coords[j][img % nj].clone();
            lhs - rhs
        })
    })
}

/// Membership up to `tol`; exact scalar types test for exact vanishing.
pub fn variety_membership<T: Scalar>(rel: &RelationSet, p: &VarietyPoint<T>, tol: f64) -> Result<bool, DiagramError> {
    p.check_dimensions(rel)?;
    Ok(binomial_residuals(rel, p).all(|r| r.is_negligible(tol)))
}

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedSpace {
    pub dimension: usize,
    /// 0-based coordinates that must agree, one block per cycle.
    pub orbit_blocks: Vec<Vec<usize>>,
}

/// The subspace `{z : z = τ(z)}` of coordinates constant on each cycle.
pub fn fixed_space(tau: &Permutation) -> FixedSpace {
    let orbit_blocks = tau.cycles();
    FixedSpace {
        dimension: orbit_blocks.len(),
        orbit_blocks,
    }
}

/// DOT digraph with cell `(i,j)` (1-based) pinned at `(j, -i)`.
pub fn dot_export(g: &GridPermutation) -> String {
    let shape = g.shape();
    let mut out = String::new();
    let _ = writeln!(out, "digraph relation {{");
    let _ = writeln!(out, "  node [shape=circle];");
    for c in 0..shape.cells() {
        let (i, j) = shape.coords(c);
        let _ = writeln!(out, "  c{} [label=\"{}\", pos=\"{},{}!\"];", c + 1, c + 1, j + 1, -(i as i64 + 1));
    }
    for c in 0..shape.cells() {
        let t = g.perm().apply(c);
        if t != c {
            let _ = writeln!(out, "  c{} -> c{};", c + 1, t + 1);
        }
    }
    out.push_str("}\n");
    out
}
