use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on `n! * m!` for routines that enumerate the product group.
pub const PRODUCT_GROUP_LIMIT: u64 = 10_000_000;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("index {0} appears more than once")]
    RepeatedIndex(usize),
    #[error("index {index} is outside 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("malformed permutation text: {0}")]
    MalformedSyntax(String),
    #[error("expected a permutation of size {expected}, found size {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("grid shape must have n >= 1 and m >= 1, got ({n},{m})")]
    InvalidShape { n: usize, m: usize },
    #[error("shape ({n},{m}) is too large to enumerate")]
    ShapeTooLarge { n: usize, m: usize },
}

/// A bijection of `{0..k}` stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(size: usize) -> Self {
        Permutation {
            images: (0..size).collect(),
        }
    }

    /// Builds a permutation from 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let size = images.len();
        let mut seen = vec![false; size];
        for &x in &images {
            if x >= size {
                return Err(PermError::IndexOutOfRange { index: x + 1, size });
            }
            if seen[x] {
                return Err(PermError::RepeatedIndex(x + 1));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation from 1-based images, e.g. `[2,3,6,1,4,5]`.
    pub fn from_one_based(images: &[usize]) -> Result<Self, PermError> {
        let size = images.len();
        let mut zero = Vec::with_capacity(size);
        for &x in images {
            if x == 0 || x > size {
                return Err(PermError::IndexOutOfRange { index: x, size });
            }
            zero.push(x - 1);
        }
        Self::from_images(zero)
    }

    /// Builds a permutation from disjoint cycles of 0-based points.
    pub fn from_cycles(size: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..size).collect();
        let mut used = vec![false; size];
        for cycle in cycles {
            for &x in cycle {
                if x >= size {
                    return Err(PermError::IndexOutOfRange { index: x + 1, size });
                }
                if used[x] {
                    return Err(PermError::RepeatedIndex(x + 1));
                }
                used[x] = true;
            }
            for (k, &x) in cycle.iter().enumerate() {
                images[x] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_based_images(&self) -> Vec<usize> {
        self.images.iter().map(|x| x + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.size(), other.size(), "composing permutations of different sizes");
        Permutation {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.size()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    /// `self^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> Permutation {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Permutation::identity(self.size());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            sq = sq.compose(&sq);
            e >>= 1;
        }
        acc
    }

    /// `c ∘ self ∘ c⁻¹`.
    pub fn conjugate_by(&self, c: &Permutation) -> Permutation {
        let mut images = vec![0; self.size()];
        for i in 0..self.size() {
            images[c.images[i]] = c.images[self.images[i]];
        }
        Permutation { images }
    }

    /// All cycles including fixed points, each starting at its least point,
    /// sorted by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_parts(self.cycles().iter().map(Vec::len).collect())
    }

    pub fn is_full_cycle(&self) -> bool {
        let k = self.size();
        k > 0 && self.cycles().len() == 1
    }

    pub fn fixed_point_count(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &x)| *i == x).count()
    }

    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .fold(1u64, |acc, c| num_integer::lcm(acc, c.len() as u64))
    }

    /// Position of the image tuple in lexicographic order of `S_k`.
    pub fn lex_rank(&self) -> u64 {
        let k = self.size();
        let mut rank = 0u64;
        let mut remaining: Vec<usize> = (0..k).collect();
        for (pos, &x) in self.images.iter().enumerate() {
            let idx = remaining.iter().position(|&r| r == x).expect("bijection");
            rank += idx as u64 * factorial(k - 1 - pos);
            remaining.remove(idx);
        }
        rank
    }

    pub fn parse(text: &str, size: usize) -> Result<Self, PermError> {
        parse_permutation(text, size)
    }
}

impl fmt::Display for Permutation {
    /// Canonical 1-based cycle notation with fixed points omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for cycle in self.cycles() {
            if cycle.len() < 2 {
                continue;
            }
            wrote = true;
            write!(f, "(")?;
            for (k, x) in cycle.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

/// Parses cycle notation such as `"(1 2 4 3)"`, `"(1 3)(2 4)"`, `"(124653)"`
/// or `"()"`, or an image list such as `"[2,3,6,1,4,5]"`.
///
/// A cycle written without separators is read digit by digit when `size < 10`.
pub fn parse_permutation(text: &str, size: usize) -> Result<Permutation, PermError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(PermError::MalformedSyntax("empty input".into()));
    }
    if let Some(inner) = trimmed.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| PermError::MalformedSyntax(format!("unterminated image list in {trimmed:?}")))?;
        let mut images = Vec::new();
        for tok in inner.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: usize = tok
                .parse()
                .map_err(|_| PermError::MalformedSyntax(format!("bad index {tok:?}")))?;
            images.push(v);
        }
        if images.len() != size {
            return Err(PermError::SizeMismatch {
                expected: size,
                found: images.len(),
            });
        }
        return Permutation::from_one_based(&images);
    }

    let mut cycles = Vec::new();
    let mut rest = trimmed;
    while !rest.is_empty() {
        let body_start = rest
            .strip_prefix('(')
            .ok_or_else(|| PermError::MalformedSyntax(format!("expected '(' at {rest:?}")))?;
        let close = body_start
            .find(')')
            .ok_or_else(|| PermError::MalformedSyntax(format!("unterminated cycle in {trimmed:?}")))?;
        let body = &body_start[..close];
        if body.contains('(') {
            return Err(PermError::MalformedSyntax(format!("nested '(' in {trimmed:?}")));
        }
        cycles.push(parse_cycle_body(body, size)?);
        rest = body_start[close + 1..].trim_start();
    }
    Permutation::from_cycles(size, &cycles)
}

fn parse_cycle_body(body: &str, size: usize) -> Result<Vec<usize>, PermError> {
    let tokens: Vec<&str> = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    let mut points = Vec::new();
    let digitwise = tokens.len() == 1 && tokens[0].len() > 1 && size < 10;
    if digitwise {
        for ch in tokens[0].chars() {
            let d = ch
                .to_digit(10)
                .ok_or_else(|| PermError::MalformedSyntax(format!("bad character {ch:?}")))?;
            points.push(d as usize);
        }
    } else {
        for tok in tokens {
            let v: usize = tok
                .parse()
                .map_err(|_| PermError::MalformedSyntax(format!("bad index {tok:?}")))?;
            points.push(v);
        }
    }
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if p == 0 || p > size {
            return Err(PermError::IndexOutOfRange { index: p, size });
        }
        if out.contains(&(p - 1)) {
            return Err(PermError::RepeatedIndex(p));
        }
        out.push(p - 1);
    }
    Ok(out)
}

/// Cycle lengths sorted in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    pub fn from_parts(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

pub fn cycle_type(p: &Permutation) -> CycleType {
    p.cycle_type()
}

/// Order of the centralizer in `S_k` of any permutation with this cycle type:
/// the product of `a^k * k!` over part sizes `a` occurring `k` times.
pub fn centralizer_order(t: &CycleType) -> BigUint {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in t.parts() {
        *counts.entry(p).or_default() += 1;
    }
    let mut acc = BigUint::one();
    for (part, mult) in counts {
        acc *= BigUint::from(part).pow(mult as u32);
        acc *= big_factorial(mult);
    }
    acc
}

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

pub fn big_factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, x| acc * BigUint::from(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridShape {
    pub n: usize,
    pub m: usize,
}

impl GridShape {
    pub fn new(n: usize, m: usize) -> Result<Self, PermError> {
        if n == 0 || m == 0 {
            return Err(PermError::InvalidShape { n, m });
        }
        Ok(GridShape { n, m })
    }

    pub fn cells(&self) -> usize {
        self.n * self.m
    }

    /// Row-major cell index of 0-based `(row, col)`.
    pub fn cell(&self, row: usize, col: usize) -> usize {
        row * self.m + col
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.m, cell % self.m)
    }

    pub fn product_group_order(&self) -> u64 {
        factorial(self.n).saturating_mul(factorial(self.m))
    }

    pub fn ensure_enumerable(&self) -> Result<(), PermError> {
        if self.n > 20 || self.m > 20 || self.product_group_order() > PRODUCT_GROUP_LIMIT {
            return Err(PermError::ShapeTooLarge { n: self.n, m: self.m });
        }
        Ok(())
    }

    /// Swaps the roles of rows and columns.
    pub fn transpose(&self) -> GridShape {
        GridShape { n: self.m, m: self.n }
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n, self.m)
    }
}

/// A permutation of the cells of an `n x m` grid, cells numbered row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPermutation {
    shape: GridShape,
    perm: Permutation,
}

impl GridPermutation {
    pub fn new(shape: GridShape, perm: Permutation) -> Result<Self, PermError> {
        if perm.size() != shape.cells() {
            return Err(PermError::SizeMismatch {
                expected: shape.cells(),
                found: perm.size(),
            });
        }
        Ok(GridPermutation { shape, perm })
    }

    pub fn parse(shape: GridShape, text: &str) -> Result<Self, PermError> {
        let perm = parse_permutation(text, shape.cells())?;
        Self::new(shape, perm)
    }

    pub fn identity(shape: GridShape) -> Self {
        GridPermutation {
            shape,
            perm: Permutation::identity(shape.cells()),
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn into_perm(self) -> Permutation {
        self.perm
    }

    /// Image of 0-based `(row, col)`.
    pub fn apply_coords(&self, row: usize, col: usize) -> (usize, usize) {
        self.shape.coords(self.perm.apply(self.shape.cell(row, col)))
    }

    pub fn inverse(&self) -> GridPermutation {
        GridPermutation {
            shape: self.shape,
            perm: self.perm.inverse(),
        }
    }

    pub fn compose(&self, other: &GridPermutation) -> GridPermutation {
        assert_eq!(self.shape, other.shape, "composing grid permutations of different shapes");
        GridPermutation {
            shape: self.shape,
            perm: self.perm.compose(&other.perm),
        }
    }

    /// `c ∘ self ∘ c⁻¹`.
    pub fn conjugate_by(&self, c: &GridPermutation) -> GridPermutation {
        GridPermutation {
            shape: self.shape,
            perm: self.perm.conjugate_by(&c.perm),
        }
    }

    pub fn cycle_type(&self) -> CycleType {
        self.perm.cycle_type()
    }

    /// The same relation viewed on the transposed grid: `(i,j) -> (i',j')`
    /// becomes `(j,i) -> (j',i')`.
    pub fn transpose(&self) -> GridPermutation {
        let shape = self.shape;
        let t = shape.transpose();
        let mut images = vec![0; shape.cells()];
        for i in 0..shape.n {
            for j in 0..shape.m {
                let (a, b) = self.apply_coords(i, j);
                images[t.cell(j, i)] = t.cell(b, a);
            }
        }
        GridPermutation {
            shape: t,
            perm: Permutation { images },
        }
    }
}

impl fmt::Display for GridPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.perm.fmt(f)
    }
}

/// `(i,j) -> (sigma(i), tau(j))` on the `n x m` grid.
pub fn embed_product(sigma: &Permutation, tau: &Permutation) -> GridPermutation {
    let shape = GridShape {
        n: sigma.size(),
        m: tau.size(),
    };
    let mut images = Vec::with_capacity(shape.cells());
    for i in 0..shape.n {
        for j in 0..shape.m {
            images.push(shape.cell(sigma.apply(i), tau.apply(j)));
        }
    }
    GridPermutation {
        shape,
        perm: Permutation { images },
    }
}

/// Iterates `S_k` in lexicographic order of image tuples.
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Permutations {
    pub fn new(k: usize) -> Self {
        Permutations {
            next: Some((0..k).collect()),
        }
    }
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { images: current })
    }
}

/// Advances to the lexicographic successor; returns false at the last one.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All elements of `S_n x S_m` embedded in the grid, in lexicographic order
/// of `(sigma, tau)`, paired with their factors.
pub fn product_group(shape: GridShape) -> Result<Vec<(Permutation, Permutation, GridPermutation)>, PermError> {
    shape.ensure_enumerable()?;
    let taus: Vec<Permutation> = Permutations::new(shape.m).collect();
    let mut out = Vec::with_capacity(shape.product_group_order() as usize);
    for sigma in Permutations::new(shape.n) {
        for tau in &taus {
            let g = embed_product(&sigma, tau);
            out.push((sigma.clone(), tau.clone(), g));
        }
    }
    Ok(out)
}

/// Number of orbits of `S_n x S_m` acting by conjugation on `S_{nm}`, via the
/// average of centralizer orders over the group.
pub fn count_conjugacy_orbits(shape: GridShape) -> Result<BigUint, PermError> {
    shape.ensure_enumerable()?;
    let taus: Vec<Permutation> = Permutations::new(shape.m).collect();
    let sigmas: Vec<Permutation> = Permutations::new(shape.n).collect();
    let total: BigUint = sigmas
        .par_iter()
        .map(|sigma| {
            taus.iter().fold(BigUint::zero(), |acc, tau| {
                acc + centralizer_order(&embed_product(sigma, tau).cycle_type())
            })
        })
        .reduce(BigUint::zero, |a, b| a + b);
    let order = BigUint::from(shape.product_group_order());
    debug_assert!((&total % &order).is_zero());
    Ok(total / order)
}
