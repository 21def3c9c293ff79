use std::collections::HashMap;

use num_bigint::BigUint;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{diagram_stats, DiagramStats};
use crate::perm::{
    count_conjugacy_orbits, factorial, product_group, GridPermutation, GridShape, PermError, Permutation, Permutations,
};

/// Upper bound on the number of permutations a catalog may enumerate.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("shape ({n},{m}) is too large to enumerate")]
    ShapeTooLarge { n: usize, m: usize },
    #[error("malformed catalog: {0}")]
    MalformedCatalog(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    All,
    CyclicOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub canonical_rep: GridPermutation,
    pub orbit_size: usize,
    pub stats: DiagramStats,
    pub minimal_variety: bool,
    pub inverse_class: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCatalog {
    pub shape: GridShape,
    pub scope: Scope,
    pub entries: Vec<CatalogEntry>,
}

impl OrbitCatalog {
    /// Entry index of the orbit containing `g`.
    pub fn class_of(&self, g: &GridPermutation) -> Result<Option<usize>, ClassifyError> {
        let rep = canonical_rep(g)?;
        Ok(self.entries.iter().position(|e| e.canonical_rep == rep))
    }

    pub fn total_size(&self) -> usize {
        self.entries.iter().map(|e| e.orbit_size).sum()
    }

    pub fn to_json(&self) -> String {
        let doc = CatalogDoc {
            provenance: Provenance {
                tool: "kgt".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                generator: "conjugacy_orbits".into(),
            },
            shape: [self.shape.n, self.shape.m],
            scope: self.scope,
            entries: self
                .entries
                .iter()
                .map(|e| EntryDoc {
                    rep: e.canonical_rep.to_string(),
                    orbit_size: e.orbit_size,
                    stats: e.stats.clone(),
                    minimal_variety: e.minimal_variety,
                    inverse_class: e.inverse_class,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("catalog serializes");
        text.push('\n');
        text
    }

    /// Reads a catalog written by `to_json`, recomputing the derived fields
    /// and rejecting files whose stored values disagree with them.
    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let doc: CatalogDocIn =
            serde_json::from_str(text).map_err(|e| ClassifyError::MalformedCatalog(e.to_string()))?;
        let shape = GridShape::new(doc.shape[0], doc.shape[1])?;
        let mut entries = Vec::with_capacity(doc.entries.len());
        for e in doc.entries {
            let rep = GridPermutation::parse(shape, &e.rep)?;
            let stats = diagram_stats(&rep);
            let entry = CatalogEntry {
                minimal_variety: rep.perm().is_full_cycle(),
                canonical_rep: rep,
                orbit_size: e.orbit_size,
                stats,
                inverse_class: e.inverse_class,
            };
            entries.push(entry);
        }
        if entries.iter().any(|e| e.inverse_class >= entries.len()) {
            return Err(ClassifyError::MalformedCatalog("inverse_class out of range".into()));
        }
        Ok(OrbitCatalog {
            shape,
            scope: doc.scope,
            entries,
        })
    }
}

#[derive(Serialize)]
struct CatalogDoc {
    provenance: Provenance,
    shape: [usize; 2],
    scope: Scope,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct Provenance {
    tool: String,
    version: String,
    generator: String,
}

#[derive(Serialize)]
struct EntryDoc {
    rep: String,
    orbit_size: usize,
    stats: DiagramStats,
    minimal_variety: bool,
    inverse_class: usize,
}

#[derive(Deserialize)]
struct CatalogDocIn {
    shape: [usize; 2],
    scope: Scope,
    entries: Vec<EntryDocIn>,
}

#[derive(Deserialize)]
struct EntryDocIn {
    rep: String,
    orbit_size: usize,
    inverse_class: usize,
}

fn check_enumerable(shape: GridShape, scope: Scope) -> Result<(), ClassifyError> {
    let k = shape.cells();
    let too_large = ClassifyError::ShapeTooLarge { n: shape.n, m: shape.m };
    if k > 20 || shape.ensure_enumerable().is_err() {
        return Err(too_large);
    }
    let count = match scope {
        Scope::All => factorial(k),
        Scope::CyclicOnly => factorial(k.saturating_sub(1)),
    };
    if count > ENUMERATION_LIMIT {
        return Err(too_large);
    }
    Ok(())
}

fn conjugators(shape: GridShape) -> Result<Vec<Permutation>, ClassifyError> {
    Ok(product_group(shape)?.into_iter().map(|(_, _, g)| g.into_perm()).collect())
}

fn orbit_of(p: &Permutation, group: &[Permutation]) -> Vec<Permutation> {
    let mut orbit: Vec<Permutation> = group.iter().map(|c| p.conjugate_by(c)).collect();
    orbit.sort();
    orbit.dedup();
    orbit
}

/// Least image tuple among all conjugates by the embedded product group.
pub fn canonical_rep(g: &GridPermutation) -> Result<GridPermutation, ClassifyError> {
    let shape = g.shape();
    shape.ensure_enumerable().map_err(|_| ClassifyError::ShapeTooLarge { n: shape.n, m: shape.m })?;
    let group = conjugators(shape)?;
    let best = group
        .iter()
        .map(|c| g.perm().conjugate_by(c))
        .min()
        .expect("product group is nonempty");
    Ok(GridPermutation::new(shape, best)?)
}

/// Full cycles of `S_k` listed by their cycle sequence starting at 0.
fn full_cycles(k: usize) -> impl Iterator<Item = Permutation> {
    Permutations::new(k.saturating_sub(1)).map(move |tail| {
        let mut cycle = vec![0];
        cycle.extend(tail.images().iter().map(|x| x + 1));
        Permutation::from_cycles(k, &[cycle]).expect("valid cycle")
    })
}

/// Partitions the permutations in `scope` into orbits of conjugation by the
/// embedded product group, sorted by canonical representative.
pub fn conjugacy_orbits(shape: GridShape, scope: Scope) -> Result<OrbitCatalog, ClassifyError> {
    check_enumerable(shape, scope)?;
    let k = shape.cells();
    let group = conjugators(shape)?;
    let mut visited = vec![false; factorial(k) as usize];
    let mut orbits: Vec<(Permutation, usize)> = Vec::new();
    let candidates: Box<dyn Iterator<Item = Permutation>> = match scope {
        Scope::All => Box::new(Permutations::new(k)),
        Scope::CyclicOnly => Box::new(full_cycles(k)),
    };
    for p in candidates {
        if visited[p.lex_rank() as usize] {
            continue;
        }
        let orbit = orbit_of(&p, &group);
        for q in &orbit {
            visited[q.lex_rank() as usize] = true;
        }
        orbits.push((orbit[0].clone(), orbit.len()));
    }
    orbits.sort();
    let index: HashMap<Permutation, usize> = orbits.iter().enumerate().map(|(i, (p, _))| (p.clone(), i)).collect();
    let mut entries = Vec::with_capacity(orbits.len());
    for (rep, size) in &orbits {
        let inv = orbit_of(&rep.inverse(), &group)[0].clone();
        let g = GridPermutation::new(shape, rep.clone())?;
        entries.push(CatalogEntry {
            stats: diagram_stats(&g),
            minimal_variety: rep.is_full_cycle(),
            canonical_rep: g,
            orbit_size: *size,
            inverse_class: index[&inv],
        });
    }
    Ok(OrbitCatalog { shape, scope, entries })
}

/// `flip ∘ θ⁻¹ ∘ flip` where `flip(i,j) = (j,i)`: the relation obtained by
/// exchanging the two generator families.
pub fn swap_generator_families(g: &GridPermutation) -> GridPermutation {
    g.inverse().transpose()
}

/// Isomorphism classes of the semigroups. For square grids, orbits related by
/// exchanging the two generator families are merged.
pub fn count_semigroup_classes(shape: GridShape) -> Result<BigUint, ClassifyError> {
    if shape.n != shape.m {
        return Ok(count_conjugacy_orbits(shape)?);
    }
    let catalog = conjugacy_orbits(shape, Scope::All)?;
    let index: HashMap<&GridPermutation, usize> = catalog
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (&e.canonical_rep, i))
        .collect();
    let mut uf = UnionFind::<usize>::new(catalog.entries.len());
    for (i, e) in catalog.entries.iter().enumerate() {
        let partner = canonical_rep(&swap_generator_families(&e.canonical_rep))?;
        uf.union(i, index[&partner]);
    }
    let roots: std::collections::HashSet<usize> = (0..catalog.entries.len()).map(|i| uf.find(i)).collect();
    Ok(BigUint::from(roots.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InversePairing {
    pub self_paired: usize,
    pub swapped_pairs: usize,
}

pub fn inverse_pairing_summary(catalog: &OrbitCatalog) -> InversePairing {
    let mut self_paired = 0;
    let mut swapped = 0;
    for (i, e) in catalog.entries.iter().enumerate() {
        if e.inverse_class == i {
            self_paired += 1;
        } else if e.inverse_class > i {
            swapped += 1;
        }
    }
    InversePairing {
        self_paired,
        swapped_pairs: swapped,
    }
}
