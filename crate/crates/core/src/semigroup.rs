use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{GridPermutation, GridShape, PermError, Permutation};

const CLASS_LETTERS: &[u8] = b"efghijklmnopqrstuvwxyz";

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("rank must be at least 2, got {0}")]
    InvalidRank(usize),
    #[error("generator multiplicities must be positive")]
    EmptyClass,
    #[error("missing relation for classes ({0},{1})")]
    MissingRelation(usize, usize),
    #[error("relation ({i},{j}) has size {found}, expected {expected}")]
    RelationSize { i: usize, j: usize, expected: usize, found: usize },
    #[error("rank >= 3 relations need a unique-factorization certificate before rewriting")]
    UncheckedHigherRankRelations,
    #[error("relations fail unique factorization: {0}")]
    NotUniquelyFactorizable(String),
    #[error("letter {0} is out of range")]
    LetterOutOfRange(String),
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("malformed relation set: {0}")]
    MalformedRelationSet(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// A generator: class `class` (0-based) and index `index` (0-based) inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub class: usize,
    pub index: usize,
}

impl Letter {
    pub fn new(class: usize, index: usize) -> Self {
        Letter { class, index }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match CLASS_LETTERS.get(self.class) {
            Some(&c) => write!(f, "{}{}", c as char, self.index + 1),
            None => write!(f, "x{}_{}", self.class + 1, self.index + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Parses `"e1 e2 f1 g2"`; class letters run e, f, g, ... in class order.
    pub fn parse(text: &str, rel: &RelationSet) -> Result<Word, SemigroupError> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let mut chars = tok.chars();
            let head = chars.next().ok_or_else(|| SemigroupError::MalformedWord(text.into()))?;
            let class = CLASS_LETTERS
                .iter()
                .position(|&c| c as char == head)
                .ok_or_else(|| SemigroupError::MalformedWord(format!("unknown class letter in {tok:?}")))?;
            let digits = chars.as_str().trim_start_matches('_');
            let index: usize = digits
                .parse()
                .map_err(|_| SemigroupError::MalformedWord(format!("bad index in {tok:?}")))?;
            if class >= rel.rank() || index == 0 || index > rel.multiplicities[class] {
                return Err(SemigroupError::LetterOutOfRange(tok.into()));
            }
            letters.push(Letter::new(class, index - 1));
        }
        Ok(Word { letters })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A word in factored form: one block of 0-based indices per class, classes in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalWord {
    blocks: Vec<Vec<usize>>,
}

impl NormalWord {
    pub fn unit(rank: usize) -> Self {
        NormalWord {
            blocks: vec![Vec::new(); rank],
        }
    }

    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Self {
        NormalWord { blocks }
    }

    /// Groups an already sorted letter sequence into blocks.
    fn from_sorted(rank: usize, letters: &[Letter]) -> Self {
        let mut blocks = vec![Vec::new(); rank];
        for l in letters {
            blocks[l.class].push(l.index);
        }
        NormalWord { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn rank(&self) -> usize {
        self.blocks.len()
    }

    pub fn degree(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn total_degree(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.blocks.iter().all(Vec::is_empty)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(c, b)| b.iter().map(move |&i| Letter::new(c, i)))
    }

    pub fn to_word(&self) -> Word {
        Word::new(self.letters().collect())
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_word().fmt(f)
    }
}

/// Relation permutations `theta_ij` for every pair of classes `i < j`.
///
/// Cell `(p,q)` of `theta_ij` (`p` in class `i`, `q` in class `j`) has index
/// `p * n_j + q`, and `theta_ij(p,q) = (p',q')` encodes `g_i[p] g_j[q] = g_j[q'] g_i[p']`.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationSet {
    multiplicities: Vec<usize>,
    relations: BTreeMap<(usize, usize), Permutation>,
    inverses: BTreeMap<(usize, usize), Permutation>,
    certified: bool,
}

impl RelationSet {
    /// Class indices in `relations` are 0-based.
    pub fn new(
        multiplicities: Vec<usize>,
        relations: BTreeMap<(usize, usize), Permutation>,
    ) -> Result<Self, SemigroupError> {
        let rank = multiplicities.len();
        if rank < 2 {
            return Err(SemigroupError::InvalidRank(rank));
        }
        if multiplicities.contains(&0) {
            return Err(SemigroupError::EmptyClass);
        }
        for i in 0..rank {
            for j in i + 1..rank {
                let p = relations
                    .get(&(i, j))
                    .ok_or(SemigroupError::MissingRelation(i + 1, j + 1))?;
                let expected = multiplicities[i] * multiplicities[j];
                if p.size() != expected {
                    return Err(SemigroupError::RelationSize {
                        i: i + 1,
                        j: j + 1,
                        expected,
                        found: p.size(),
                    });
                }
            }
        }
        if relations.len() != rank * (rank - 1) / 2 {
            return Err(SemigroupError::MalformedRelationSet("relation for an invalid class pair".into()));
        }
        let inverses = relations.iter().map(|(k, p)| (*k, p.inverse())).collect();
        Ok(RelationSet {
            multiplicities,
            relations,
            inverses,
            certified: rank == 2,
        })
    }

    pub fn from_grid(g: &GridPermutation) -> Self {
        let shape = g.shape();
        let mut relations = BTreeMap::new();
        relations.insert((0, 1), g.perm().clone());
        RelationSet::new(vec![shape.n, shape.m], relations).expect("grid permutation is a valid rank-2 relation")
    }

    pub fn to_grid(&self) -> Option<GridPermutation> {
        if self.rank() != 2 {
            return None;
        }
        let shape = GridShape {
            n: self.multiplicities[0],
            m: self.multiplicities[1],
        };
        GridPermutation::new(shape, self.relations[&(0, 1)].clone()).ok()
    }

    pub fn rank(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn relation(&self, i: usize, j: usize) -> &Permutation {
        &self.relations[&(i, j)]
    }

    pub fn relations(&self) -> impl Iterator<Item = ((usize, usize), &Permutation)> {
        self.relations.iter().map(|(k, p)| (*k, p))
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn alphabet(&self) -> Vec<Letter> {
        self.multiplicities
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| (0..n).map(move |i| Letter::new(c, i)))
            .collect()
    }

    /// Runs the unique-factorization check and marks the set as safe to rewrite.
    pub fn certify(mut self, max_len: usize) -> Result<Self, SemigroupError> {
        if self.rank() == 2 {
            return Ok(self);
        }
        let report = check_unique_factorization(&self, max_len);
        match report.witness {
            Some(w) if !report.holds => Err(SemigroupError::NotUniquelyFactorizable(w.to_string())),
            _ => {
                self.certified = true;
                Ok(self)
            }
        }
    }

    /// Rewrites an adjacent out-of-order pair `later earlier` (classes `j > i`)
    /// into `earlier' later'` using the defining relation read right to left.
    pub fn swap_out_of_order(&self, later: Letter, earlier: Letter) -> (Letter, Letter) {
        let (i, j) = (earlier.class, later.class);
        debug_assert!(i < j);
        let nj = self.multiplicities[j];
        let cell = earlier.index * nj + later.index;
        let pre = self.inverses[&(i, j)].apply(cell);
        (Letter::new(i, pre / nj), Letter::new(j, pre % nj))
    }

    /// Rewrites an in-order pair `earlier later` into `later' earlier'`.
    pub fn swap_in_order(&self, earlier: Letter, later: Letter) -> (Letter, Letter) {
        let (i, j) = (earlier.class, later.class);
        debug_assert!(i < j);
        let nj = self.multiplicities[j];
        let cell = earlier.index * nj + later.index;
        let img = self.relations[&(i, j)].apply(cell);
        (Letter::new(j, img % nj), Letter::new(i, img / nj))
    }

    fn check_letter(&self, l: &Letter) -> Result<(), SemigroupError> {
        if l.class >= self.rank() || l.index >= self.multiplicities[l.class] {
            return Err(SemigroupError::LetterOutOfRange(format!("{l}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = RelationSetDoc {
            rank: self.rank(),
            multiplicities: self.multiplicities.clone(),
            relations: self
                .relations
                .iter()
                .map(|((i, j), p)| (format!("{},{}", i + 1, j + 1), p.to_string()))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("relation set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SemigroupError> {
        let doc: RelationSetDoc =
            serde_json::from_str(text).map_err(|e| SemigroupError::MalformedRelationSet(e.to_string()))?;
        if doc.rank != doc.multiplicities.len() {
            return Err(SemigroupError::MalformedRelationSet(format!(
                "rank {} does not match {} multiplicities",
                doc.rank,
                doc.multiplicities.len()
            )));
        }
        let mut relations = BTreeMap::new();
        for (key, text) in &doc.relations {
            let (a, b) = key
                .split_once(',')
                .ok_or_else(|| SemigroupError::MalformedRelationSet(format!("bad pair key {key:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1 && v <= doc.rank)
                    .ok_or_else(|| SemigroupError::MalformedRelationSet(format!("bad pair key {key:?}")))
            };
            let (i, j) = (parse(a)? - 1, parse(b)? - 1);
            if i >= j {
                return Err(SemigroupError::MalformedRelationSet(format!("pair {key:?} must have i < j")));
            }
            let size = doc.multiplicities.get(i).copied().unwrap_or(0) * doc.multiplicities.get(j).copied().unwrap_or(0);
            relations.insert((i, j), Permutation::parse(text, size)?);
        }
        RelationSet::new(doc.multiplicities, relations)
    }
}

#[derive(Serialize, Deserialize)]
struct RelationSetDoc {
    rank: usize,
    multiplicities: Vec<usize>,
    relations: BTreeMap<String, String>,
}

fn ensure_rewritable(rel: &RelationSet) -> Result<(), SemigroupError> {
    if !rel.certified {
        return Err(SemigroupError::UncheckedHigherRankRelations);
    }
    Ok(())
}

/// Sorts letters into class order, always rewriting the leftmost inversion.
fn sort_letters(rel: &RelationSet, letters: &mut [Letter]) {
    let mut i = 0;
    while i + 1 < letters.len() {
        if letters[i].class > letters[i + 1].class {
            let (a, b) = rel.swap_out_of_order(letters[i], letters[i + 1]);
            letters[i] = a;
            letters[i + 1] = b;
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
}

pub fn normal_form(rel: &RelationSet, w: &Word) -> Result<NormalWord, SemigroupError> {
    ensure_rewritable(rel)?;
    for l in &w.letters {
        rel.check_letter(l)?;
    }
    let mut letters = w.letters.clone();
    sort_letters(rel, &mut letters);
    Ok(NormalWord::from_sorted(rel.rank(), &letters))
}

pub fn multiply(rel: &RelationSet, a: &NormalWord, b: &NormalWord) -> Result<NormalWord, SemigroupError> {
    ensure_rewritable(rel)?;
    let mut letters: Vec<Letter> = a.letters().chain(b.letters()).collect();
    for l in &letters {
        rel.check_letter(l)?;
    }
    sort_letters(rel, &mut letters);
    Ok(NormalWord::from_sorted(rel.rank(), &letters))
}

/// Product of a letter on the left or right of a normal word.
pub(crate) fn multiply_letter(rel: &RelationSet, w: &NormalWord, g: Letter, on_left: bool) -> NormalWord {
    let mut letters: Vec<Letter> = Vec::with_capacity(w.total_degree() + 1);
    if on_left {
        letters.push(g);
        letters.extend(w.letters());
    } else {
        letters.extend(w.letters());
        letters.push(g);
    }
    sort_letters(rel, &mut letters);
    NormalWord::from_sorted(rel.rank(), &letters)
}

/// Two rewrite sequences from one word ending at distinct sorted words.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationWitness {
    pub word: Word,
    pub first_path: Vec<usize>,
    pub second_path: Vec<usize>,
    pub first: NormalWord,
    pub second: NormalWord,
}

impl FactorizationWitness {
    /// Re-applies both rewrite paths and checks they end at the recorded,
    /// distinct, fully sorted words.
    pub fn replay(&self, rel: &RelationSet) -> bool {
        let run = |path: &[usize]| -> Option<NormalWord> {
            let mut letters = self.word.letters.clone();
            for &p in path {
                if p + 1 >= letters.len() || letters[p].class <= letters[p + 1].class {
                    return None;
                }
                let (a, b) = rel.swap_out_of_order(letters[p], letters[p + 1]);
                letters[p] = a;
                letters[p + 1] = b;
            }
            if letters.windows(2).any(|w| w[0].class > w[1].class) {
                return None;
            }
            Some(NormalWord::from_sorted(rel.rank(), &letters))
        };
        match (run(&self.first_path), run(&self.second_path)) {
            (Some(a), Some(b)) => a == self.first && b == self.second && a != b,
            _ => false,
        }
    }
}

impl fmt::Display for FactorizationWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "word \"{}\" rewrites to both \"{}\" and \"{}\"",
            self.word, self.first, self.second
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationReport {
    pub holds: bool,
    pub witness: Option<FactorizationWitness>,
}

/// Every sorted word reachable from a word, with one rewrite path to each.
struct RewriteExplorer<'a> {
    rel: &'a RelationSet,
    memo: HashMap<Vec<Letter>, Vec<(Vec<Letter>, Vec<usize>)>>,
}

impl<'a> RewriteExplorer<'a> {
    fn new(rel: &'a RelationSet) -> Self {
        RewriteExplorer {
            rel,
            memo: HashMap::new(),
        }
    }

    fn endpoints(&mut self, letters: &[Letter]) -> Vec<(Vec<Letter>, Vec<usize>)> {
        if let Some(hit) = self.memo.get(letters) {
            return hit.clone();
        }
        let mut found: BTreeMap<Vec<Letter>, Vec<usize>> = BTreeMap::new();
        let mut any_site = false;
        for p in 0..letters.len().saturating_sub(1) {
            if letters[p].class <= letters[p + 1].class {
                continue;
            }
            any_site = true;
            let mut next = letters.to_vec();
            let (a, b) = self.rel.swap_out_of_order(letters[p], letters[p + 1]);
            next[p] = a;
            next[p + 1] = b;
            for (end, path) in self.endpoints(&next) {
                found.entry(end).or_insert_with(|| {
                    let mut full = vec![p];
                    full.extend(path);
                    full
                });
            }
        }
        if !any_site {
            found.insert(letters.to_vec(), Vec::new());
        }
        let out: Vec<_> = found.into_iter().collect();
        self.memo.insert(letters.to_vec(), out.clone());
        out
    }

    fn witness_for(&mut self, letters: &[Letter]) -> Option<FactorizationWitness> {
        let ends = self.endpoints(letters);
        if ends.len() < 2 {
            return None;
        }
        let rank = self.rel.rank();
        Some(FactorizationWitness {
            word: Word::new(letters.to_vec()),
            first_path: ends[0].1.clone(),
            second_path: ends[1].1.clone(),
            first: NormalWord::from_sorted(rank, &ends[0].0),
            second: NormalWord::from_sorted(rank, &ends[1].0),
        })
    }
}

/// Exhaustively checks that every word of length at most `max_len` reaches a
/// single sorted word under all rewrite orders.
pub fn check_confluence(rel: &RelationSet, max_len: usize) -> FactorizationReport {
    let alphabet = rel.alphabet();
    let mut explorer = RewriteExplorer::new(rel);
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 1..=max_len {
        let mut next_layer = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for &g in &alphabet {
                let mut v = w.clone();
                v.push(g);
                if let Some(witness) = explorer.witness_for(&v) {
                    return FactorizationReport {
                        holds: false,
                        witness: Some(witness),
                    };
                }
                next_layer.push(v);
            }
        }
        layer = next_layer;
    }
    FactorizationReport {
        holds: true,
        witness: None,
    }
}

/// Checks every length-3 word `g_k g_j g_i` (`i < j < k`) along the two
/// rewrite orders that sort it.
pub fn check_triples(rel: &RelationSet) -> FactorizationReport {
    let rank = rel.rank();
    let n = rel.multiplicities();
    for i in 0..rank {
        for j in i + 1..rank {
            for k in j + 1..rank {
                for c in 0..n[k] {
                    for b in 0..n[j] {
                        for a in 0..n[i] {
                            let word = vec![Letter::new(k, c), Letter::new(j, b), Letter::new(i, a)];
                            let first_path = vec![0, 1, 0];
                            let second_path = vec![1, 0, 1];
                            let run = |path: &[usize]| {
                                let mut w = word.clone();
                                for &p in path {
                                    let (x, y) = rel.swap_out_of_order(w[p], w[p + 1]);
                                    w[p] = x;
                                    w[p + 1] = y;
                                }
                                NormalWord::from_sorted(rank, &w)
                            };
                            let first = run(&first_path);
                            let second = run(&second_path);
                            if first != second {
                                return FactorizationReport {
                                    holds: false,
                                    witness: Some(FactorizationWitness {
                                        word: Word::new(word),
                                        first_path,
                                        second_path,
                                        first,
                                        second,
                                    }),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    FactorizationReport {
        holds: true,
        witness: None,
    }
}

/// Rank 2 always factors uniquely. Higher ranks run the length-3 interchange
/// test and then the bounded exhaustive search.
pub fn check_unique_factorization(rel: &RelationSet, max_len: usize) -> FactorizationReport {
    if rel.rank() == 2 {
        return FactorizationReport {
            holds: true,
            witness: None,
        };
    }
    let triples = check_triples(rel);
    if !triples.holds {
        return triples;
    }
    check_confluence(rel, max_len)
}

/// Relation set of the opposite semigroup: each `theta_ij` is inverted.
pub fn opposite(rel: &RelationSet) -> RelationSet {
    RelationSet {
        multiplicities: rel.multiplicities.clone(),
        relations: rel.inverses.clone(),
        inverses: rel.relations.clone(),
        certified: rel.certified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutations;
    use proptest::prelude::*;

    fn grid(n: usize, m: usize, text: &str) -> RelationSet {
        RelationSet::from_grid(&GridPermutation::parse(GridShape::new(n, m).unwrap(), text).unwrap())
    }

    fn rank3(rels: [&str; 3]) -> RelationSet {
        let mut relations = BTreeMap::new();
        for (k, key) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            relations.insert(key, Permutation::parse(rels[k], 4).unwrap());
        }
        RelationSet::new(vec![2, 2, 2], relations).unwrap()
    }

    #[test]
    fn single_relation_rewrite() {
        let rel = grid(2, 2, "(1 2 3 4)");
        let w = Word::parse("f2 e1", &rel).unwrap();
        let nf = normal_form(&rel, &w).unwrap();
        assert_eq!(nf.to_string(), "e1 f1");
        let prod = multiply(
            &rel,
            &NormalWord::from_blocks(vec![vec![], vec![1]]),
            &NormalWord::from_blocks(vec![vec![0], vec![]]),
        )
        .unwrap();
        assert_eq!(prod, nf);
    }

    #[test]
    fn sorted_words_are_unchanged() {
        let rel = grid(2, 2, "(1 2 3 4)");
        let w = Word::parse("e1 e2 f1", &rel).unwrap();
        let nf = normal_form(&rel, &w).unwrap();
        assert_eq!(nf.to_word(), w);
        assert_eq!(nf.degree(), vec![2, 1]);
    }

    #[test]
    fn identity_relation_commutes_letters() {
        let rel = grid(2, 2, "()");
        let nf = normal_form(&rel, &Word::parse("f1 e2", &rel).unwrap()).unwrap();
        assert_eq!(nf.to_string(), "e2 f1");
    }

    #[test]
    fn unit_is_two_sided_identity() {
        let rel = grid(2, 3, "(1 2 3 6 5 4)");
        let w = normal_form(&rel, &Word::parse("f3 e2 f1", &rel).unwrap()).unwrap();
        let u = NormalWord::unit(2);
        assert_eq!(multiply(&rel, &u, &w).unwrap(), w);
        assert_eq!(multiply(&rel, &w, &u).unwrap(), w);
    }

    #[test]
    fn word_parse_errors() {
        let rel = grid(2, 2, "()");
        assert!(matches!(Word::parse("e3", &rel), Err(SemigroupError::LetterOutOfRange(_))));
        assert!(matches!(Word::parse("g1", &rel), Err(SemigroupError::LetterOutOfRange(_))));
        assert!(matches!(Word::parse("q1", &rel), Err(SemigroupError::LetterOutOfRange(_))));
        assert!(matches!(Word::parse("ex", &rel), Err(SemigroupError::MalformedWord(_))));
        assert!(matches!(Word::parse("A1", &rel), Err(SemigroupError::MalformedWord(_))));
    }

    #[test]
    fn higher_rank_needs_certificate() {
        let rel = rank3(["()", "()", "()"]);
        let w = Word::parse("g1 e1", &rel).unwrap();
        assert_eq!(normal_form(&rel, &w), Err(SemigroupError::UncheckedHigherRankRelations));
        let rel = rel.certify(4).unwrap();
        assert_eq!(normal_form(&rel, &w).unwrap().to_string(), "e1 g1");
    }

    #[test]
    fn rank2_always_factors_uniquely() {
        let rel = grid(2, 3, "(1 2 4 6 5 3)");
        assert!(check_unique_factorization(&rel, 6).holds);
    }

    #[test]
    fn rank3_identity_relations_factor_uniquely() {
        let rel = rank3(["()", "()", "()"]);
        let report = check_unique_factorization(&rel, 5);
        assert!(report.holds);
        assert!(report.witness.is_none());
    }

    // Words of length 3 equal in the semigroup, by closing under the defining
    // relations in both directions, never through the sorting rewrite.
    fn sorted_words_in_class(rel: &RelationSet, start: Vec<Letter>) -> Vec<Vec<Letter>> {
        let mut seen = vec![start.clone()];
        let mut stack = vec![start];
        while let Some(w) = stack.pop() {
            for p in 0..w.len() - 1 {
                let (x, y) = (w[p], w[p + 1]);
                let swapped = if x.class < y.class {
                    let cell = x.index * rel.multiplicities()[y.class] + y.index;
                    let img = rel.relation(x.class, y.class).apply(cell);
                    let ny = rel.multiplicities()[y.class];
                    Some((Letter::new(y.class, img % ny), Letter::new(x.class, img / ny)))
                } else if x.class > y.class {
                    let ny = rel.multiplicities()[x.class];
                    let target = y.index * ny + x.index;
                    let pre = rel.relation(y.class, x.class).inverse().apply(target);
                    Some((Letter::new(y.class, pre / ny), Letter::new(x.class, pre % ny)))
                } else {
                    None
                };
                if let Some((a, b)) = swapped {
                    let mut v = w.clone();
                    v[p] = a;
                    v[p + 1] = b;
                    if !seen.contains(&v) {
                        seen.push(v.clone());
                        stack.push(v);
                    }
                }
            }
        }
        seen.into_iter()
            .filter(|w| w.windows(2).all(|p| p[0].class <= p[1].class))
            .collect()
    }

    #[test]
    fn rank3_search_finds_failures_with_replayable_witness() {
        let perms: Vec<Permutation> = Permutations::new(4).collect();
        let mut failing = None;
        'outer: for a in &perms {
            for b in &perms {
                for c in &perms {
                    let mut relations = BTreeMap::new();
                    relations.insert((0, 1), a.clone());
                    relations.insert((0, 2), b.clone());
                    relations.insert((1, 2), c.clone());
                    let rel = RelationSet::new(vec![2, 2, 2], relations).unwrap();
                    let report = check_triples(&rel);
                    if !report.holds {
                        failing = Some((rel, report));
                        break 'outer;
                    }
                }
            }
        }
        let (rel, report) = failing.expect("some triple fails the interchange test");
        let w = report.witness.unwrap();
        assert_eq!(w.word.len(), 3);
        assert!(w.replay(&rel));
        // oracle: the two sorted words lie in one relation class
        let class = sorted_words_in_class(&rel, w.word.letters.clone());
        assert!(class.len() >= 2);
        assert!(class.contains(&w.first.to_word().letters));
        assert!(class.contains(&w.second.to_word().letters));
        assert!(!check_unique_factorization(&rel, 4).holds);
        assert!(matches!(rel.certify(4), Err(SemigroupError::NotUniquelyFactorizable(_))));
    }

    #[test]
    fn corrupted_witness_does_not_replay() {
        let rel = rank3(["()", "()", "()"]);
        let w = FactorizationWitness {
            word: Word::new(vec![Letter::new(2, 0), Letter::new(1, 0), Letter::new(0, 0)]),
            first_path: vec![0, 1, 0],
            second_path: vec![1, 0, 1],
            first: NormalWord::from_blocks(vec![vec![0], vec![0], vec![0]]),
            second: NormalWord::from_blocks(vec![vec![0], vec![0], vec![0]]),
        };
        assert!(!w.replay(&rel));
    }

    #[test]
    fn confluence_for_every_2x2_relation() {
        for p in Permutations::new(4) {
            let rel = RelationSet::from_grid(&GridPermutation::new(GridShape::new(2, 2).unwrap(), p).unwrap());
            assert!(check_confluence(&rel, 6).holds);
        }
    }

    #[test]
    fn opposite_inverts() {
        let id = grid(2, 2, "()");
        assert_eq!(opposite(&id), id);
        let rel = grid(2, 3, "(124653)");
        assert_eq!(opposite(&rel).to_grid().unwrap().to_string(), "(1 3 5 6 4 2)");
        assert_eq!(opposite(&rel).relation(0, 1), &Permutation::parse("(135642)", 6).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"rank": 3, "multiplicities": [2,2,2], "relations": {"1,2": "(1 2 3 4)", "1,3": "()", "2,3": "(1 3)"}}"#;
        let rel = RelationSet::from_json(text).unwrap();
        assert_eq!(rel.relation(0, 1).to_string(), "(1 2 3 4)");
        assert_eq!(rel.relation(1, 2).to_string(), "(1 3)");
        let back = RelationSet::from_json(&rel.to_json()).unwrap();
        assert_eq!(back, rel);
        assert!(matches!(
            RelationSet::from_json(r#"{"rank": 3, "multiplicities": [2,2,2], "relations": {"1,2": "()"}}"#),
            Err(SemigroupError::MissingRelation(1, 3))
        ));
        assert!(matches!(
            RelationSet::from_json(r#"{"rank": 2, "multiplicities": [2,2], "relations": {"2,1": "()"}}"#),
            Err(SemigroupError::MalformedRelationSet(_))
        ));
    }

    fn arb_grid_rel() -> impl Strategy<Value = RelationSet> {
        (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| {
            Just((0..n * m).collect::<Vec<_>>()).prop_shuffle().prop_map(move |v| {
                let p = Permutation::from_images(v).unwrap();
                RelationSet::from_grid(&GridPermutation::new(GridShape::new(n, m).unwrap(), p).unwrap())
            })
        })
    }

    fn arb_word(rel: &RelationSet, max_len: usize) -> impl Strategy<Value = Word> {
        let alphabet = rel.alphabet();
        proptest::collection::vec(proptest::sample::select(alphabet), 0..=max_len).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn normal_form_laws(
            (rel, u, v) in arb_grid_rel().prop_flat_map(|rel| {
                let a = arb_word(&rel, 6);
                let b = arb_word(&rel, 6);
                (Just(rel), a, b)
            })
        ) {
            let nu = normal_form(&rel, &u).unwrap();
            let nv = normal_form(&rel, &v).unwrap();
            prop_assert_eq!(normal_form(&rel, &nu.to_word()).unwrap(), nu.clone());
            let prod = multiply(&rel, &nu, &nv).unwrap();
            let expected: Vec<usize> = nu.degree().iter().zip(nv.degree()).map(|(a, b)| a + b).collect();
            prop_assert_eq!(prod.degree(), expected);
            let mut cat = u.letters.clone();
            cat.extend(v.letters.clone());
            prop_assert_eq!(normal_form(&rel, &Word::new(cat)).unwrap(), prod);
        }

        #[test]
        fn opposite_is_an_involution(rel in arb_grid_rel()) {
            prop_assert_eq!(opposite(&opposite(&rel)), rel);
        }
    }
}
