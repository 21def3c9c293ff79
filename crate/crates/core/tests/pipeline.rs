use kgt_core::classify::{conjugacy_orbits, OrbitCatalog, Scope};
use kgt_core::equiv::{check_bigraded_iso, decide_product_unitary_equivalence, replay_verdict, Filter, Status, Witness};
use kgt_core::perm::{GridPermutation, GridShape, Permutations};
use kgt_core::semigroup::{multiply, NormalWord, RelationSet};

fn grid(n: usize, m: usize, text: &str) -> GridPermutation {
    GridPermutation::parse(GridShape::new(n, m).unwrap(), text).unwrap()
}

fn words_up_to(rel: &RelationSet, d: usize) -> Vec<NormalWord> {
    let n = rel.multiplicities();
    let mut out = Vec::new();
    for a in 0..=d {
        for b in 0..=d - a {
            let mut blocks = [(vec![0usize; a], n[0]), (vec![0usize; b], n[1])];
            // enumerate every index assignment as a mixed-radix counter
            loop {
                out.push(NormalWord::from_blocks(blocks.iter().map(|(v, _)| v.clone()).collect()));
                let mut carry = true;
                for (v, base) in blocks.iter_mut().rev() {
                    for x in v.iter_mut().rev() {
                        if !carry {
                            break;
                        }
                        *x += 1;
                        if *x == *base {
                            *x = 0;
                        } else {
                            carry = false;
                        }
                    }
                }
                if carry {
                    break;
                }
            }
        }
    }
    out
}

#[test]
fn semigroups_cancel_on_both_sides() {
    for p in Permutations::new(4) {
        let rel = RelationSet::from_grid(&GridPermutation::new(GridShape::new(2, 2).unwrap(), p).unwrap());
        let words = words_up_to(&rel, 2);
        for a in &words {
            let mut left: Vec<NormalWord> = words.iter().map(|b| multiply(&rel, a, b).unwrap()).collect();
            let mut right: Vec<NormalWord> = words.iter().map(|b| multiply(&rel, b, a).unwrap()).collect();
            left.sort();
            left.dedup();
            right.sort();
            right.dedup();
            assert_eq!(left.len(), words.len());
            assert_eq!(right.len(), words.len());
        }
    }
}

#[test]
fn non_gaussian_witness_is_found_and_checked() {
    let (theta, tau) = (grid(2, 3, "(3 4 6)"), grid(2, 3, "(3 6 4)"));
    let v = decide_product_unitary_equivalence(&theta, &tau).unwrap();
    assert_eq!(v.status, Status::Equivalent);
    assert_eq!(v.certificate.as_ref().unwrap().filter, Filter::NumericUnitary);
    let w = v.witness.as_ref().unwrap();
    assert!(matches!(w, Witness::Numeric { .. }));
    assert!(w.verify(&theta, &tau));
    let (a, b) = w.matrices();
    assert!(check_bigraded_iso(&a, &b, &theta, &tau, 4).unwrap());
    assert!(replay_verdict(&theta, &tau, &v, 3).is_confirmed());
}

#[test]
fn catalog_json_round_trip() {
    let shape = GridShape::new(2, 3).unwrap();
    for scope in [Scope::All, Scope::CyclicOnly] {
        let cat = conjugacy_orbits(shape, scope).unwrap();
        let back = OrbitCatalog::from_json(&cat.to_json()).unwrap();
        assert_eq!(back.entries.len(), cat.entries.len());
        for (x, y) in back.entries.iter().zip(&cat.entries) {
            assert_eq!(x.canonical_rep, y.canonical_rep);
            assert_eq!(x.orbit_size, y.orbit_size);
            assert_eq!(x.stats, y.stats);
        }
    }
}

#[test]
fn verdicts_are_symmetric_over_the_2x2_catalog() {
    let reps: Vec<GridPermutation> = conjugacy_orbits(GridShape::new(2, 2).unwrap(), Scope::All)
        .unwrap()
        .entries
        .into_iter()
        .map(|e| e.canonical_rep)
        .collect();
    for a in &reps {
        for b in &reps {
            let ab = decide_product_unitary_equivalence(a, b).unwrap().status;
            let ba = decide_product_unitary_equivalence(b, a).unwrap().status;
            assert_eq!(ab, ba, "{a} / {b}");
            if a == b {
                assert_eq!(ab, Status::Equivalent);
            }
        }
    }
}
