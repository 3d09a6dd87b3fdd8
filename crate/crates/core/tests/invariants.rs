use setnim_core::invariance::{combo_membership, discover_invariants, is_invariant_bounded, InvariantVector};
use setnim_core::{Oracle, Position};

fn zs(vs: &[InvariantVector]) -> Vec<Vec<u8>> {
    vs.iter().map(|v| v.z.clone()).collect()
}

fn generators(oracle: Oracle, bound: u64) -> Vec<Vec<u8>> {
    let member = |p: &[u64]| oracle.is_p(p);
    zs(&discover_invariants(oracle.n(), &member, bound).unwrap().generators)
}

#[test]
fn cn63_generators() {
    assert_eq!(
        generators(Oracle::Cn63, 4),
        vec![
            vec![1, 0, 0, 1, 0, 0],
            vec![0, 1, 0, 0, 1, 0],
            vec![0, 0, 1, 0, 0, 1],
            vec![1, 0, 1, 0, 1, 0],
            vec![0, 1, 0, 1, 0, 1],
        ]
    );
}

#[test]
fn h_generators() {
    assert_eq!(generators(Oracle::H, 4), vec![vec![1, 1, 0, 1, 0, 1], vec![1, 0, 1, 0, 1, 1]]);
}

#[test]
fn cn73_generators() {
    assert_eq!(generators(Oracle::Cn73, 3), vec![vec![1; 7]]);
}

#[test]
fn cn83_generators() {
    assert_eq!(generators(Oracle::Cn83, 3), vec![vec![1, 0, 1, 0, 1, 0, 1, 0], vec![0, 1, 0, 1, 0, 1, 0, 1]]);
}

#[test]
fn cn53_has_none() {
    let member = |p: &[u64]| Oracle::Cn53.is_p(p);
    assert!(discover_invariants(5, &member, 4).unwrap().all.is_empty());
}

#[test]
fn pn53_single() {
    let o = Oracle::Path { n: 5, k: 3 };
    let member = |p: &[u64]| o.is_p(p);
    assert_eq!(zs(&discover_invariants(5, &member, 4).unwrap().all), vec![vec![1, 0, 0, 0, 1]]);
}

#[test]
fn cn74_all_ones_fails() {
    let member = |p: &[u64]| Oracle::Cn74.is_p(p);
    let ones = InvariantVector::declared(&[1; 7]);
    let check = is_invariant_bounded(7, &member, &ones, 3).unwrap();
    println!("{check:?}");
    assert!(!check.invariant);
}

#[test]
fn combo_matches_cn63() {
    let member = |p: &[u64]| Oracle::Cn63.is_p(p);
    let gens = discover_invariants(6, &member, 4).unwrap().generators;
    let idx = setnim_core::grundy::BoxIndex::new(6, 4).unwrap();
    for i in 0..idx.size() {
        let p = idx.position(i);
        assert_eq!(combo_membership(&gens, &Position::new(p.clone()), 1_000_000).unwrap(), member(&p), "{p:?}");
    }
}
