mod common;

use common::*;
use fipsynth_core::automata::{dfa_minimize, Alphabet, Dfa, SemiAutomaton};
use fipsynth_core::oracle::fip_2dfa_agree;
use fipsynth_core::twotape::{
    count_accepted, fip_to_2dfa, is_indist_relation, relation_accepts, relation_equivalent, restrict, swap,
    Diagnosis, TwoTapeDfa,
};

fn words(r: &TwoTapeDfa, s: &str) -> Vec<usize> {
    r.moves.chars(s).unwrap()
}

#[test]
fn fixture_relations_that_are_valid() {
    assert_eq!(is_indist_relation(&relation("fig5c.json"), true).unwrap(), Diagnosis::Valid);
    assert_eq!(is_indist_relation(&relation("fig8.json"), false).unwrap(), Diagnosis::Valid);
}

#[test]
fn fig9_as_drawn_is_not_transitive() {
    let r = relation("fig9.json");
    let d = is_indist_relation(&r, false).unwrap();
    let Diagnosis::NotTransitive { u, v, w } = d else { panic!("{d:?}") };
    assert!(relation_accepts(&r, &u, &v).unwrap());
    assert!(relation_accepts(&r, &v, &w).unwrap());
    assert!(!relation_accepts(&r, &u, &w).unwrap());
    // the concrete triple, independent of search order
    let (a, b, c) = (words(&r, "##a#c"), words(&r, "aaa#c"), words(&r, "##b#c"));
    assert!(relation_accepts(&r, &a, &b).unwrap());
    assert!(relation_accepts(&r, &b, &c).unwrap());
    assert!(!relation_accepts(&r, &a, &c).unwrap());
}

fn aligned(r: &TwoTapeDfa) -> TwoTapeDfa {
    let sep = r.moves.lookup("#").unwrap();
    restrict(r, |x, y| (x == sep) == (y == sep))
}

#[test]
fn hier4_and_fig9_agree_on_aligned_separators() {
    let h = fip_to_2dfa(&game("hier4-fip.json")).unwrap();
    let f = relation("fig9.json");
    assert_eq!(h.moves, f.moves);
    // unrestricted they differ, already on a short pair
    let w = relation_equivalent(&h, &f).unwrap().expect("differ");
    assert!(w.0.len() <= 3, "{w:?}");
    assert_eq!(relation_equivalent(&aligned(&h), &aligned(&f)).unwrap(), None);
}

#[test]
fn swap_is_an_involution_and_fixes_symmetric_relations() {
    for name in ["fig5c.json", "fig8.json"] {
        let r = relation(name);
        assert_eq!(relation_equivalent(&swap(&swap(&r)), &r).unwrap(), None);
        assert_eq!(relation_equivalent(&swap(&r), &r).unwrap(), None);
    }
}

#[test]
fn generated_relations_are_valid_and_round_trip() {
    for name in ["peek.json", "sync-reach.json", "nosync-reach.json", "chain.json", "hier4-fip.json"] {
        let r = fip_to_2dfa(&game(name)).unwrap();
        assert!(is_indist_relation(&r, true).unwrap().is_valid(), "{name}");
        let back = TwoTapeDfa::from_file(&r.to_file()).unwrap();
        assert_eq!(relation_equivalent(&back, &r).unwrap(), None, "{name}");
        assert_eq!(back.to_file(), r.to_file(), "{name}");
    }
}

#[test]
fn generated_relations_are_small() {
    // minimization never finds much to merge: the construction is close to minimal
    for name in ["peek.json", "sync-reach.json", "chain.json", "hier4-fip.json"] {
        let r = fip_to_2dfa(&game(name)).unwrap();
        let m = dfa_minimize(&r.dfa);
        assert!(m.num_states() <= r.num_states(), "{name}");
        assert_eq!(dfa_minimize(&m).num_states(), m.num_states(), "{name}");
    }
}

#[test]
fn peek_counts() {
    // length 2: {a,b}² is one class (16), ca ~ cb since the move after a
    // reveal is hidden again (4), and ac, bc, cc stand alone (3)
    let r = fip_to_2dfa(&game("peek.json")).unwrap();
    assert_eq!(count_accepted(&r, 0), 1);
    assert_eq!(count_accepted(&r, 1), 4 + 1);
    assert_eq!(count_accepted(&r, 2), 16 + 4 + 3);
    assert_eq!(fip_2dfa_agree(&game("peek.json"), &r, 4).unwrap(), None);
}

#[test]
fn wrong_relation_is_caught_by_the_counting_check() {
    // the identity relation is strictly finer than PEEK's
    let g = game("peek.json");
    let r = fip_to_2dfa(&g).unwrap();
    let pairs = r.dfa.base.alphabet.clone();
    let k = r.k();
    let semi = SemiAutomaton::from_fn(pairs, 2, 0, |q, l| if q == 0 && l / k == l % k { 0 } else { 1 });
    let id = TwoTapeDfa::new(Alphabet::new(r.moves.names().iter().cloned()), Dfa::new(semi, vec![true, false]).unwrap())
        .unwrap();
    let (x, y) = fip_2dfa_agree(&g, &id, 1).unwrap().expect("differs");
    assert_ne!(x, y);
}
