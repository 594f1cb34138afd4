mod common;

use common::*;
use fipsynth_core::fip::{indistinguishable, view_graph, Coalition, Violation};
use fipsynth_core::io::{game_to_json, load_game};
use fipsynth_core::oracle::all_words;
use fipsynth_core::FipGame;
use proptest::prelude::*;

fn w(g: &FipGame, s: &str) -> Vec<usize> {
    g.moves.chars(s).unwrap()
}

#[test]
fn fixtures_validate() {
    for name in ["peek.json", "sync-reach.json", "nosync-reach.json", "chain.json", "hier4-fip.json"] {
        assert_eq!(game(name).validate(), vec![], "{name}");
    }
}

#[test]
fn visibility_mutant_names_the_moves() {
    let mut f = game_file("peek.json");
    f.act.insert("b".into(), "y".into());
    let v = f.to_game().unwrap().unwrap_err();
    assert_eq!(v, vec![Violation::Visibility { move1: "a".into(), move2: "b".into() }]);
}

#[test]
fn missing_comm_entry_is_named() {
    let mut f = game_file("peek.json");
    f.comm.remove("c");
    let v = f.to_game().unwrap().unwrap_err();
    assert!(v.contains(&Violation::UndefinedComm("c".into())), "{v:?}");
}

#[test]
fn json_round_trip() {
    for name in GAMES {
        let g = game(name);
        let again = load_game(&game_to_json(&g)).unwrap();
        assert_eq!(again, g, "{name}");
    }
}

#[test]
fn peek_view_graphs() {
    let g = game("peek.json");
    let e = view_graph(&g, &[]).unwrap();
    assert_eq!(e.node_count(), 2);
    assert!(e.edges.is_empty());
    let c = view_graph(&g, &w(&g, "c")).unwrap();
    assert!(c.has_edge((0, 1), (1, 1)));
    let ab = view_graph(&g, &w(&g, "ab")).unwrap();
    assert_eq!(ab.node_count(), 6);
    assert!(ab.edges.iter().all(|&((i, t), (j, u))| i == j && u + 1 == t), "only past edges");
}

#[test]
fn peek_indistinguishability() {
    let g = game("peek.json");
    assert!(indistinguishable(&g, 1, &w(&g, "ab"), &w(&g, "ba")).unwrap());
    assert!(!indistinguishable(&g, 1, &w(&g, "abc"), &w(&g, "bac")).unwrap());
    assert!(!indistinguishable(&g, 1, &w(&g, "ab"), &w(&g, "abb")).unwrap());
    // the observer sees everything
    assert!(!indistinguishable(&g, 0b11, &w(&g, "ab"), &w(&g, "ba")).unwrap());
}

#[test]
fn sync_examples() {
    let g = game("peek.json");
    let s0 = g.obs_states(&[]).unwrap();
    assert_eq!(g.sync(1, &s0, w(&g, "c")[0]).unwrap(), 0b11);
    assert_eq!(g.sync(1, &s0, w(&g, "a")[0]).unwrap(), 0b01);
    // c fires 0→1 and 1→2 at once
    let ch = game("chain.json");
    let s0 = ch.obs_states(&[]).unwrap();
    assert_eq!(ch.sync(1, &s0, w(&ch, "c")[0]).unwrap(), 0b111);
    assert_eq!(ch.sync(1, &s0, w(&ch, "d")[0]).unwrap(), 0b101);
    // e shows v to player 2, who then peeks at player 1
    assert_eq!(ch.sync(0b100, &s0, w(&ch, "e")[0]).unwrap(), 0b110);
}

/// Histories of one length for the exhaustive sweeps below.
fn sweep(g: &FipGame, len: usize) -> Vec<Vec<usize>> {
    all_words(g.moves.len(), len)
}

#[test]
fn indistinguishability_is_an_equivalence() {
    for name in GAMES {
        let g = game(name);
        let len = if g.moves.len() > 4 { 2 } else { 3 };
        let ws = sweep(&g, len);
        for j in (1..=g.players()).filter(|j| j & 1 == 1) {
            let rel: Vec<Vec<bool>> =
                ws.iter().map(|x| ws.iter().map(|y| indistinguishable(&g, j, x, y).unwrap()).collect()).collect();
            for a in 0..ws.len() {
                assert!(rel[a][a]);
                for b in 0..ws.len() {
                    assert_eq!(rel[a][b], rel[b][a]);
                    if rel[a][b] {
                        for c in 0..ws.len() {
                            assert!(!rel[b][c] || rel[a][c], "{name} J={j:#b}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn prefix_closure_and_visibility() {
    for name in GAMES {
        let g = game(name);
        let ws = sweep(&g, 3);
        for x in &ws {
            for y in &ws {
                if indistinguishable(&g, 1, x, y).unwrap() {
                    assert!(indistinguishable(&g, 1, &x[..2], &y[..2]).unwrap(), "{name}");
                    assert_eq!(g.act[x[2]], g.act[y[2]], "{name}");
                }
            }
        }
    }
}

fn coalition(n: usize) -> impl Strategy<Value = Coalition> {
    1..(1u32 << n)
}

proptest! {
    #[test]
    fn sync_is_monotone_and_idempotent(j in coalition(3), k in coalition(3), c in 0usize..5, h in prop::collection::vec(0usize..5, 0..4)) {
        let g = game("chain.json");
        let st = g.obs_states(&h).unwrap();
        let sj = g.sync(j, &st, c).unwrap();
        prop_assert_eq!(sj & j, j);
        prop_assert_eq!(g.sync(sj, &st, c).unwrap(), sj);
        let sjk = g.sync(j | k, &st, c).unwrap();
        prop_assert_eq!(sj & sjk, sj);
    }

    #[test]
    fn larger_coalitions_distinguish_more(j in coalition(4), k in coalition(4), x in prop::collection::vec(0usize..4, 0..6), y in prop::collection::vec(0usize..4, 0..6)) {
        let g = game("hier4-fip.json");
        let y: Vec<usize> = y.into_iter().chain(std::iter::repeat(0)).take(x.len()).collect();
        if indistinguishable(&g, j | k, &x, &y).unwrap() {
            prop_assert!(indistinguishable(&g, j, &x, &y).unwrap());
        }
    }

    #[test]
    fn different_lengths_are_distinguishable(x in prop::collection::vec(0usize..3, 0..5), y in prop::collection::vec(0usize..3, 0..5)) {
        let g = game("peek.json");
        if x.len() != y.len() {
            prop_assert!(!indistinguishable(&g, 1, &x, &y).unwrap());
        }
    }
}
