mod common;

use common::*;
use fipsynth_core::arena::{arena_to_file, build, export_dot, Arena, Limits, NodeColor};
use fipsynth_core::normalize::normalize;
use fipsynth_core::oracle::{Indist, DEFAULT_MAX_DEPTH};
use fipsynth_core::{Alphabet, Error};

/// Line-level check of the DOT subset we emit.
fn check_dot(text: &str, a: &Arena) {
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "digraph arena {");
    assert_eq!(*lines.last().unwrap(), "}");
    let (mut nodes, mut edges) = (0, 0);
    for l in &lines[1..lines.len() - 1] {
        let l = l.trim();
        assert!(l.ends_with(';'), "{l}");
        if l.starts_with("rankdir") {
            continue;
        }
        let (head, attrs) = l.split_once(" [").expect("attribute list");
        assert!(attrs.ends_with("];"), "{l}");
        assert_eq!(attrs.matches('"').count() % 2, 0, "{l}");
        if head.contains("->") {
            edges += 1;
        } else {
            assert!(head.starts_with('n'));
            nodes += 1;
        }
    }
    assert_eq!(nodes, a.len());
    assert_eq!(edges, a.edge_count());
}

#[test]
fn one_node_dot() {
    let a = Arena {
        actions: Alphabet::new(["go"]),
        colors: Alphabet::new(["n"]),
        initial: 0,
        node_colors: vec![NodeColor::Color(0)],
        edges: vec![vec![(0, vec![0])]],
    };
    let dot = export_dot(&a);
    check_dot(&dot, &a);
    assert!(dot.contains("n0 [label=\"0:n\""));
}

#[test]
fn builds_are_deterministic_and_export_cleanly() {
    for name in GAMES {
        let n = normalize(&game(name)).unwrap();
        let a = build(&n, Limits::default()).unwrap().arena;
        let b = build(&n, Limits::default()).unwrap().arena;
        assert_eq!(a, b, "{name}");
        let dot = export_dot(&a);
        assert_eq!(dot, export_dot(&b));
        check_dot(&dot, &a);
        let f = arena_to_file(&a);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<fipsynth_core::arena::ArenaFile>(&text).unwrap(), f);
    }
}

#[test]
fn every_node_has_an_action() {
    for name in GAMES {
        let n = normalize(&game(name)).unwrap();
        let a = build(&n, Limits::default()).unwrap().arena;
        for (v, row) in a.edges.iter().enumerate() {
            assert!(!row.is_empty(), "{name}: node {v}");
            assert!(row.iter().all(|(_, s)| !s.is_empty()));
        }
    }
}

#[test]
fn regression_sizes() {
    // oracle-checked (bisimulation to depth 5) before being frozen here
    let expect = [("peek.json", 4), ("sync-reach.json", 6), ("hier4-fip.json", 15), ("chain.json", 9), ("nosync-reach.json", 5)];
    for (name, nodes) in expect {
        let n = normalize(&game(name)).unwrap();
        assert_eq!(build(&n, Limits::default()).unwrap().arena.len(), nodes, "{name}");
    }
}

#[test]
fn peek_has_an_uncertain_node() {
    let n = normalize(&game("peek.json")).unwrap();
    let built = build(&n, Limits::default()).unwrap();
    let sizes: Vec<usize> = built.keys.iter().map(|&k| built.knowledge.store.len(k)).collect();
    assert!(sizes.contains(&2), "{sizes:?}");
    assert!(sizes.iter().filter(|&&s| s == 1).count() >= 2, "{sizes:?}");
}

#[test]
fn node_of_matches_information_sets() {
    let n = normalize(&game("peek.json")).unwrap();
    let mut built = build(&n, Limits::default()).unwrap();
    let ind = Indist::new(&n, 3, DEFAULT_MAX_DEPTH).unwrap();
    for len in 0..=3 {
        let configs: Vec<_> = ind.pop.words[len].iter().map(|w| built.knowledge.run(w).unwrap()).collect();
        let nodes: Vec<usize> = configs.iter().map(|p| built.node_of(p).unwrap()).collect();
        for a in 0..nodes.len() {
            for b in 0..nodes.len() {
                if ind.class(1, len, a) == ind.class(1, len, b) {
                    assert_eq!(nodes[a], nodes[b]);
                } else {
                    // distinguishable: same node exactly when player 0 knows the same
                    assert_eq!(nodes[a] == nodes[b], configs[a].player0() == configs[b].player0());
                }
            }
        }
    }
}

#[test]
fn limits_are_reported_with_statistics() {
    let n = normalize(&game("sync-reach.json")).unwrap();
    let limits = Limits { max_nodes: 4, ..Limits::default() };
    match build(&n, limits) {
        Err(Error::LimitExceeded { nodes, configs, values }) => {
            assert_eq!(nodes, 5);
            assert!(configs >= nodes && values > 0);
        }
        Err(e) => panic!("{e}"),
        Ok(_) => panic!("limit ignored"),
    }
}

#[test]
fn unknown_configs_are_refused() {
    let n = normalize(&game("peek.json")).unwrap();
    let mut built = build(&n, Limits::default()).unwrap();
    let p = built.knowledge.initial_config().unwrap();
    assert_eq!(built.node_of(&p).unwrap(), built.arena.initial);
    let bogus = fipsynth_core::knowledge::Config(vec![u32::MAX - 1; p.0.len()]);
    assert_eq!(built.node_of(&bogus), Err(Error::UnknownClass));
}

#[test]
fn infeasible_edges_lead_to_the_winning_sink() {
    let n = normalize(&game("sync-reach.json")).unwrap();
    let built = build(&n, Limits { infeasible_edges: true, ..Limits::default() }).unwrap();
    let w = built.win_node.expect("sync-reach has infeasible profiles");
    assert_eq!(built.arena.node_colors[w], NodeColor::Win);
    assert!(built.arena.edges[w].iter().all(|(_, s)| s == &vec![w]));
}
