#![allow(dead_code)]

use std::path::PathBuf;

use fipsynth_core::io::{load_game, TwoTapeFile};
use fipsynth_core::twotape::TwoTapeDfa;
use fipsynth_core::arena::{Arena, NodeColor};
use fipsynth_core::{Alphabet, FipGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn game(name: &str) -> FipGame {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    load_game(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn relation(name: &str) -> TwoTapeDfa {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    let f: TwoTapeFile = serde_json::from_str(&text).expect("two-tape JSON");
    TwoTapeDfa::from_file(&f).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The game fixtures used by the morphism and algebra sweeps.
pub const GAMES: [&str; 4] = ["peek.json", "sync-reach.json", "hier4-fip.json", "chain.json"];

pub const DEFAULT_SEED: u64 = 0x5eed_f1b5;

/// Seed for randomized tests; `FIPSYNTH_SEED` overrides it.
pub fn seed() -> u64 {
    std::env::var("FIPSYNTH_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed())
}

/// A random arena with up to `max_nodes` nodes, two actions and colors
/// p0..p3 (priority = index). Sometimes the root is an uncolored start
/// node with no incoming edges, as in built arenas.
pub fn random_arena(rng: &mut impl Rng, max_nodes: usize) -> Arena {
    let n = rng.gen_range(1..=max_nodes);
    let start = n > 1 && rng.gen_bool(0.25);
    let lo = usize::from(start);
    let node_colors = (0..n)
        .map(|v| if start && v == 0 { NodeColor::Start } else { NodeColor::Color(rng.gen_range(0..4)) })
        .collect();
    let edges = (0..n)
        .map(|_| {
            let mut out = Vec::new();
            for a in 0..2 {
                if out.is_empty() && a == 1 || rng.gen_bool(0.6) {
                    let k = rng.gen_range(1..=3);
                    let mut succ: Vec<usize> = (0..k).map(|_| rng.gen_range(lo..n)).collect();
                    succ.sort_unstable();
                    succ.dedup();
                    out.push((a, succ));
                }
            }
            out
        })
        .collect();
    Arena {
        actions: Alphabet::new(["a", "b"]),
        colors: Alphabet::new(["p0", "p1", "p2", "p3"]),
        initial: 0,
        node_colors,
        edges,
    }
}

pub fn game_file(name: &str) -> fipsynth_core::io::GameFile {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    fipsynth_core::io::GameFile::parse(&text).unwrap()
}
