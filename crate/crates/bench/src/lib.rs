//! Fixture loading shared by the benchmarks in `benches/`.

use std::path::PathBuf;

use fipsynth_core::io::{load_game, TwoTapeFile};
use fipsynth_core::twotape::TwoTapeDfa;
use fipsynth_core::FipGame;

pub const GAMES: [&str; 5] = ["peek.json", "sync-reach.json", "nosync-reach.json", "hier4-fip.json", "chain.json"];

fn read(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn game(name: &str) -> FipGame {
    load_game(&read(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn relation(name: &str) -> TwoTapeDfa {
    let f: TwoTapeFile = serde_json::from_str(&read(name)).expect("two-tape JSON");
    TwoTapeDfa::from_file(&f).unwrap_or_else(|e| panic!("{name}: {e}"))
}
