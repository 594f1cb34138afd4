//! Synthesis of winning strategies for games where one active player and a
//! set of passive observers share their views through full-information
//! communication links.
//!
//! The pipeline is `normalize` → `knowledge` → `arena` → `solve`; `twotape`
//! handles indistinguishability relations given as two-tape automata and
//! `oracle` recomputes everything by brute force.

pub mod arena;
pub mod automata;
pub mod error;
pub mod fip;
pub mod io;
pub mod knowledge;
pub mod normalize;
pub mod oracle;
pub mod solve;
pub mod twotape;

pub use automata::{Alphabet, Dfa, Letter, MealyMachine, SemiAutomaton, StateId};
pub use error::{Error, Result};
pub use fip::{Coalition, FipGame, WinningCondition};
