//! Games with one active player and passive observers that communicate
//! through full-information links.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::automata::{Alphabet, Letter, MealyMachine, StateId};
use crate::error::{Error, Result};

/// Bitmask over players; player 0 is bit 0.
pub type Coalition = u32;

pub const MAX_PLAYERS: usize = 16;
pub const MAX_PRIORITY: u32 = 16;

pub fn singleton(i: usize) -> Coalition {
    1 << i
}

pub fn members(j: Coalition) -> impl Iterator<Item = usize> {
    (0..MAX_PLAYERS).filter(move |&i| j & (1 << i) != 0)
}

pub fn all_players(n_players: usize) -> Coalition {
    ((1u64 << n_players) - 1) as Coalition
}

/// Reflexive-transitive closure of `start` under the per-player link
/// relation `links(i)` (the set of players that `i` peeks at).
pub fn closure(start: Coalition, links: impl Fn(usize) -> Coalition) -> Coalition {
    let mut done = start;
    let mut todo = start;
    while todo != 0 {
        let i = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        let new = links(i) & !done;
        done |= new;
        todo |= new;
    }
    done
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WinningCondition {
    /// Indexed by color.
    Reachability { targets: Vec<bool> },
    /// Min-even parity: the least priority seen infinitely often must be even.
    Parity { priorities: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FipGame {
    pub num_players: usize,
    pub actions: Alphabet,
    pub moves: Alphabet,
    /// act: move → action.
    pub act: Vec<usize>,
    /// Shared observation alphabet Σ.
    pub observations: Alphabet,
    /// β_i as Mealy machines from moves to Σ.
    pub obs: Vec<MealyMachine>,
    /// R_σ as a list of (receiver, sender) pairs; `None` marks an undefined entry.
    pub comm: Vec<Option<Vec<(usize, usize)>>>,
    pub colors: Alphabet,
    pub coloring: MealyMachine,
    pub condition: WinningCondition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VisibilityMode {
    /// Every pair of player-0 states.
    #[default]
    AllPairs,
    /// Only pairs reached by history pairs with equal player-0 observations.
    Reachable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NonTotal(String),
    Visibility { move1: String, move2: String },
    UndefinedComm(String),
    PriorityOverflow { color: String, priority: u32 },
    Structure(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonTotal(s) => write!(f, "non-total machine: {s}"),
            Violation::Visibility { move1, move2 } => write!(
                f,
                "visibility: moves {move1} and {move2} have different actions but the same player-0 observation"
            ),
            Violation::UndefinedComm(s) => write!(f, "no communication entry for observation {s}"),
            Violation::PriorityOverflow { color, priority } => {
                write!(f, "priority {priority} of color {color} exceeds {MAX_PRIORITY}")
            }
            Violation::Structure(s) => write!(f, "{s}"),
        }
    }
}

impl FipGame {
    pub fn players(&self) -> Coalition {
        all_players(self.num_players)
    }

    /// Players that `i` peeks at when it observes `sigma`.
    pub fn links(&self, sigma: usize, i: usize) -> Coalition {
        match &self.comm[sigma] {
            Some(rel) => rel.iter().filter(|&&(r, _)| r == i).fold(0, |m, &(_, s)| m | (1 << s)),
            None => 0,
        }
    }

    /// Per-player observation sequences β̂_i(t).
    pub fn observe(&self, t: &[Letter]) -> Result<Vec<Vec<usize>>> {
        self.obs.iter().map(|m| m.trace(t)).collect()
    }

    /// Observation-machine states of every player after `t`.
    pub fn obs_states(&self, t: &[Letter]) -> Result<Vec<StateId>> {
        self.obs.iter().map(|m| m.base.run(t)).collect()
    }

    /// sync_J for move `c` played from observation states `states`.
    pub fn sync(&self, j: Coalition, states: &[StateId], c: Letter) -> Result<Coalition> {
        if c >= self.moves.len() {
            return Err(Error::UnknownLetter(c.to_string()));
        }
        Ok(closure(j, |i| self.links(self.obs[i].output(states[i], c), i)))
    }

    /// Color sequence λ̂(t).
    pub fn colors_of(&self, t: &[Letter]) -> Result<Vec<usize>> {
        self.coloring.trace(t)
    }

    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with(VisibilityMode::AllPairs)
    }

    pub fn validate_with(&self, mode: VisibilityMode) -> Vec<Violation> {
        let mut report = Vec::new();
        if self.num_players == 0 || self.num_players > MAX_PLAYERS {
            report.push(Violation::Structure(format!(
                "player count {} outside 1..={MAX_PLAYERS}",
                self.num_players
            )));
            return report;
        }
        if self.obs.len() != self.num_players {
            report.push(Violation::Structure("one observation machine per player required".into()));
            return report;
        }
        if self.act.len() != self.moves.len() || self.act.iter().any(|&a| a >= self.actions.len()) {
            report.push(Violation::NonTotal("act map".into()));
        }
        for (i, m) in self.obs.iter().enumerate() {
            if m.base.alphabet != self.moves || m.outputs != self.observations {
                report.push(Violation::Structure(format!(
                    "observation machine of player {i} is not over moves → observations"
                )));
            }
        }
        if self.coloring.base.alphabet != self.moves || self.coloring.outputs != self.colors {
            report.push(Violation::Structure("coloring is not over moves → colors".into()));
        }
        if self.comm.len() != self.observations.len() {
            report.push(Violation::Structure("comm table does not match observations".into()));
        } else {
            for (s, rel) in self.comm.iter().enumerate() {
                match rel {
                    None => report.push(Violation::UndefinedComm(self.observations.name(s).into())),
                    Some(rel) => {
                        for &(r, t) in rel {
                            if r >= self.num_players || t >= self.num_players {
                                report.push(Violation::Structure(format!(
                                    "link ({r},{t}) on {} names an unknown player",
                                    self.observations.name(s)
                                )));
                            }
                        }
                    }
                }
            }
        }
        match &self.condition {
            WinningCondition::Reachability { targets } => {
                if targets.len() != self.colors.len() {
                    report.push(Violation::NonTotal("reachability target table".into()));
                }
            }
            WinningCondition::Parity { priorities } => {
                if priorities.len() != self.colors.len() {
                    report.push(Violation::NonTotal("priority map".into()));
                }
                for (c, &p) in priorities.iter().enumerate() {
                    if p > MAX_PRIORITY {
                        report.push(Violation::PriorityOverflow {
                            color: self.colors.name(c).into(),
                            priority: p,
                        });
                    }
                }
            }
        }
        if report.is_empty() {
            if let Some((c1, c2)) = self.visibility_witness(mode) {
                report.push(Violation::Visibility {
                    move1: self.moves.name(c1).into(),
                    move2: self.moves.name(c2).into(),
                });
            }
        }
        report
    }

    fn visibility_witness(&self, mode: VisibilityMode) -> Option<(Letter, Letter)> {
        let m0 = &self.obs[0];
        let k = self.moves.len();
        let pairs: Vec<(StateId, StateId)> = match mode {
            VisibilityMode::AllPairs => {
                let n = m0.num_states() as StateId;
                (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).collect()
            }
            VisibilityMode::Reachable => {
                let start = (m0.initial(), m0.initial());
                let mut seen = HashSet::from([start]);
                let mut order = vec![start];
                let mut queue = VecDeque::from([start]);
                while let Some((p, q)) = queue.pop_front() {
                    for c in 0..k {
                        for d in 0..k {
                            if m0.output(p, c) == m0.output(q, d) {
                                let t = (m0.step(p, c), m0.step(q, d));
                                if seen.insert(t) {
                                    order.push(t);
                                    queue.push_back(t);
                                }
                            }
                        }
                    }
                }
                order
            }
        };
        for (p, q) in pairs {
            for c in 0..k {
                for d in 0..k {
                    if self.act[c] != self.act[d] && m0.output(p, c) == m0.output(q, d) {
                        return Some((c, d));
                    }
                }
            }
        }
        None
    }
}

/// Nodes are (player, round) for rounds 0..=ℓ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewGraph {
    pub num_players: usize,
    pub len: usize,
    pub edges: Vec<((usize, usize), (usize, usize))>,
}

impl ViewGraph {
    pub fn node_count(&self) -> usize {
        self.num_players * (self.len + 1)
    }

    pub fn has_edge(&self, from: (usize, usize), to: (usize, usize)) -> bool {
        self.edges.contains(&(from, to))
    }
}

pub fn view_graph(game: &FipGame, history: &[Letter]) -> Result<ViewGraph> {
    let obs = game.observe(history)?;
    let mut edges = Vec::new();
    for t in 1..=history.len() {
        for (i, seq) in obs.iter().enumerate() {
            edges.push(((i, t), (i, t - 1)));
            for j in members(game.links(seq[t - 1], i)) {
                edges.push(((i, t), (j, t)));
            }
        }
    }
    Ok(ViewGraph { num_players: game.num_players, len: history.len(), edges })
}

/// Nodes reachable from (i, round) given observation sequences `obs`.
pub(crate) fn reachable_nodes(
    game: &FipGame,
    obs: &[Vec<usize>],
    i: usize,
    round: usize,
) -> Vec<(usize, usize)> {
    let mut seen = vec![vec![false; round + 1]; game.num_players];
    let mut stack = vec![(i, round)];
    seen[i][round] = true;
    let mut out = Vec::new();
    while let Some((p, t)) = stack.pop() {
        out.push((p, t));
        if t == 0 {
            continue;
        }
        let mut next = vec![(p, t - 1)];
        next.extend(members(game.links(obs[p][t - 1], p)).map(|j| (j, t)));
        for (q, u) in next {
            if !seen[q][u] {
                seen[q][u] = true;
                stack.push((q, u));
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn indistinguishable(game: &FipGame, j: Coalition, t1: &[Letter], t2: &[Letter]) -> Result<bool> {
    let o1 = game.observe(t1)?;
    let o2 = game.observe(t2)?;
    if t1.len() != t2.len() {
        return Ok(false);
    }
    for i in members(j) {
        for (p, t) in reachable_nodes(game, &o1, i, t1.len()) {
            if t > 0 && o1[p][t - 1] != o2[p][t - 1] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_chains() {
        // 0 peeks at 1, 1 peeks at 2
        let links = |i: usize| match i {
            0 => 0b010,
            1 => 0b100,
            _ => 0,
        };
        assert_eq!(closure(0b001, links), 0b111);
        assert_eq!(closure(0b100, links), 0b100);
        assert_eq!(closure(0b001, |_| 0), 0b001);
    }
}
