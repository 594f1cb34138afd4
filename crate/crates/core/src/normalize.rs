//! Rewrites a game so that every observation function is a projection of
//! the move: moves become observation profiles (σ_0, …, σ_n).
//!
//! The product of all observation machines with the coloring is made Moore
//! style (each state remembers the last color) and then determinized over
//! profiles. A subset is the set of product states compatible with a profile
//! history; the empty subset is the absorbing sink for profile words that no
//! source history produces. The resulting machine is both the new coloring
//! and the feasibility automaton.

use std::collections::HashMap;

use crate::automata::{Alphabet, Dfa, Letter, MealyMachine, SemiAutomaton, StateId};
use crate::error::{Error, Result};
use crate::fip::{closure, Coalition, FipGame, WinningCondition};
use crate::solve::Strategy;

pub const WIN_COLOR: &str = "⊤win";

#[derive(Clone, Debug)]
pub struct NormalizedFip {
    /// The game over profile moves with projection observations and the
    /// folded coloring.
    pub base: FipGame,
    /// Accepts exactly the profile words produced by source histories.
    pub feasibility: Dfa,
    /// Observation of every player, per profile letter.
    pub profiles: Vec<Vec<usize>>,
    /// The infeasible sink of the folded machine.
    pub sink: StateId,
    /// Index of ⊤win in `base.colors`.
    pub win_color: usize,
    /// Color carried by each folded state; `None` only for the initial state.
    pub state_color: Vec<Option<usize>>,
    pub source: FipGame,
    /// β′ as a transducer from source moves to profile letters.
    pub beta: MealyMachine,
    links: Vec<Vec<Coalition>>,
}

type PState = (Vec<StateId>, StateId, Option<usize>);

pub fn normalize(game: &FipGame) -> Result<NormalizedFip> {
    let report = game.validate();
    if !report.is_empty() {
        return Err(Error::InvalidGame(
            report.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ));
    }
    let k = game.moves.len();

    // product states, interned on demand
    let mut pindex: HashMap<PState, u32> = HashMap::new();
    let mut pstates: Vec<PState> = Vec::new();
    let mut intern_p = |s: PState, pstates: &mut Vec<PState>| -> u32 {
        *pindex.entry(s.clone()).or_insert_with(|| {
            pstates.push(s);
            (pstates.len() - 1) as u32
        })
    };
    let p0 = (game.obs.iter().map(|m| m.initial()).collect(), game.coloring.initial(), None);
    intern_p(p0, &mut pstates);

    let mut profiles: Vec<Vec<usize>> = Vec::new();
    let mut prof_index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets: Vec<Vec<u32>> = vec![vec![0]];
    let mut sub_index: HashMap<Vec<u32>, u32> = HashMap::from([(vec![0], 0)]);
    let mut trans: Vec<Vec<(usize, u32)>> = Vec::new();

    let mut i = 0;
    while i < subsets.len() {
        let u = subsets[i].clone();
        i += 1;
        let mut groups: Vec<(usize, Vec<u32>)> = Vec::new();
        for c in 0..k {
            for &s in &u {
                let (obs, col, _) = pstates[s as usize].clone();
                let profile: Vec<usize> =
                    game.obs.iter().zip(&obs).map(|(m, &q)| m.output(q, c)).collect();
                let next = (
                    game.obs.iter().zip(&obs).map(|(m, &q)| m.step(q, c)).collect(),
                    game.coloring.step(col, c),
                    Some(game.coloring.output(col, c)),
                );
                let t = intern_p(next, &mut pstates);
                let d = *prof_index.entry(profile.clone()).or_insert_with(|| {
                    profiles.push(profile);
                    profiles.len() - 1
                });
                match groups.iter_mut().find(|(e, _)| *e == d) {
                    Some((_, set)) => set.push(t),
                    None => groups.push((d, vec![t])),
                }
            }
        }
        let mut row = Vec::new();
        for (d, mut set) in groups {
            set.sort_unstable();
            set.dedup();
            let colors: Vec<_> = set.iter().map(|&s| pstates[s as usize].2).collect();
            if colors.iter().any(|c| *c != colors[0]) {
                return Err(Error::InvalidGame(
                    "coloring is not information-consistent: equal observation profiles yield different colors"
                        .into(),
                ));
            }
            let id = *sub_index.entry(set.clone()).or_insert_with(|| {
                subsets.push(set);
                (subsets.len() - 1) as u32
            });
            row.push((d, id));
        }
        trans.push(row);
    }

    let m = subsets.len();
    let sink = m as StateId;
    let nprof = profiles.len();
    let mut delta = vec![vec![sink; nprof]; m + 1];
    for (u, row) in trans.iter().enumerate() {
        for &(d, t) in row {
            delta[u][d] = t;
        }
    }
    let profile_names: Vec<String> = profiles
        .iter()
        .map(|p| p.iter().map(|&s| game.observations.name(s)).collect::<Vec<_>>().join("|"))
        .collect();
    let moves = Alphabet::new(profile_names.iter().cloned());
    let mut state_names: Vec<String> = (0..m).map(|u| format!("m{u}")).collect();
    state_names.push("sink".into());
    let semi = SemiAutomaton::new(moves.clone(), state_names, 0, delta.clone())?;

    let mut colors = game.colors.clone();
    if colors.get(WIN_COLOR).is_some() {
        return Err(Error::InvalidGame(format!("color name {WIN_COLOR} is reserved")));
    }
    let win_color = colors.intern(WIN_COLOR.into());
    let mut state_color: Vec<Option<usize>> =
        subsets.iter().map(|set| pstates[set[0] as usize].2).collect();
    state_color.push(Some(win_color));
    let sc = state_color.clone();
    let folded = MealyMachine::from_fn(semi.clone(), colors.clone(), |q, d| {
        sc[delta[q as usize][d] as usize].expect("only the initial state lacks a color")
    });
    let mut accepting = vec![true; m + 1];
    accepting[m] = false;
    let feasibility = Dfa::new(semi, accepting)?;

    // act on profiles through the player-0 component
    let mut act_of_sigma: HashMap<usize, usize> = HashMap::new();
    for set in &subsets {
        for &s in set {
            let q0 = pstates[s as usize].0[0];
            for c in 0..k {
                let sigma = game.obs[0].output(q0, c);
                if *act_of_sigma.entry(sigma).or_insert(game.act[c]) != game.act[c] {
                    return Err(Error::InvalidGame(format!(
                        "visibility: observation {} supports two actions",
                        game.observations.name(sigma)
                    )));
                }
            }
        }
    }
    let act: Vec<usize> = profiles.iter().map(|p| act_of_sigma[&p[0]]).collect();

    let obs = (0..game.num_players)
        .map(|i| {
            let ps = profiles.clone();
            MealyMachine::memoryless(moves.clone(), game.observations.clone(), move |d| ps[d][i])
        })
        .collect();
    let condition = match &game.condition {
        WinningCondition::Reachability { targets } => {
            let mut t = targets.clone();
            t.push(true);
            WinningCondition::Reachability { targets: t }
        }
        WinningCondition::Parity { priorities } => {
            let mut p = priorities.clone();
            p.push(0);
            WinningCondition::Parity { priorities: p }
        }
    };
    let base = FipGame {
        num_players: game.num_players,
        actions: game.actions.clone(),
        moves: moves.clone(),
        act,
        observations: game.observations.clone(),
        obs,
        comm: game.comm.clone(),
        colors,
        coloring: folded,
        condition,
    };
    let links = profiles
        .iter()
        .map(|p| (0..game.num_players).map(|i| game.links(p[i], i)).collect())
        .collect();
    let beta = beta_transducer(game, &prof_index, &moves);
    Ok(NormalizedFip {
        base,
        feasibility,
        profiles,
        sink,
        win_color,
        state_color,
        source: game.clone(),
        beta,
        links,
    })
}

/// Product of the observation machines, emitting profile letters.
fn beta_transducer(game: &FipGame, prof_index: &HashMap<Vec<usize>, usize>, moves: &Alphabet) -> MealyMachine {
    let k = game.moves.len();
    let start: Vec<StateId> = game.obs.iter().map(|m| m.initial()).collect();
    let mut index = HashMap::from([(start.clone(), 0u32)]);
    let mut states = vec![start];
    let mut delta = Vec::new();
    let mut lambda = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let q = states[i].clone();
        i += 1;
        let mut drow = Vec::with_capacity(k);
        let mut lrow = Vec::with_capacity(k);
        for c in 0..k {
            let profile: Vec<usize> = game.obs.iter().zip(&q).map(|(m, &s)| m.output(s, c)).collect();
            let next: Vec<StateId> = game.obs.iter().zip(&q).map(|(m, &s)| m.step(s, c)).collect();
            let id = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                (states.len() - 1) as u32
            });
            drow.push(id);
            lrow.push(prof_index[&profile]);
        }
        delta.push(drow);
        lambda.push(lrow);
    }
    let names = (0..states.len()).map(|i| format!("b{i}")).collect();
    let semi = SemiAutomaton::new(game.moves.clone(), names, 0, delta).expect("total by construction");
    MealyMachine::new(semi, moves.clone(), lambda).expect("total by construction")
}

impl NormalizedFip {
    pub fn num_moves(&self) -> usize {
        self.profiles.len()
    }

    pub fn num_players(&self) -> usize {
        self.base.num_players
    }

    pub fn initial_state(&self) -> StateId {
        self.base.coloring.initial()
    }

    /// δ_M of the folded machine.
    #[inline]
    pub fn step(&self, q: StateId, d: Letter) -> StateId {
        self.base.coloring.step(q, d)
    }

    #[inline]
    pub fn feasible(&self, q: StateId, d: Letter) -> bool {
        q != self.sink && self.step(q, d) != self.sink
    }

    /// sync_J(d) for a profile letter.
    pub fn sync(&self, j: Coalition, d: Letter) -> Coalition {
        let l = &self.links[d];
        closure(j, |i| l[i])
    }

    pub fn act(&self, d: Letter) -> usize {
        self.base.act[d]
    }

    /// β̂′: the profile word of a source history.
    pub fn image(&self, t: &[Letter]) -> Result<Vec<Letter>> {
        self.beta.trace(t)
    }

    pub fn profile_name(&self, d: Letter) -> &str {
        self.base.moves.name(d)
    }
}

/// Composes β′ with a strategy over profiles to get one over source moves.
pub fn denormalize_strategy(n: &NormalizedFip, s: &Strategy) -> Strategy {
    let beta = &n.beta;
    let k = n.source.moves.len();
    let start = (beta.initial(), s.machine.initial());
    let mut index = HashMap::from([(start, 0u32)]);
    let mut states = vec![start];
    let mut delta = Vec::new();
    let mut lambda = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (b, q) = states[i];
        i += 1;
        let mut drow = Vec::with_capacity(k);
        let mut lrow = Vec::with_capacity(k);
        for c in 0..k {
            let d = beta.output(b, c);
            let next = (beta.step(b, c), s.machine.step(q, d));
            let id = *index.entry(next).or_insert_with(|| {
                states.push(next);
                (states.len() - 1) as u32
            });
            drow.push(id);
            lrow.push(s.machine.output(q, d));
        }
        delta.push(drow);
        lambda.push(lrow);
    }
    let names = (0..states.len()).map(|i| format!("s{i}")).collect();
    let semi = SemiAutomaton::new(n.source.moves.clone(), names, 0, delta).expect("total by construction");
    Strategy {
        machine: MealyMachine::new(semi, s.machine.outputs.clone(), lambda).expect("total by construction"),
        initial_action: s.initial_action,
        denormalized: true,
    }
}
