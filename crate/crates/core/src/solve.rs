//! Solving arenas and turning the result into a finite-state strategy.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Built, NodeColor};
use crate::automata::{Alphabet, Letter, MealyMachine, SemiAutomaton, StateId};
use crate::error::{Error, Result};
use crate::fip::{FipGame, WinningCondition};
use crate::io::{mealy_from_standalone, mealy_to_file, StrategyFile, SCHEMA_VERSION};
use crate::knowledge::Config;
use crate::normalize::{denormalize_strategy, NormalizedFip};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    PlayerWins,
    PlayerLoses,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub winner: Winner,
    /// Winning region of the player.
    pub winning: Vec<bool>,
    /// Chosen action on every node of the winning region.
    pub strategy: Vec<Option<usize>>,
}

/// A decision function given as a Mealy machine: the output on the last
/// move of τ is the action played after τ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub machine: MealyMachine,
    /// The action played on the empty history.
    pub initial_action: usize,
    pub denormalized: bool,
}

impl Strategy {
    pub fn decide(&self, history: &[Letter]) -> Result<usize> {
        match history.split_last() {
            None => Ok(self.initial_action),
            Some((&c, prefix)) => {
                let q = self.machine.base.run(prefix)?;
                if c >= self.machine.base.num_letters() {
                    return Err(Error::UnknownLetter(c.to_string()));
                }
                Ok(self.machine.output(q, c))
            }
        }
    }

    pub fn constant(moves: &Alphabet, actions: &Alphabet, a: usize) -> Strategy {
        Strategy {
            machine: MealyMachine::memoryless(moves.clone(), actions.clone(), |_| a),
            initial_action: a,
            denormalized: false,
        }
    }

    /// Plays `plan[t]` in round t+1 and the last entry forever after.
    pub fn schedule(moves: &Alphabet, actions: &Alphabet, plan: &[usize]) -> Strategy {
        let n = plan.len();
        let base = SemiAutomaton::from_fn(moves.clone(), n, 0, |q, _| (q as usize + 1).min(n - 1) as StateId);
        let p = plan.to_vec();
        let machine = MealyMachine::from_fn(base, actions.clone(), move |q, _| p[(q as usize + 1).min(n - 1)]);
        Strategy { machine, initial_action: plan[0], denormalized: false }
    }

    pub fn to_file(&self) -> StrategyFile {
        StrategyFile {
            schema_version: SCHEMA_VERSION,
            initial_action: self.machine.outputs.name(self.initial_action).into(),
            machine: mealy_to_file(&self.machine),
        }
    }

    pub fn from_file(f: &StrategyFile) -> Result<Strategy> {
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schema_version {}", f.schema_version)));
        }
        let machine = mealy_from_standalone(&f.machine)?;
        let initial_action = machine.outputs.lookup(&f.initial_action)?;
        Ok(Strategy { machine, initial_action, denormalized: false })
    }

    /// Human-readable table: state, move, next state, action.
    pub fn table(&self) -> String {
        let m = &self.machine;
        let mut out = format!("initial action: {}\n", m.outputs.name(self.initial_action));
        for q in 0..m.num_states() as StateId {
            for c in 0..m.base.num_letters() {
                out.push_str(&format!(
                    "{:>6} --{}--> {:<6} play {}\n",
                    m.base.state_names[q as usize],
                    m.base.alphabet.name(c),
                    m.base.state_names[m.step(q, c) as usize],
                    m.outputs.name(m.output(q, c))
                ));
            }
        }
        out
    }
}

fn actions_of(a: &Arena, v: usize) -> impl Iterator<Item = usize> + '_ {
    a.edges[v].iter().map(|(act, _)| *act)
}

/// Attractor of the target nodes; the player picks actions, the
/// environment picks successors. Ties go to the least action.
pub fn solve_reachability(a: &Arena, targets: &[bool]) -> SolveResult {
    let is_target = |v: usize| match a.node_colors[v] {
        NodeColor::Win => true,
        NodeColor::Color(c) => targets.get(c).copied().unwrap_or(false),
        NodeColor::Start => false,
    };
    let n = a.len();
    let mut winning: Vec<bool> = (0..n).map(is_target).collect();
    let mut strategy: Vec<Option<usize>> =
        (0..n).map(|v| if winning[v] { actions_of(a, v).next() } else { None }).collect();
    loop {
        let mut layer = Vec::new();
        for v in 0..n {
            if winning[v] {
                continue;
            }
            let choice = a.edges[v].iter().find(|(_, ts)| ts.iter().all(|&t| winning[t]));
            if let Some((act, _)) = choice {
                layer.push((v, *act));
            }
        }
        if layer.is_empty() {
            break;
        }
        for (v, act) in layer {
            winning[v] = true;
            strategy[v] = Some(act);
        }
    }
    let winner = if winning[a.initial] { Winner::PlayerWins } else { Winner::PlayerLoses };
    SolveResult { winner, winning, strategy }
}

/// Priority of every node; the root gets the largest odd value so that it
/// never matters (it is never revisited in built arenas).
pub fn node_priorities(a: &Arena, priorities: &[u32]) -> Vec<u32> {
    let top = priorities.iter().copied().max().unwrap_or(0) | 1;
    a.node_colors
        .iter()
        .map(|c| match c {
            NodeColor::Start => top,
            NodeColor::Win => 0,
            NodeColor::Color(c) => priorities[*c],
        })
        .collect()
}

/// Two-player graph: node v < n belongs to the player, node n + e is the
/// environment node of the e-th (node, action) pair.
struct Graph {
    owner: Vec<u8>,
    prio: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// For environment nodes: the action they stand for.
    action: Vec<usize>,
}

impl Graph {
    fn from_arena(a: &Arena, prio_of_node: &[u32]) -> Graph {
        let n = a.len();
        let mut owner = vec![0u8; n];
        let mut prio = prio_of_node.to_vec();
        let mut succ = vec![Vec::new(); n];
        let mut action = vec![usize::MAX; n];
        for v in 0..n {
            for (act, ts) in &a.edges[v] {
                let e = owner.len();
                owner.push(1);
                prio.push(prio_of_node[v]);
                succ.push(ts.clone());
                action.push(*act);
                succ[v].push(e);
            }
        }
        let mut pred = vec![Vec::new(); owner.len()];
        for (v, ss) in succ.iter().enumerate() {
            for &s in ss {
                pred[s].push(v);
            }
        }
        Graph { owner, prio, succ, pred, action }
    }

    /// Attractor for `player` to `target` inside `alive`; records the
    /// player-0 choice into `strat` when `player` is 0.
    fn attractor(&self, alive: &[bool], target: &[usize], player: u8, strat: &mut [Option<usize>]) -> Vec<bool> {
        let mut inn = vec![false; self.owner.len()];
        let mut count: Vec<usize> =
            (0..self.owner.len()).map(|v| self.succ[v].iter().filter(|&&s| alive[s]).count()).collect();
        let mut stack = Vec::new();
        for &t in target {
            if alive[t] && !inn[t] {
                inn[t] = true;
                stack.push(t);
            }
        }
        while let Some(t) = stack.pop() {
            for &p in &self.pred[t] {
                if !alive[p] || inn[p] {
                    continue;
                }
                if self.owner[p] == player {
                    inn[p] = true;
                    if player == 0 {
                        strat[p] = Some(t);
                    }
                    stack.push(p);
                } else {
                    count[p] -= 1;
                    if count[p] == 0 {
                        inn[p] = true;
                        stack.push(p);
                    }
                }
            }
        }
        inn
    }

    /// Returns the player-0 winning set within `alive`.
    fn zielonka(&self, alive: &[bool], strat: &mut [Option<usize>]) -> Vec<bool> {
        let nodes: Vec<usize> = (0..self.owner.len()).filter(|&v| alive[v]).collect();
        if nodes.is_empty() {
            return vec![false; self.owner.len()];
        }
        let p = nodes.iter().map(|&v| self.prio[v]).min().unwrap();
        let alpha = (p % 2) as u8;
        let top: Vec<usize> = nodes.iter().copied().filter(|&v| self.prio[v] == p).collect();
        let mut local = strat.to_vec();
        let a = self.attractor(alive, &top, alpha, &mut local);
        let rest: Vec<bool> = (0..self.owner.len()).map(|v| alive[v] && !a[v]).collect();
        let mut sub = strat.to_vec();
        let w0 = self.zielonka(&rest, &mut sub);
        let w_opp: Vec<usize> = (0..self.owner.len())
            .filter(|&v| rest[v] && (if alpha == 0 { !w0[v] } else { w0[v] }))
            .collect();
        if w_opp.is_empty() {
            if alpha == 0 {
                // the player wins everywhere: subgame strategy, then the
                // attractor, and on top nodes any edge staying alive
                for &v in &nodes {
                    if self.owner[v] != 0 {
                        continue;
                    }
                    strat[v] = if rest[v] {
                        sub[v]
                    } else if top.contains(&v) {
                        self.succ[v].iter().copied().find(|&s| alive[s])
                    } else {
                        local[v]
                    };
                }
                return alive.to_vec();
            }
            return vec![false; self.owner.len()];
        }
        let opp = 1 - alpha;
        let mut battr = strat.to_vec();
        let b = self.attractor(alive, &w_opp, opp, &mut battr);
        let rest2: Vec<bool> = (0..self.owner.len()).map(|v| alive[v] && !b[v]).collect();
        let mut sub2 = strat.to_vec();
        let w0b = self.zielonka(&rest2, &mut sub2);
        let mut win = vec![false; self.owner.len()];
        for &v in &nodes {
            if rest2[v] {
                win[v] = w0b[v];
                if w0b[v] && self.owner[v] == 0 {
                    strat[v] = sub2[v];
                }
            } else if opp == 0 {
                // b is the player's attractor to its winning part of the first subgame
                win[v] = true;
                if self.owner[v] == 0 {
                    strat[v] = if w_opp.contains(&v) { sub[v] } else { battr[v] };
                }
            }
        }
        win
    }
}

/// Min-even parity: Zielonka's recursion with positional strategies.
pub fn solve_parity(a: &Arena, priorities: &[u32]) -> SolveResult {
    let g = Graph::from_arena(a, &node_priorities(a, priorities));
    let alive = vec![true; g.owner.len()];
    let mut strat = vec![None; g.owner.len()];
    let win = g.zielonka(&alive, &mut strat);
    let n = a.len();
    let winning: Vec<bool> = win[..n].to_vec();
    let strategy = (0..n)
        .map(|v| if winning[v] { strat[v].map(|e| g.action[e]) } else { None })
        .collect();
    let winner = if winning[a.initial] { Winner::PlayerWins } else { Winner::PlayerLoses };
    SolveResult { winner, winning, strategy }
}

/// Dispatches on the game's condition. Targets and priorities refer to the
/// source colors; ⊤win is handled by the arena.
pub fn solve(a: &Arena, condition: &WinningCondition) -> SolveResult {
    match condition {
        WinningCondition::Reachability { targets } => solve_reachability(a, targets),
        WinningCondition::Parity { priorities } => solve_parity(a, priorities),
    }
}

/// Strategy over profile moves: its states are the configurations of the
/// arena classes, plus a dead state for infeasible moves.
pub fn extract_normalized(built: &mut Built<'_>, r: &SolveResult) -> Result<Strategy> {
    if r.winner != Winner::PlayerWins {
        return Err(Error::NotWinning);
    }
    let a = &built.arena;
    let action_at = |v: usize| -> usize {
        r.strategy[v].unwrap_or_else(|| a.edges[v].first().map(|(act, _)| *act).unwrap_or(0))
    };
    let mut state_of: HashMap<Config, StateId> = HashMap::new();
    let mut configs: Vec<(usize, Config)> = Vec::new();
    for (v, ms) in built.members.iter().enumerate() {
        for p in ms {
            state_of.insert(p.clone(), configs.len() as StateId);
            configs.push((v, p.clone()));
        }
    }
    let dead = configs.len() as StateId;
    let n = built.knowledge.game;
    let mut delta = Vec::with_capacity(configs.len() + 1);
    let mut lambda = Vec::with_capacity(configs.len() + 1);
    let init = action_at(a.initial);
    for (_, p) in &configs {
        let q = built.knowledge.state_of(p);
        let mut drow = Vec::with_capacity(n.num_moves());
        let mut lrow = Vec::with_capacity(n.num_moves());
        for d in 0..n.num_moves() {
            if n.feasible(q, d) {
                let next = built.knowledge.delta(p, d)?;
                let s = *state_of.get(&next).ok_or(Error::UnknownClass)?;
                drow.push(s);
                lrow.push(action_at(configs[s as usize].0));
            } else {
                drow.push(dead);
                lrow.push(init);
            }
        }
        delta.push(drow);
        lambda.push(lrow);
    }
    delta.push(vec![dead; n.num_moves()]);
    lambda.push(vec![init; n.num_moves()]);
    let mut names: Vec<String> = configs.iter().enumerate().map(|(i, (v, _))| format!("n{v}.{i}")).collect();
    names.push("dead".into());
    let semi = SemiAutomaton::new(n.base.moves.clone(), names, 0, delta)?;
    let machine = MealyMachine::new(semi, n.base.actions.clone(), lambda)?;
    Ok(Strategy { machine, initial_action: init, denormalized: false })
}

/// The strategy for the source game: the profile strategy composed with β′.
pub fn extract_strategy(n: &NormalizedFip, built: &mut Built<'_>, r: &SolveResult) -> Result<Strategy> {
    let s = extract_normalized(built, r)?;
    Ok(denormalize_strategy(n, &s))
}

/// Outcome of the whole pipeline for one game.
pub struct Synthesis {
    pub winner: Winner,
    pub strategy: Option<Strategy>,
    pub nodes: usize,
    pub configs: usize,
}

pub fn synthesize(game: &FipGame, limits: crate::arena::Limits) -> Result<Synthesis> {
    let n = crate::normalize::normalize(game)?;
    let mut built = crate::arena::build(&n, limits)?;
    let r = solve(&built.arena, &game.condition);
    let strategy = match r.winner {
        Winner::PlayerWins => Some(extract_strategy(&n, &mut built, &r)?),
        Winner::PlayerLoses => None,
    };
    Ok(Synthesis { winner: r.winner, strategy, nodes: built.arena.len(), configs: built.config_count() })
}
