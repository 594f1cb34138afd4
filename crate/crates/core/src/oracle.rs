//! Brute-force ground truth. Everything here enumerates histories and
//! follows the definitions literally, sharing no logic with the main path
//! beyond the game representation itself.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::Serialize;

use crate::arena::{Arena, Built, NodeColor};
use crate::automata::{Letter, StateId};
use crate::error::{Error, Result};
use crate::fip::{members, view_graph, Coalition, FipGame, WinningCondition};
use crate::knowledge::{Config, Knowledge};
use crate::normalize::{normalize, NormalizedFip};
use crate::solve::{node_priorities, Strategy, Winner};
use crate::twotape::{count_accepted, fip_to_2dfa, relation_accepts, TwoTapeDfa, WordPair};

pub const DEFAULT_MAX_DEPTH: usize = 6;
/// Default depth for rebuilding h from its definition.
pub const DEFAULT_H_DEPTH: usize = 5;
/// Largest arena `brute_solve` accepts.
pub const BRUTE_SOLVE_MAX_NODES: usize = 10;

struct Interner<K> {
    map: HashMap<K, u32>,
}

impl<K: Hash + Eq> Interner<K> {
    fn new() -> Self {
        Interner { map: HashMap::new() }
    }

    fn id(&mut self, k: K) -> u32 {
        let n = self.map.len() as u32;
        *self.map.entry(k).or_insert(n)
    }
}

/// Feasible histories of a normalized game, by length, in canonical order.
#[derive(Clone, Debug)]
pub struct Population {
    pub words: Vec<Vec<Vec<Letter>>>,
    /// Index of the one-shorter prefix.
    pub parent: Vec<Vec<usize>>,
    /// Indices of the one-longer extensions.
    pub children: Vec<Vec<Vec<usize>>>,
    /// State of the folded machine after the history.
    pub state: Vec<Vec<StateId>>,
}

impl Population {
    pub fn new(n: &NormalizedFip, depth: usize) -> Population {
        let q0 = n.initial_state();
        let mut words = vec![vec![Vec::new()]];
        let mut parent = vec![vec![usize::MAX]];
        let mut state = vec![vec![q0]];
        let mut children = Vec::new();
        for len in 0..depth {
            let mut w = Vec::new();
            let mut p = Vec::new();
            let mut s = Vec::new();
            let mut ch = Vec::new();
            for (idx, word) in words[len].iter().enumerate() {
                let q = state[len][idx];
                let mut mine = Vec::new();
                for d in 0..n.num_moves() {
                    if n.feasible(q, d) {
                        mine.push(w.len());
                        let mut next = word.clone();
                        next.push(d);
                        w.push(next);
                        p.push(idx);
                        s.push(n.step(q, d));
                    }
                }
                ch.push(mine);
            }
            words.push(w);
            parent.push(p);
            state.push(s);
            children.push(ch);
        }
        children.push(vec![Vec::new(); words[depth].len()]);
        Population { words, parent, children, state }
    }

    pub fn depth(&self) -> usize {
        self.words.len() - 1
    }

    pub fn total(&self) -> usize {
        self.words.iter().map(|w| w.len()).sum()
    }

    pub fn last(&self, len: usize, idx: usize) -> Letter {
        *self.words[len][idx].last().expect("non-empty history")
    }
}

/// What one player knows: the (player, round, observation) triples it can
/// reach in the view graph.
pub type ViewKey = Vec<(usize, usize, usize)>;
pub type ViewKeys = Vec<ViewKey>;

/// Per-player view key of a history: every node reachable from (i, ℓ) in
/// the view graph, with its observation. Walks the materialized edge list.

pub fn view_keys(game: &FipGame, word: &[Letter]) -> Result<ViewKeys> {
    let obs = game.observe(word)?;
    let g = view_graph(game, word)?;
    let mut adj: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for &(a, b) in &g.edges {
        adj.entry(a).or_default().push(b);
    }
    let len = word.len();
    Ok((0..game.num_players)
        .map(|i| {
            let mut seen = HashSet::from([(i, len)]);
            let mut stack = vec![(i, len)];
            while let Some(v) = stack.pop() {
                for &w in adj.get(&v).map(|x| x.as_slice()).unwrap_or(&[]) {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            let mut key: Vec<(usize, usize, usize)> =
                seen.into_iter().filter(|&(_, t)| t > 0).map(|(j, t)| (j, t, obs[j][t - 1])).collect();
            key.sort_unstable();
            key
        })
        .collect())
}

/// Class ids of a coalition at one length, renumbered by first occurrence
/// so that two labelings of the same partition compare equal.
fn canonical(ids: &[u32]) -> Vec<u32> {
    let mut map = HashMap::new();
    ids.iter()
        .map(|&i| {
            let n = map.len() as u32;
            *map.entry(i).or_insert(n)
        })
        .collect()
}

/// ~_J for every nonempty coalition J over the feasible histories, built
/// twice: from view graphs and from the one-step recursion
/// [τc]_J = {τ′d | τ′ ~_K τ, d[K] = c[K]} with K = sync_J(c).
pub struct Indist {
    pub pop: Population,
    num_players: usize,
    /// classes[J - 1][len][idx], canonical numbering.
    classes: Vec<Vec<Vec<u32>>>,
}

impl Indist {
    pub fn new(n: &NormalizedFip, depth: usize, max_depth: usize) -> Result<Indist> {
        if depth > max_depth {
            return Err(Error::DepthExceeded(depth, max_depth));
        }
        let pop = Population::new(n, depth);
        let np = n.num_players();
        let ncoal = (1usize << np) - 1;

        // view-graph route
        let mut by_view: Vec<Vec<Vec<u32>>> = vec![Vec::new(); ncoal];
        for len in 0..=depth {
            let mut per_player: Vec<Interner<Vec<(usize, usize, usize)>>> = (0..np).map(|_| Interner::new()).collect();
            let keys: Vec<Vec<u32>> = pop.words[len]
                .iter()
                .map(|w| {
                    let ks = view_keys(&n.base, w)?;
                    Ok(ks.into_iter().enumerate().map(|(i, k)| per_player[i].id(k)).collect())
                })
                .collect::<Result<_>>()?;
            for j in 1..=ncoal as Coalition {
                let mut it = Interner::new();
                let ids: Vec<u32> = keys
                    .iter()
                    .map(|k| it.id(members(j).map(|i| k[i]).collect::<Vec<_>>()))
                    .collect();
                by_view[j as usize - 1].push(canonical(&ids));
            }
        }

        // recursion route
        let mut by_rec: Vec<Vec<Vec<u32>>> = vec![vec![vec![0]]; ncoal];
        for len in 1..=depth {
            for j in 1..=ncoal as Coalition {
                let mut it = Interner::new();
                let ids: Vec<u32> = (0..pop.words[len].len())
                    .map(|idx| {
                        let c = pop.last(len, idx);
                        let k = n.sync(j, c);
                        let prev = by_rec[k as usize - 1][len - 1][pop.parent[len][idx]];
                        let part: Vec<usize> = members(k).map(|i| n.profiles[c][i]).collect();
                        it.id((k, prev, part))
                    })
                    .collect();
                by_rec[j as usize - 1].push(canonical(&ids));
            }
        }

        for j in 1..=ncoal {
            for len in 0..=depth {
                if by_view[j - 1][len] != by_rec[j - 1][len] {
                    let at = (0..by_view[j - 1][len].len())
                        .find(|&i| by_view[j - 1][len][i] != by_rec[j - 1][len][i])
                        .unwrap_or(0);
                    return Err(Error::OracleMismatch(format!(
                        "~ for coalition {j:#b} at length {len}: view graphs and recursion split history {} differently",
                        n.base.moves.render(&pop.words[len][at]).join(" ")
                    )));
                }
            }
        }
        Ok(Indist { pop, num_players: np, classes: by_view })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn class(&self, j: Coalition, len: usize, idx: usize) -> u32 {
        self.classes[j as usize - 1][len][idx]
    }

    /// The classes of ~_J at one length, as sorted index lists.
    pub fn partition(&self, j: Coalition, len: usize) -> Vec<Vec<usize>> {
        let ids = &self.classes[j as usize - 1][len];
        let n = ids.iter().map(|&i| i as usize + 1).max().unwrap_or(0);
        let mut out = vec![Vec::new(); n];
        for (idx, &c) in ids.iter().enumerate() {
            out[c as usize].push(idx);
        }
        out
    }
}

/// The partition of ~_J per length, as lists of histories.
pub fn brute_indist(n: &NormalizedFip, j: Coalition, depth: usize) -> Result<Vec<Vec<Vec<Vec<Letter>>>>> {
    let ind = Indist::new(n, depth, DEFAULT_MAX_DEPTH)?;
    Ok((0..=depth)
        .map(|len| {
            ind.partition(j, len)
                .into_iter()
                .map(|cls| cls.into_iter().map(|i| ind.pop.words[len][i].clone()).collect())
                .collect()
        })
        .collect())
}

/// h(τ) for every feasible history up to `depth`, computed from the
/// definition: h[I] is the current state and h[J] collects the tuples
/// (h(τ′)[K])_{K∈↑J} over τ′ ~_J τ. Values go through `k.store`.
pub fn brute_h(k: &mut Knowledge<'_>, ind: &Indist, depth: usize) -> Result<Vec<Vec<Config>>> {
    if depth > ind.pop.depth() {
        return Err(Error::DepthExceeded(depth, ind.pop.depth()));
    }
    let full = k.full();
    let order = k.coalitions_desc();
    let nslots = order.len();
    let mut out = Vec::with_capacity(depth + 1);
    for len in 0..=depth {
        let count = ind.pop.words[len].len();
        let mut vals = vec![vec![0; nslots]; count];
        for (idx, v) in vals.iter_mut().enumerate() {
            v[crate::knowledge::slot(full)] = k.store.states(&[ind.pop.state[len][idx]]);
        }
        for &j in order.iter().skip(1) {
            let tuples: Vec<u32> = (0..count)
                .map(|idx| {
                    let entries: Vec<u32> =
                        k.store.up(j).to_vec().iter().map(|&kk| vals[idx][crate::knowledge::slot(kk)]).collect();
                    k.store.tuple(j, &entries)
                })
                .collect::<Result<_>>()?;
            for class in ind.partition(j, len) {
                let ts: Vec<u32> = class.iter().map(|&i| tuples[i]).collect();
                let v = k.store.set(j, &ts)?;
                for &i in &class {
                    vals[i][crate::knowledge::slot(j)] = v;
                }
            }
        }
        out.push(vals.into_iter().map(Config).collect());
    }
    Ok(out)
}

/// Δ iterated along every feasible history, following the population.
pub fn delta_configs(k: &mut Knowledge<'_>, pop: &Population, depth: usize) -> Result<Vec<Vec<Config>>> {
    let mut out: Vec<Vec<Config>> = vec![vec![k.initial_config()?]];
    for len in 1..=depth.min(pop.depth()) {
        let row = (0..pop.words[len].len())
            .map(|idx| {
                let p = out[len - 1][pop.parent[len][idx]].clone();
                k.delta(&p, pop.last(len, idx))
            })
            .collect::<Result<_>>()?;
        out.push(row);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSet {
    /// Indices into the population at this level.
    pub members: Vec<usize>,
    /// Color of the last move; `None` at the root.
    pub color: Option<usize>,
    /// (action, index of the successor set), sorted.
    pub children: Vec<(usize, usize)>,
}

/// The information tree of player 0 cut at a depth.
#[derive(Clone, Debug)]
pub struct InfoTree {
    pub levels: Vec<Vec<InfoSet>>,
    /// Set index of every history.
    pub set_of: Vec<Vec<usize>>,
}

impl InfoTree {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn successor_counts(&self, level: usize) -> Vec<usize> {
        self.levels[level].iter().map(|u| u.children.len()).collect()
    }
}

pub fn info_tree(n: &NormalizedFip, ind: &Indist, depth: usize) -> Result<InfoTree> {
    if depth > ind.pop.depth() {
        return Err(Error::DepthExceeded(depth, ind.pop.depth()));
    }
    let pop = &ind.pop;
    let mut levels = Vec::new();
    let mut set_of = Vec::new();
    for len in 0..=depth {
        let part = ind.partition(1, len);
        let mut of = vec![0; pop.words[len].len()];
        let mut sets = Vec::with_capacity(part.len());
        for (s, class) in part.into_iter().enumerate() {
            for &i in &class {
                of[i] = s;
            }
            let colors: HashSet<Option<usize>> = class
                .iter()
                .map(|&i| if len == 0 { None } else { n.state_color[pop.state[len][i] as usize] })
                .collect();
            if colors.len() != 1 {
                return Err(Error::InvalidGame(format!(
                    "coloring is not information-consistent: an information set at depth {len} has {} colors",
                    colors.len()
                )));
            }
            let color = colors.into_iter().next().unwrap();
            sets.push(InfoSet { members: class, color, children: Vec::new() });
        }
        levels.push(sets);
        set_of.push(of);
    }
    for len in 0..depth {
        for s in 0..levels[len].len() {
            let mut ch: Vec<(usize, usize)> = Vec::new();
            for &i in &levels[len][s].members {
                for &c in &pop.children[len][i] {
                    ch.push((n.act(pop.last(len + 1, c)), set_of[len + 1][c]));
                }
            }
            ch.sort_unstable();
            ch.dedup();
            // a successor set is entered by one action only
            let mut seen = HashMap::new();
            for &(a, t) in &ch {
                if *seen.entry(t).or_insert(a) != a {
                    return Err(Error::InvalidGame(format!("action is not visible at depth {}", len + 1)));
                }
            }
            levels[len][s].children = ch;
        }
    }
    Ok(InfoTree { levels, set_of })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BisimReport {
    pub depth: usize,
    pub sets: usize,
    /// Information sets whose histories land on different nodes.
    pub split_sets: Vec<String>,
    pub zig_failures: Vec<String>,
    pub zag_failures: Vec<String>,
    pub color_failures: Vec<String>,
}

impl BisimReport {
    pub fn ok(&self) -> bool {
        self.split_sets.is_empty()
            && self.zig_failures.is_empty()
            && self.zag_failures.is_empty()
            && self.color_failures.is_empty()
    }
}

/// Checks that mapping each information set to the arena node of its
/// histories is a bisimulation up to the tree depth.
pub fn bisimulation(built: &mut Built<'_>, tree: &InfoTree, pop: &Population) -> Result<BisimReport> {
    let depth = tree.depth();
    let configs = delta_configs(&mut built.knowledge, pop, depth)?;
    let mut rep = BisimReport { depth, ..Default::default() };
    let mut node: Vec<Vec<usize>> = Vec::new();
    for len in 0..=depth {
        let mut row = Vec::new();
        for (s, u) in tree.levels[len].iter().enumerate() {
            let nodes: HashSet<usize> =
                u.members.iter().map(|&i| built.node_of(&configs[len][i])).collect::<Result<_>>()?;
            if nodes.len() != 1 {
                rep.split_sets.push(format!("depth {len} set {s}"));
            }
            let v = *nodes.iter().min().unwrap();
            let expect = match u.color {
                None => NodeColor::Start,
                Some(c) if c == built.knowledge.game.win_color => NodeColor::Win,
                Some(c) => NodeColor::Color(c),
            };
            if built.arena.node_colors[v] != expect {
                rep.color_failures.push(format!("depth {len} set {s} node {v}"));
            }
            row.push(v);
        }
        rep.sets += row.len();
        node.push(row);
    }
    let a = &built.arena;
    for len in 0..depth {
        for (s, u) in tree.levels[len].iter().enumerate() {
            let v = node[len][s];
            for &(act, t) in &u.children {
                if !a.successors(v, act).contains(&node[len + 1][t]) {
                    rep.zig_failures.push(format!("depth {len} set {s} --{}--> set {t}", a.actions.name(act)));
                }
            }
            for (act, succ) in &a.edges[v] {
                for &w in succ {
                    let matched = u.children.iter().any(|&(b, t)| b == *act && node[len + 1][t] == w);
                    if !matched {
                        rep.zag_failures.push(format!("node {v} --{}--> node {w} at depth {len}", a.actions.name(*act)));
                    }
                }
            }
        }
    }
    Ok(rep)
}

fn is_target(targets: &[bool], color: Option<usize>) -> bool {
    color.map(|c| targets[c]).unwrap_or(false)
}

/// AND-OR search on the information tree: does some decision function that
/// is constant on information sets force a target color within the depth?
/// Choices at different sets are independent, so this covers every
/// information-consistent decision function.
pub fn exists_winning_decision(n: &NormalizedFip, tree: &InfoTree) -> Result<bool> {
    let WinningCondition::Reachability { targets } = &n.base.condition else {
        return Err(Error::InvalidGame("bounded search needs a reachability condition".into()));
    };
    let depth = tree.depth();
    let mut win: Vec<bool> = tree.levels[depth].iter().map(|u| is_target(targets, u.color)).collect();
    for len in (0..depth).rev() {
        win = tree.levels[len]
            .iter()
            .map(|u| {
                if is_target(targets, u.color) {
                    return true;
                }
                let mut by_action: HashMap<usize, bool> = HashMap::new();
                for &(a, t) in &u.children {
                    let e = by_action.entry(a).or_insert(true);
                    *e = *e && win[t];
                }
                by_action.values().any(|&w| w)
            })
            .collect();
    }
    Ok(win[0])
}

/// The same search on the unnormalized game: information sets are groups
/// of equal player-0 view keys over all of Γ^ℓ.
pub fn exists_winning_decision_source(g: &FipGame, depth: usize) -> Result<bool> {
    let WinningCondition::Reachability { targets } = &g.condition else {
        return Err(Error::InvalidGame("bounded search needs a reachability condition".into()));
    };
    let k = g.moves.len();
    // per level: set index of every word (words in all_words order)
    let mut set_of: Vec<Vec<usize>> = Vec::new();
    let mut hit: Vec<Vec<bool>> = Vec::new();
    for len in 0..=depth {
        let mut ids: Interner<Vec<(usize, usize, usize)>> = Interner::new();
        let mut of = Vec::new();
        let mut h: Vec<Option<bool>> = Vec::new();
        for w in all_words(k, len) {
            let s = ids.id(view_keys(g, &w)?.swap_remove(0)) as usize;
            let t = len > 0 && targets[*g.coloring.trace(&w)?.last().unwrap()];
            if s == h.len() {
                h.push(Some(t));
            } else if h[s] != Some(t) {
                return Err(Error::InvalidGame(format!("coloring is not information-consistent at depth {len}")));
            }
            of.push(s);
        }
        set_of.push(of);
        hit.push(h.into_iter().map(|x| x.unwrap()).collect());
    }
    let mut win = hit[depth].clone();
    for len in (0..depth).rev() {
        // word index i at len has children i*k + c at len + 1
        let sets = hit[len].len();
        let mut by_action: Vec<HashMap<usize, bool>> = vec![HashMap::new(); sets];
        for (i, &s) in set_of[len].iter().enumerate() {
            for c in 0..k {
                let e = by_action[s].entry(g.act[c]).or_insert(true);
                *e = *e && win[set_of[len + 1][i * k + c]];
            }
        }
        win = (0..sets).map(|s| hit[len][s] || by_action[s].values().any(|&w| w)).collect();
    }
    Ok(win[0])
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub horizon: usize,
    pub plays: usize,
    pub losing_play: Option<Vec<String>>,
    pub inconsistent: Option<(Vec<String>, Vec<String>)>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.losing_play.is_none() && self.inconsistent.is_none()
    }
}

/// Plays the strategy against every choice of Nature up to `horizon`.
/// Reachability: every play must show a target color in time. Parity: a
/// lasso whose loop has an odd least priority is reported. Information
/// consistency is checked on all histories up to the horizon, or fewer
/// when there are more than `consistency_budget` of them.
pub fn verify_strategy(g: &FipGame, s: &Strategy, horizon: usize) -> Result<Verification> {
    verify_strategy_with(g, s, horizon, 1 << 18)
}

pub fn verify_strategy_with(g: &FipGame, s: &Strategy, horizon: usize, consistency_budget: usize) -> Result<Verification> {
    if s.machine.base.alphabet != g.moves || s.machine.outputs != g.actions {
        return Err(Error::AlphabetMismatch("strategy is not over the game's moves and actions".into()));
    }
    let mut v = Verification { horizon, ..Default::default() };
    let m = &s.machine;
    let col = &g.coloring;
    let render = |w: &[Letter]| g.moves.render(w);

    // (coloring state, strategy state, action to play)
    type Node = (StateId, StateId, usize);
    struct Frame {
        word: Vec<Letter>,
        node: Node,
        /// Nodes after each prefix, and the colors emitted.
        path: Vec<Node>,
        colors: Vec<usize>,
    }
    let start: Node = (col.initial(), m.initial(), s.initial_action);
    let mut stack = vec![Frame { word: Vec::new(), node: start, path: vec![start], colors: Vec::new() }];
    while let Some(f) = stack.pop() {
        let (qc, qs, a) = f.node;
        let mut moves: Vec<Letter> = (0..g.moves.len()).filter(|&c| g.act[c] == a).collect();
        moves.reverse();
        for c in moves {
            let color = col.output(qc, c);
            let next: Node = (col.step(qc, c), m.step(qs, c), m.output(qs, c));
            let mut word = f.word.clone();
            word.push(c);
            match &g.condition {
                WinningCondition::Reachability { targets } => {
                    if targets[color] {
                        v.plays += 1;
                        continue;
                    }
                    if word.len() == horizon {
                        v.plays += 1;
                        v.losing_play = Some(render(&word));
                        return Ok(v);
                    }
                    stack.push(Frame { word, node: next, path: Vec::new(), colors: Vec::new() });
                }
                WinningCondition::Parity { priorities } => {
                    let mut colors = f.colors.clone();
                    colors.push(color);
                    if let Some(start) = f.path.iter().position(|&p| p == next) {
                        v.plays += 1;
                        let least = colors[start..].iter().map(|&c| priorities[c]).min().unwrap();
                        if least % 2 == 1 {
                            v.losing_play = Some(render(&word));
                            return Ok(v);
                        }
                        continue;
                    }
                    if word.len() == horizon {
                        v.plays += 1;
                        continue;
                    }
                    let mut path = f.path.clone();
                    path.push(next);
                    stack.push(Frame { word, node: next, path, colors });
                }
            }
        }
    }

    // decisions must agree on player-0 indistinguishable histories
    let k = g.moves.len();
    let mut level: Vec<Vec<Letter>> = vec![Vec::new()];
    for len in 0..=horizon {
        if len > 0 {
            if level.len().saturating_mul(k) > consistency_budget {
                break;
            }
            level = level
                .iter()
                .flat_map(|w| {
                    (0..k).map(move |c| {
                        let mut x = w.clone();
                        x.push(c);
                        x
                    })
                })
                .collect();
        }
        let mut seen: HashMap<ViewKey, (usize, usize)> = HashMap::new();
        for (idx, w) in level.iter().enumerate() {
            let key = view_keys(g, w)?.swap_remove(0);
            let act = s.decide(w)?;
            match seen.get(&key) {
                Some(&(other, a)) if a != act => {
                    v.inconsistent = Some((render(&level[other]), render(w)));
                    return Ok(v);
                }
                Some(_) => {}
                None => {
                    seen.insert(key, (idx, act));
                }
            }
        }
    }
    Ok(v)
}

/// Enumerates positional strategies; only for tiny arenas.
pub fn brute_solve(a: &Arena, condition: &WinningCondition) -> Result<Winner> {
    if a.len() > BRUTE_SOLVE_MAX_NODES {
        return Err(Error::TooLarge(a.len()));
    }
    let n = a.len();
    let choices: Vec<usize> = (0..n).map(|v| a.edges[v].len().max(1)).collect();
    let mut pick = vec![0usize; n];
    loop {
        let succ = |v: usize| -> &[usize] { a.edges[v].get(pick[v]).map(|(_, s)| s.as_slice()).unwrap_or(&[]) };
        let env_wins = match condition {
            WinningCondition::Reachability { targets } => {
                let target = |v: usize| match a.node_colors[v] {
                    NodeColor::Win => true,
                    NodeColor::Color(c) => targets[c],
                    NodeColor::Start => false,
                };
                let alive: Vec<bool> = (0..n).map(|v| !target(v)).collect();
                // a dead end also escapes the target forever
                let reach = reachable_within(n, a.initial, &alive, &succ);
                reach.iter().any(|&v| succ(v).is_empty()) || has_cycle(&reach, &alive, &succ)
            }
            WinningCondition::Parity { priorities } => {
                let pr = node_priorities(a, priorities);
                let all = vec![true; n];
                let reach = reachable_within(n, a.initial, &all, &succ);
                let dead_end = reach.iter().any(|&v| succ(v).is_empty());
                dead_end
                    || (0..=pr.iter().copied().max().unwrap_or(0)).filter(|p| p % 2 == 1).any(|p| {
                        let keep: Vec<bool> = (0..n).map(|v| pr[v] >= p).collect();
                        odd_cycle(&reach, &keep, &pr, p, &succ)
                    })
            }
        };
        if !env_wins {
            return Ok(Winner::PlayerWins);
        }
        // next strategy in mixed radix
        let mut i = 0;
        loop {
            if i == n {
                return Ok(Winner::PlayerLoses);
            }
            pick[i] += 1;
            if pick[i] < choices[i] {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn reachable_within<'a>(n: usize, from: usize, alive: &[bool], succ: &dyn Fn(usize) -> &'a [usize]) -> Vec<usize> {
    if !alive[from] {
        return Vec::new();
    }
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut stack = vec![from];
    let mut out = Vec::new();
    while let Some(v) = stack.pop() {
        out.push(v);
        for &w in succ(v) {
            if alive[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out
}

/// Some cycle among `nodes` using only `alive` nodes.
fn has_cycle<'a>(nodes: &[usize], alive: &[bool], succ: &dyn Fn(usize) -> &'a [usize]) -> bool {
    nodes.iter().any(|&v| {
        let back = reachable_within(alive.len(), v, alive, succ);
        back.iter().any(|&w| succ(w).contains(&v))
    })
}

/// A cycle through a node of priority `p` among reachable nodes of priority ≥ p.
fn odd_cycle<'a>(reach: &[usize], keep: &[bool], pr: &[u32], p: u32, succ: &dyn Fn(usize) -> &'a [usize]) -> bool {
    reach.iter().filter(|&&v| pr[v] == p).any(|&v| {
        let fwd = reachable_within(keep.len(), v, keep, succ);
        fwd.iter().any(|&w| succ(w).contains(&v))
    })
}

/// Bounded game-tree search for reachability: the player wins from v in k
/// steps if v is a target or some action leads only to winners in k − 1.
pub fn game_tree_reachability(a: &Arena, targets: &[bool]) -> Winner {
    fn win(a: &Arena, targets: &[bool], v: usize, k: usize, memo: &mut HashMap<(usize, usize), bool>) -> bool {
        let hit = match a.node_colors[v] {
            NodeColor::Win => true,
            NodeColor::Color(c) => targets[c],
            NodeColor::Start => false,
        };
        if hit {
            return true;
        }
        if k == 0 {
            return false;
        }
        if let Some(&w) = memo.get(&(v, k)) {
            return w;
        }
        let w = a.edges[v].iter().any(|(_, ts)| ts.iter().all(|&t| win(a, targets, t, k - 1, memo)));
        memo.insert((v, k), w);
        w
    }
    if win(a, targets, a.initial, a.len(), &mut HashMap::new()) {
        Winner::PlayerWins
    } else {
        Winner::PlayerLoses
    }
}

/// All source histories of one length in canonical order.
pub fn all_words(k: usize, len: usize) -> Vec<Vec<Letter>> {
    let mut level = vec![Vec::new()];
    for _ in 0..len {
        level = level
            .iter()
            .flat_map(|w: &Vec<Letter>| {
                (0..k).map(move |c| {
                    let mut x = w.clone();
                    x.push(c);
                    x
                })
            })
            .collect();
    }
    level
}

/// Compares a two-tape relation with player 0's indistinguishability on all
/// pairs of one length: every pair inside a class must be accepted, and the
/// number of accepted pairs must equal Σ|class|², which together force the
/// two relations to coincide. Returns a witness pair on disagreement.
pub fn fip_2dfa_agree(g: &FipGame, r: &TwoTapeDfa, len: usize) -> Result<Option<WordPair>> {
    let words = all_words(g.moves.len(), len);
    let mut classes: HashMap<Vec<(usize, usize, usize)>, Vec<usize>> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        classes.entry(view_keys(g, w)?.swap_remove(0)).or_default().push(i);
    }
    let mut classes: Vec<Vec<usize>> = classes.into_values().collect();
    classes.sort();
    let mut inside: u128 = 0;
    for cls in &classes {
        inside += (cls.len() * cls.len()) as u128;
        for &x in cls {
            for &y in cls {
                if !relation_accepts(r, &words[x], &words[y])? {
                    return Ok(Some((words[x].clone(), words[y].clone())));
                }
            }
        }
    }
    if count_accepted(r, len) == inside {
        return Ok(None);
    }
    // some accepted pair crosses classes; find one
    let mut class_of = vec![0; words.len()];
    for (c, cls) in classes.iter().enumerate() {
        for &x in cls {
            class_of[x] = c;
        }
    }
    for x in 0..words.len() {
        for y in 0..words.len() {
            if class_of[x] != class_of[y] && relation_accepts(r, &words[x], &words[y])? {
                return Ok(Some((words[x].clone(), words[y].clone())));
            }
        }
    }
    Err(Error::OracleMismatch("accepted-pair count differs but no witness was found".into()))
}

/// Violation counts of the algebraic identities over a history population.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AlgebraReport {
    pub histories: usize,
    pub configs: usize,
    pub values: usize,
    pub rectangularity: Vec<String>,
    pub equivalence: Vec<String>,
    pub class_image: Vec<String>,
    pub lift_identity: Vec<String>,
    pub lift_renaming: Vec<String>,
    pub lift_composition: Vec<String>,
    /// Number of individual lift comparisons made.
    pub lift_checks: usize,
}

impl AlgebraReport {
    pub fn ok(&self) -> bool {
        self.rectangularity.is_empty()
            && self.equivalence.is_empty()
            && self.class_image.is_empty()
            && self.lift_identity.is_empty()
            && self.lift_renaming.is_empty()
            && self.lift_composition.is_empty()
    }
}

fn subsets(m: Coalition) -> impl Iterator<Item = Coalition> {
    // all submasks of m, m itself first, 0 last
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}

/// Every value reachable from the configurations through tuple entries.
fn value_population(k: &Knowledge<'_>, configs: &[Config]) -> Vec<u32> {
    let mut seen = HashSet::new();
    let mut stack: Vec<u32> = configs.iter().flat_map(|c| c.0.iter().copied()).collect();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        for e in k.store.elements(v) {
            if let crate::knowledge::Elem::Tuple(t) = e {
                stack.extend(k.store.entries(t).iter().copied());
            }
        }
    }
    let mut out: Vec<u32> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Checks, on h computed from its definition: rectangularity, that the
/// image R^H of ~_{0} is an equivalence, the class-image law, and the lift
/// identity, renaming and compositionality laws on every value that occurs.
pub fn algebraic_identities(n: &NormalizedFip, depth: usize) -> Result<AlgebraReport> {
    const SHOW: usize = 5;
    let ind = Indist::new(n, depth, DEFAULT_MAX_DEPTH)?;
    let mut k = Knowledge::new(n);
    let h = brute_h(&mut k, &ind, depth)?;
    let mut rep = AlgebraReport { histories: ind.pop.total(), ..Default::default() };
    let push = |v: &mut Vec<String>, s: String| {
        if v.len() < SHOW {
            v.push(s)
        }
    };
    let word = |len: usize, i: usize| words_str(&n.base, &ind.pop.words[len][i]);

    let mut ids: Interner<Config> = Interner::new();
    let hid: Vec<Vec<u32>> = h.iter().map(|row| row.iter().map(|c| ids.id(c.clone())).collect()).collect();
    rep.configs = ids.map.len();

    // class images and R^H
    let mut image_of_class: Vec<Vec<Vec<u32>>> = Vec::new();
    let mut r: HashSet<(u32, u32)> = HashSet::new();
    for len in 0..=depth {
        let part = ind.partition(1, len);
        let mut imgs = vec![Vec::new(); part.len()];
        for (c, class) in part.iter().enumerate() {
            let mut img: Vec<u32> = class.iter().map(|&i| hid[len][i]).collect();
            img.sort_unstable();
            img.dedup();
            for &x in &img {
                for &y in &img {
                    r.insert((x, y));
                }
            }
            imgs[c] = img;
        }
        image_of_class.push(imgs);
    }

    // rectangularity: equal h-values have equal class images
    let mut first: HashMap<u32, (usize, usize)> = HashMap::new();
    for len in 0..=depth {
        for i in 0..hid[len].len() {
            let x = hid[len][i];
            let img = &image_of_class[len][ind.class(1, len, i) as usize];
            match first.get(&x) {
                Some(&(l2, i2)) => {
                    if image_of_class[l2][ind.class(1, l2, i2) as usize] != *img {
                        rep.rectangularity.push(format!("{} / {}", word(l2, i2), word(len, i)));
                    }
                }
                None => {
                    first.insert(x, (len, i));
                }
            }
        }
    }
    rep.rectangularity.truncate(SHOW);

    // R^H is an equivalence on the image of h
    let mut succ: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(x, y) in &r {
        succ.entry(x).or_default().push(y);
    }
    for x in 0..rep.configs as u32 {
        if !r.contains(&(x, x)) {
            push(&mut rep.equivalence, format!("not reflexive at config {x}"));
        }
    }
    for &(x, y) in &r {
        if !r.contains(&(y, x)) {
            push(&mut rep.equivalence, format!("not symmetric on ({x}, {y})"));
        }
        for &z in &succ[&y] {
            if !r.contains(&(x, z)) {
                push(&mut rep.equivalence, format!("not transitive on ({x}, {y}, {z})"));
            }
        }
    }

    // class image law: h([τ]) = [h(τ)]_R
    for len in 0..=depth {
        for i in 0..hid[len].len() {
            let img = &image_of_class[len][ind.class(1, len, i) as usize];
            let mut cls = succ[&hid[len][i]].clone();
            cls.sort_unstable();
            if *img != cls {
                push(&mut rep.class_image, word(len, i));
            }
        }
    }

    // lift laws on every value in sight
    let all: Vec<Config> = h.iter().flatten().cloned().collect();
    let values = value_population(&k, &all);
    rep.values = values.len();
    let store = &mut k.store;
    for &psi in &values {
        let l = store.sort(psi);
        for j in subsets(l).filter(|j| j & 1 == 1) {
            let rest = l & !j;
            if rest == 0 {
                // identity: S ⊆ J
                for s in subsets(j) {
                    rep.lift_checks += 1;
                    if store.lift(s, j, psi)? != psi {
                        push(&mut rep.lift_identity, format!("S={s:#b} J={j:#b} value {psi}"));
                    }
                }
                continue;
            }
            // renaming: every S with J∪S = L gives the same lift
            let base = store.lift(rest, j, psi)?;
            for extra in subsets(j) {
                rep.lift_checks += 1;
                if store.lift(rest | extra, j, psi)? != base {
                    push(&mut rep.lift_renaming, format!("S={:#b} vs {rest:#b}, J={j:#b}, value {psi}", rest | extra));
                }
            }
            // compositionality: lift(S,J)∘lift(T,J∪S) = lift(S∪T,J)
            for s in subsets(rest) {
                for t in subsets(rest).filter(|t| s | t == rest) {
                    rep.lift_checks += 1;
                    let inner = store.lift(t, j | s, psi)?;
                    if store.lift(s, j, inner)? != base {
                        push(&mut rep.lift_composition, format!("S={s:#b} T={t:#b} J={j:#b} value {psi}"));
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub identity: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub depth: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(identity: &str, r: Result<std::result::Result<String, (String, Option<String>)>>) -> Check {
    match r {
        Ok(Ok(detail)) => Check { identity: identity.into(), passed: true, detail, witness: None },
        Ok(Err((detail, witness))) => Check { identity: identity.into(), passed: false, detail, witness },
        Err(e) => Check { identity: identity.into(), passed: false, detail: e.to_string(), witness: None },
    }
}

fn words_str(g: &FipGame, w: &[Letter]) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        g.moves.render(w).join(" ")
    }
}

/// Runs every identity the oracle knows on one game.
pub fn report(g: &FipGame, depth: usize, strategy: Option<&Strategy>) -> Result<Report> {
    if depth > DEFAULT_MAX_DEPTH {
        return Err(Error::DepthExceeded(depth, DEFAULT_MAX_DEPTH));
    }
    let n = normalize(g)?;
    let mut checks = Vec::new();
    let ind = match Indist::new(&n, depth, DEFAULT_MAX_DEPTH) {
        Ok(ind) => {
            checks.push(check("indistinguishability-two-routes", Ok(Ok(format!("{} histories", ind.pop.total())))));
            Some(ind)
        }
        Err(e) => {
            checks.push(check("indistinguishability-two-routes", Err(e)));
            None
        }
    };
    if let Some(ind) = &ind {
        let hd = depth.min(DEFAULT_H_DEPTH);
        checks.push(check(
            "morphism",
            (|| {
                let mut k = Knowledge::new(&n);
                let h = brute_h(&mut k, ind, hd)?;
                let d = delta_configs(&mut k, &ind.pop, hd)?;
                for len in 0..=hd {
                    for idx in 0..h[len].len() {
                        if h[len][idx] != d[len][idx] {
                            return Ok(Err((
                                format!("Δ and the definition differ at length {len}"),
                                Some(words_str(&n.base, &ind.pop.words[len][idx])),
                            )));
                        }
                        if !k.is_consistent(&d[len][idx])? {
                            return Ok(Err((
                                "configuration is not consistent".into(),
                                Some(words_str(&n.base, &ind.pop.words[len][idx])),
                            )));
                        }
                    }
                }
                Ok(Ok(format!("h = Δ-iteration on {} histories", h.iter().map(|r| r.len()).sum::<usize>())))
            })(),
        ));
        checks.push(check(
            "coloring-information-consistent",
            info_tree(&n, ind, depth).map(|t| Ok(format!("{} information sets", t.levels.iter().map(|l| l.len()).sum::<usize>()))),
        ));
        checks.push(check(
            "bisimulation",
            (|| {
                let tree = info_tree(&n, ind, depth)?;
                let mut built = crate::arena::build(&n, crate::arena::Limits::default())?;
                let rep = bisimulation(&mut built, &tree, &ind.pop)?;
                Ok(if rep.ok() {
                    Ok(format!("{} information sets onto {} nodes", rep.sets, built.arena.len()))
                } else {
                    Err(("zig/zag violated".into(), Some(format!("{rep:?}"))))
                })
            })(),
        ));
    }
    checks.push(check(
        "algebraic-identities",
        algebraic_identities(&n, depth.min(4)).map(|a| {
            if a.ok() {
                Ok(format!("{} configurations, {} values, {} lift comparisons", a.configs, a.values, a.lift_checks))
            } else {
                Err(("violations found".into(), Some(format!("{a:?}"))))
            }
        }),
    ));
    checks.push(check(
        "normalization-preserves-indistinguishability",
        (|| {
            for len in 0..=depth {
                let mut pairs: HashMap<(ViewKeys, ViewKeys), ()> =
                    HashMap::new();
                let mut src_to_img: HashMap<ViewKeys, (ViewKeys, Vec<Letter>)> =
                    HashMap::new();
                let mut img_to_src: HashMap<ViewKeys, ViewKeys> =
                    HashMap::new();
                for w in all_words(g.moves.len(), len) {
                    let a = view_keys(g, &w)?;
                    let b = view_keys(&n.base, &n.image(&w)?)?;
                    let ca = n.base.coloring.trace(&n.image(&w)?)?;
                    if ca != g.coloring.trace(&w)? {
                        return Ok(Err(("folded coloring differs".into(), Some(words_str(g, &w)))));
                    }
                    if let Some((old, ow)) = src_to_img.get(&a) {
                        if *old != b {
                            return Ok(Err((
                                "source-equivalent histories have distinguishable images".into(),
                                Some(format!("{} / {}", words_str(g, ow), words_str(g, &w))),
                            )));
                        }
                    }
                    if let Some(old) = img_to_src.get(&b) {
                        if *old != a {
                            return Ok(Err(("image-equivalent histories are distinguishable".into(), Some(words_str(g, &w)))));
                        }
                    }
                    src_to_img.insert(a.clone(), (b.clone(), w));
                    img_to_src.insert(b.clone(), a.clone());
                    pairs.insert((a, b), ());
                }
            }
            Ok(Ok("all coalitions, all source histories".into()))
        })(),
    ));
    checks.push(check(
        "fip-2dfa-agreement",
        (|| {
            let r = fip_to_2dfa(g)?;
            for len in 0..=depth {
                if let Some((a, b)) = fip_2dfa_agree(g, &r, len)? {
                    return Ok(Err((format!("disagreement at length {len}"), Some(format!("({}, {})", words_str(g, &a), words_str(g, &b))))));
                }
            }
            Ok(Ok(format!("{} states", r.num_states())))
        })(),
    ));
    if let Some(s) = strategy {
        checks.push(check(
            "verify-strategy",
            verify_strategy(g, s, depth).map(|v| {
                if v.ok() {
                    Ok(format!("{} plays", v.plays))
                } else {
                    let w = v
                        .losing_play
                        .map(|p| format!("losing play {}", p.join(" ")))
                        .or(v.inconsistent.map(|(a, b)| format!("inconsistent on {} / {}", a.join(" "), b.join(" "))));
                    Err(("strategy fails".into(), w))
                }
            }),
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { depth, passed, checks })
}
