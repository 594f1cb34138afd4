//! The finite perfect-information game: Δ-reachable configurations grouped
//! by their player-0 knowledge.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automata::Alphabet;
use crate::error::{Error, Result};
use crate::knowledge::{Config, Elem, Knowledge, ValueId};
use crate::normalize::NormalizedFip;

pub const DEFAULT_MAX_NODES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeColor {
    /// The root, before any move.
    Start,
    Color(usize),
    /// Absorbing winning sink for infeasible profile moves.
    Win,
}

/// A game graph where the player picks an action and the environment
/// picks one of the successors labelled with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    pub actions: Alphabet,
    pub colors: Alphabet,
    pub initial: usize,
    pub node_colors: Vec<NodeColor>,
    /// Per node: (action, sorted successors), actions ascending, no empty lists.
    pub edges: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Arena {
    pub fn len(&self) -> usize {
        self.node_colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_colors.is_empty()
    }

    pub fn successors(&self, v: usize, a: usize) -> &[usize] {
        self.edges[v]
            .iter()
            .find(|(b, _)| *b == a)
            .map(|(_, s)| s.as_slice())
            .unwrap_or(&[])
    }

    pub fn color_name(&self, c: NodeColor) -> String {
        match c {
            NodeColor::Start => "start".into(),
            NodeColor::Win => crate::normalize::WIN_COLOR.into(),
            NodeColor::Color(c) => self.colors.name(c).into(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flat_map(|e| e.iter()).map(|(_, s)| s.len()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    /// Cap on interned knowledge values.
    pub max_values: usize,
    /// Add ⊤win edges for profile moves that are infeasible from a class
    /// member. Off by default: the environment never profits from them.
    pub infeasible_edges: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: DEFAULT_MAX_NODES, max_values: usize::MAX, infeasible_edges: false }
    }
}

/// An arena together with the knowledge data it was built from.
pub struct Built<'a> {
    pub arena: Arena,
    pub knowledge: Knowledge<'a>,
    /// p[{0}] per node (unused for the ⊤win node).
    pub keys: Vec<ValueId>,
    /// The configurations of each class: one per element of p[{0}].
    pub members: Vec<Vec<Config>>,
    pub win_node: Option<usize>,
    index: HashMap<ValueId, usize>,
}

impl<'a> Built<'a> {
    /// One witness configuration per node.
    pub fn provenance(&self, v: usize) -> Option<&Config> {
        self.members[v].first()
    }

    pub fn node_of(&self, p: &Config) -> Result<usize> {
        self.index.get(&p.player0()).copied().ok_or(Error::UnknownClass)
    }

    pub fn config_count(&self) -> usize {
        self.members.iter().map(|m| m.len()).sum()
    }
}

fn members_of(k: &mut Knowledge<'_>, key: ValueId) -> Vec<Config> {
    let n = 1usize << (k.game.num_players() - 1);
    let up = k.store.up(1).to_vec();
    k.store
        .elements(key)
        .into_iter()
        .map(|e| {
            let Elem::Tuple(t) = e else { unreachable!("player-0 knowledge holds tuples") };
            let mut vals = vec![0; n];
            vals[0] = key;
            for &kk in &up {
                vals[crate::knowledge::slot(kk)] = k.store.entry(t, kk);
            }
            Config(vals)
        })
        .collect()
}

fn class_color(k: &Knowledge<'_>, members: &[Config]) -> Result<NodeColor> {
    let mut color = None;
    for p in members {
        let c = match k.game.state_color[k.state_of(p) as usize] {
            None => NodeColor::Start,
            Some(c) if c == k.game.win_color => NodeColor::Win,
            Some(c) => NodeColor::Color(c),
        };
        match color {
            None => color = Some(c),
            Some(old) if old != c => {
                return Err(Error::ColorClashBug(format!("{old:?} vs {c:?}")));
            }
            _ => {}
        }
    }
    color.ok_or_else(|| Error::ColorClashBug("empty class".into()))
}

pub fn build(n: &NormalizedFip, limits: Limits) -> Result<Built<'_>> {
    let mut k = Knowledge::new(n);
    let p0 = k.initial_config()?;
    let mut keys = vec![p0.player0()];
    let mut members = vec![members_of(&mut k, p0.player0())];
    let mut colors = vec![class_color(&k, &members[0])?];
    let mut index = HashMap::from([(p0.player0(), 0usize)]);
    let mut edges: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let mut win_node: Option<usize> = None;
    let mut queue = VecDeque::from([0usize]);
    let stats = |k: &Knowledge<'_>, keys: &Vec<ValueId>, members: &Vec<Vec<Config>>| Error::LimitExceeded {
        nodes: keys.len(),
        configs: members.iter().map(|m| m.len()).sum(),
        values: k.store.value_count(),
    };

    while let Some(v) = queue.pop_front() {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in members[v].clone() {
            let q = k.state_of(&p);
            for d in 0..n.num_moves() {
                let target = if n.feasible(q, d) {
                    let next = k.delta(&p, d)?;
                    let key = next.player0();
                    match index.get(&key) {
                        Some(&t) => t,
                        None => {
                            let t = keys.len();
                            let m = members_of(&mut k, key);
                            colors.push(class_color(&k, &m)?);
                            keys.push(key);
                            members.push(m);
                            index.insert(key, t);
                            queue.push_back(t);
                            if keys.len() > limits.max_nodes || k.store.value_count() > limits.max_values {
                                return Err(stats(&k, &keys, &members));
                            }
                            t
                        }
                    }
                } else if limits.infeasible_edges {
                    *win_node.get_or_insert_with(|| {
                        keys.push(ValueId::MAX);
                        members.push(Vec::new());
                        colors.push(NodeColor::Win);
                        keys.len() - 1
                    })
                } else {
                    continue;
                };
                out.entry(n.act(d)).or_default().push(target);
            }
        }
        let row = out
            .into_iter()
            .map(|(a, mut ts)| {
                ts.sort_unstable();
                ts.dedup();
                (a, ts)
            })
            .collect();
        if edges.len() <= v {
            edges.resize(v + 1, Vec::new());
        }
        edges[v] = row;
    }
    edges.resize(keys.len(), Vec::new());
    if let Some(w) = win_node {
        let all: Vec<(usize, Vec<usize>)> = (0..n.base.actions.len()).map(|a| (a, vec![w])).collect();
        edges[w] = all;
    }
    let arena = Arena {
        actions: n.base.actions.clone(),
        colors: n.source.colors.clone(),
        initial: 0,
        node_colors: colors,
        edges,
    };
    Ok(Built { arena, knowledge: k, keys, members, win_node, index })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(a: &Arena) -> String {
    let mut s = String::from("digraph arena {\n  rankdir=LR;\n");
    for v in 0..a.len() {
        let shape = if v == a.initial { "doublecircle" } else { "circle" };
        let _ = writeln!(
            s,
            "  n{v} [label=\"{}\", shape={shape}];",
            dot_escape(&format!("{v}:{}", a.color_name(a.node_colors[v])))
        );
    }
    for (v, row) in a.edges.iter().enumerate() {
        for (act, ts) in row {
            for t in ts {
                let _ = writeln!(s, "  n{v} -> n{t} [label=\"{}\"];", dot_escape(a.actions.name(*act)));
            }
        }
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArenaNodeFile {
    pub id: usize,
    pub color: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArenaEdgeFile {
    pub from: usize,
    pub action: String,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArenaFile {
    pub schema_version: u32,
    pub initial: usize,
    pub actions: Vec<String>,
    pub nodes: Vec<ArenaNodeFile>,
    pub edges: Vec<ArenaEdgeFile>,
}

pub fn arena_to_file(a: &Arena) -> ArenaFile {
    ArenaFile {
        schema_version: crate::io::SCHEMA_VERSION,
        initial: a.initial,
        actions: a.actions.names().to_vec(),
        nodes: (0..a.len()).map(|v| ArenaNodeFile { id: v, color: a.color_name(a.node_colors[v]) }).collect(),
        edges: a
            .edges
            .iter()
            .enumerate()
            .flat_map(|(v, row)| {
                row.iter().flat_map(move |(act, ts)| {
                    ts.iter().map(move |&t| ArenaEdgeFile { from: v, action: a.actions.name(*act).into(), to: t })
                })
            })
            .collect(),
    }
}
