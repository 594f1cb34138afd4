//! Coalition-indexed knowledge sets and the one-move update Δ.
//!
//! A value of sort I (all players) is a set of states of the folded
//! machine. A value of sort J ⊊ I is a set of tuples indexed by ↑J, the
//! strict supersets of J, in ascending bitmask order. Values and tuples are
//! hash-consed, so two handles are equal iff the structures are.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automata::{Letter, StateId};
use crate::error::{Error, Result};
use crate::fip::{all_players, members, Coalition};
use crate::normalize::NormalizedFip;

pub type ValueId = u32;
pub type TupleId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Body {
    States(Box<[StateId]>),
    Tuples(Box<[TupleId]>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Value {
    sort: Coalition,
    body: Body,
}

/// One element of a knowledge set: a state at sort I, a tuple otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elem {
    State(StateId),
    Tuple(TupleId),
}

/// Interner for knowledge values plus the lift memo.
#[derive(Clone, Debug)]
pub struct Store {
    num_players: usize,
    full: Coalition,
    values: Vec<Value>,
    value_index: HashMap<Value, ValueId>,
    tuples: Vec<(Coalition, Box<[ValueId]>)>,
    tuple_index: HashMap<(Coalition, Box<[ValueId]>), TupleId>,
    ups: Vec<Vec<Coalition>>,
    lift_memo: HashMap<(Coalition, Coalition, ValueId), ValueId>,
}

/// Index of a coalition containing player 0.
#[inline]
pub fn slot(j: Coalition) -> usize {
    (j >> 1) as usize
}

impl Store {
    pub fn new(num_players: usize) -> Store {
        let full = all_players(num_players);
        let ups = (0..1usize << (num_players - 1))
            .map(|idx| {
                let j = ((idx as Coalition) << 1) | 1;
                (j + 1..=full).filter(|&k| k & j == j).collect()
            })
            .collect();
        Store {
            num_players,
            full,
            values: Vec::new(),
            value_index: HashMap::new(),
            tuples: Vec::new(),
            tuple_index: HashMap::new(),
            ups,
            lift_memo: HashMap::new(),
        }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn full(&self) -> Coalition {
        self.full
    }

    /// ↑J: the strict supersets of J, ascending.
    pub fn up(&self, j: Coalition) -> &[Coalition] {
        &self.ups[slot(j)]
    }

    pub fn value_count(&self) -> usize {
        self.values.len()
    }

    pub fn tuple_count(&self) -> usize {
        self.tuples.len()
    }

    fn intern(&mut self, v: Value) -> ValueId {
        if let Some(&id) = self.value_index.get(&v) {
            return id;
        }
        let id = self.values.len() as ValueId;
        self.values.push(v.clone());
        self.value_index.insert(v, id);
        id
    }

    /// A value of sort I.
    pub fn states(&mut self, qs: &[StateId]) -> ValueId {
        let mut qs = qs.to_vec();
        qs.sort_unstable();
        qs.dedup();
        let full = self.full;
        self.intern(Value { sort: full, body: Body::States(qs.into()) })
    }

    /// A tuple indexed by ↑J; `entries[i]` belongs to `up(j)[i]`.
    pub fn tuple(&mut self, j: Coalition, entries: &[ValueId]) -> Result<TupleId> {
        let up = self.up(j);
        if up.len() != entries.len() {
            return Err(Error::SortMismatch { expected: j, found: entries.len() as u32 });
        }
        for (&k, &e) in up.iter().zip(entries) {
            let found = self.values[e as usize].sort;
            if found != k {
                return Err(Error::SortMismatch { expected: k, found });
            }
        }
        let key = (j, Box::<[ValueId]>::from(entries));
        if let Some(&id) = self.tuple_index.get(&key) {
            return Ok(id);
        }
        let id = self.tuples.len() as TupleId;
        self.tuples.push(key.clone());
        self.tuple_index.insert(key, id);
        Ok(id)
    }

    /// A value of sort J ⊊ I from tuples of sort J.
    pub fn set(&mut self, j: Coalition, ts: &[TupleId]) -> Result<ValueId> {
        for &t in ts {
            let found = self.tuples[t as usize].0;
            if found != j {
                return Err(Error::SortMismatch { expected: j, found });
            }
        }
        let mut ts = ts.to_vec();
        ts.sort_unstable();
        ts.dedup();
        Ok(self.intern(Value { sort: j, body: Body::Tuples(ts.into()) }))
    }

    pub fn sort(&self, v: ValueId) -> Coalition {
        self.values[v as usize].sort
    }

    pub fn len(&self, v: ValueId) -> usize {
        match &self.values[v as usize].body {
            Body::States(s) => s.len(),
            Body::Tuples(t) => t.len(),
        }
    }

    pub fn elements(&self, v: ValueId) -> Vec<Elem> {
        match &self.values[v as usize].body {
            Body::States(s) => s.iter().map(|&q| Elem::State(q)).collect(),
            Body::Tuples(t) => t.iter().map(|&t| Elem::Tuple(t)).collect(),
        }
    }

    pub fn state_set(&self, v: ValueId) -> Option<&[StateId]> {
        match &self.values[v as usize].body {
            Body::States(s) => Some(s),
            Body::Tuples(_) => None,
        }
    }

    pub fn tuple_sort(&self, t: TupleId) -> Coalition {
        self.tuples[t as usize].0
    }

    pub fn entries(&self, t: TupleId) -> &[ValueId] {
        &self.tuples[t as usize].1
    }

    /// φ[K] for a tuple φ of sort J and K ∈ ↑J.
    pub fn entry(&self, t: TupleId, k: Coalition) -> ValueId {
        let (j, entries) = &self.tuples[t as usize];
        let pos = self.up(*j).binary_search(&k).expect("coalition is a strict superset");
        entries[pos]
    }

    pub fn contains_tuple(&self, v: ValueId, t: TupleId) -> bool {
        match &self.values[v as usize].body {
            Body::Tuples(ts) => ts.binary_search(&t).is_ok(),
            Body::States(_) => false,
        }
    }

    /// lift^S_J(ψ) for ψ of sort J∪S.
    pub fn lift(&mut self, s: Coalition, j: Coalition, psi: ValueId) -> Result<ValueId> {
        let js = j | s;
        let found = self.sort(psi);
        if found != js {
            return Err(Error::SortMismatch { expected: js, found });
        }
        if js == j {
            return Ok(psi);
        }
        if let Some(&v) = self.lift_memo.get(&(s, j, psi)) {
            return Ok(v);
        }
        let mut out = Vec::new();
        if js == self.full {
            // ∇ ignores the state, so every element gives the same tuple
            if self.len(psi) > 0 {
                out.push(self.nabla(s, j, Elem::State(0), psi)?);
            }
        } else {
            for e in self.elements(psi) {
                out.push(self.nabla(s, j, e, psi)?);
            }
        }
        let v = self.set(j, &out)?;
        self.lift_memo.insert((s, j, psi), v);
        Ok(v)
    }

    /// ∇^S_J(φ, ψ): the ↑J-tuple describing what J knows when φ is the
    /// actual element of the merged knowledge ψ.
    pub fn nabla(&mut self, s: Coalition, j: Coalition, phi: Elem, psi: ValueId) -> Result<TupleId> {
        let js = j | s;
        let up = self.up(j).to_vec();
        let mut entries = Vec::with_capacity(up.len());
        for k in up {
            let v = if k | s == js {
                self.lift(s, k, psi)?
            } else {
                match phi {
                    Elem::Tuple(t) => {
                        let inner = self.entry(t, k | s);
                        self.lift(s, k, inner)?
                    }
                    Elem::State(_) => return Err(Error::SortMismatch { expected: js, found: self.full }),
                }
            };
            entries.push(v);
        }
        self.tuple(j, &entries)
    }

    /// Renders a value as nested boxes.
    pub fn render(&self, v: ValueId, state_name: &dyn Fn(StateId) -> String) -> String {
        let mut s = String::new();
        self.render_into(v, state_name, 0, &mut s);
        s
    }

    fn render_into(&self, v: ValueId, state_name: &dyn Fn(StateId) -> String, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match &self.values[v as usize].body {
            Body::States(qs) => {
                let names: Vec<String> = qs.iter().map(|&q| state_name(q)).collect();
                let _ = write!(out, "{{{}}}", names.join(", "));
            }
            Body::Tuples(ts) => {
                out.push_str("{\n");
                for &t in ts.iter() {
                    let _ = writeln!(out, "{pad}  (");
                    let (j, entries) = &self.tuples[t as usize];
                    for (k, &e) in self.up(*j).iter().zip(entries.iter()) {
                        let _ = write!(out, "{pad}    {}: ", coalition_label(*k));
                        self.render_into(e, state_name, depth + 2, out);
                        out.push('\n');
                    }
                    let _ = writeln!(out, "{pad}  )");
                }
                let _ = write!(out, "{pad}}}");
            }
        }
    }
}

/// Players of a coalition written as digits, e.g. `012`.
pub fn coalition_label(j: Coalition) -> String {
    members(j).map(|i| i.to_string()).collect::<Vec<_>>().join(if j >> 10 != 0 { "," } else { "" })
}

/// h(τ): one value per coalition containing player 0, indexed by `slot`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config(pub Vec<ValueId>);

impl Config {
    pub fn get(&self, j: Coalition) -> ValueId {
        self.0[slot(j)]
    }

    /// The player-0 entry, which identifies the arena node.
    pub fn player0(&self) -> ValueId {
        self.0[0]
    }
}

/// Δ evaluation for one normalized game.
pub struct Knowledge<'a> {
    pub game: &'a NormalizedFip,
    pub store: Store,
    step_memo: HashMap<(Letter, Coalition, ValueId), ValueId>,
    matching: HashMap<(Coalition, Letter), Vec<Letter>>,
    sync: Vec<Vec<Coalition>>,
}

impl<'a> Knowledge<'a> {
    pub fn new(game: &'a NormalizedFip) -> Knowledge<'a> {
        let store = Store::new(game.num_players());
        let sync = (0..game.num_moves())
            .map(|d| {
                (0..1u32 << (game.num_players() - 1))
                    .map(|idx| game.sync((idx << 1) | 1, d))
                    .collect()
            })
            .collect();
        Knowledge { game, store, step_memo: HashMap::new(), matching: HashMap::new(), sync }
    }

    pub fn full(&self) -> Coalition {
        self.store.full()
    }

    /// Coalitions containing player 0 in descending bitmask order, so every
    /// strict superset comes before its subsets.
    pub fn coalitions_desc(&self) -> Vec<Coalition> {
        (0..1u32 << (self.game.num_players() - 1)).rev().map(|idx| (idx << 1) | 1).collect()
    }

    #[inline]
    pub fn sync(&self, j: Coalition, d: Letter) -> Coalition {
        self.sync[d][slot(j)]
    }

    /// The single folded state recorded in h[I].
    pub fn state_of(&self, p: &Config) -> StateId {
        self.store.state_set(p.get(self.full())).expect("sort I holds states")[0]
    }

    /// The tuple (p[K])_{K∈↑J}.
    pub fn actual_tuple(&mut self, p: &Config, j: Coalition) -> Result<TupleId> {
        let entries: Vec<ValueId> = self.store.up(j).iter().map(|&k| p.get(k)).collect();
        self.store.tuple(j, &entries)
    }

    /// Builds a config from h[I] downwards when every J-entry is the
    /// singleton of the actual tuple.
    fn singleton_config(&mut self, q: StateId) -> Result<Config> {
        let mut vals = vec![0; 1 << (self.game.num_players() - 1)];
        let full = self.full();
        vals[slot(full)] = self.store.states(&[q]);
        let p_partial = |vals: &Vec<ValueId>| Config(vals.clone());
        for j in self.coalitions_desc().into_iter().skip(1) {
            let t = self.actual_tuple(&p_partial(&vals), j)?;
            vals[slot(j)] = self.store.set(j, &[t])?;
        }
        Ok(Config(vals))
    }

    pub fn initial_config(&mut self) -> Result<Config> {
        let q = self.game.initial_state();
        self.singleton_config(q)
    }

    /// The actual world is among the possibilities of every coalition.
    pub fn is_consistent(&mut self, p: &Config) -> Result<bool> {
        if self.store.len(p.get(self.full())) != 1 {
            return Ok(false);
        }
        for j in self.coalitions_desc().into_iter().skip(1) {
            let t = self.actual_tuple(p, j)?;
            if !self.store.contains_tuple(p.get(j), t) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn matching(&mut self, s: Coalition, c: Letter) -> Vec<Letter> {
        let game = self.game;
        self.matching
            .entry((s, c))
            .or_insert_with(|| {
                (0..game.num_moves())
                    .filter(|&d| members(s).all(|i| game.profiles[d][i] == game.profiles[c][i]))
                    .collect()
            })
            .clone()
    }

    /// The set lifted in δ^c_J for every J with sync_J(c) = S, given ψ = p[S].
    fn step(&mut self, s: Coalition, c: Letter, psi: ValueId) -> Result<ValueId> {
        if let Some(&v) = self.step_memo.get(&(c, s, psi)) {
            return Ok(v);
        }
        let found = self.store.sort(psi);
        if found != s {
            return Err(Error::SortMismatch { expected: s, found });
        }
        let v = if s == self.full() {
            let qs: Vec<StateId> = self
                .store
                .state_set(psi)
                .unwrap()
                .iter()
                .filter(|&&q| self.game.feasible(q, c))
                .map(|&q| self.game.step(q, c))
                .collect();
            self.store.states(&qs)
        } else {
            let full = self.full();
            let up = self.store.up(s).to_vec();
            let mut out = Vec::new();
            for e in self.store.elements(psi) {
                let Elem::Tuple(phi) = e else { unreachable!("sort below I holds tuples") };
                let here = self.store.state_set(self.store.entry(phi, full)).unwrap().to_vec();
                for d in self.matching(s, c) {
                    if !here.iter().any(|&q| self.game.feasible(q, d)) {
                        continue;
                    }
                    let mut entries = Vec::with_capacity(up.len());
                    for &k in &up {
                        let sk = self.sync(k, d);
                        let inner = self.store.entry(phi, sk);
                        let stepped = self.step(sk, d, inner)?;
                        entries.push(self.store.lift(sk, k, stepped)?);
                    }
                    out.push(self.store.tuple(s, &entries)?);
                }
            }
            self.store.set(s, &out)?
        };
        self.step_memo.insert((c, s, psi), v);
        Ok(v)
    }

    /// Δ(p, c).
    pub fn delta(&mut self, p: &Config, c: Letter) -> Result<Config> {
        if c >= self.game.num_moves() {
            return Err(Error::UnknownLetter(c.to_string()));
        }
        if !self.game.feasible(self.state_of(p), c) {
            return Err(Error::InfeasibleMove);
        }
        let mut vals = vec![0; p.0.len()];
        for j in self.coalitions_desc() {
            let s = self.sync(j, c);
            let stepped = self.step(s, c, p.get(s))?;
            vals[slot(j)] = self.store.lift(s, j, stepped)?;
        }
        Ok(Config(vals))
    }

    /// Iterates Δ along a profile word.
    pub fn run(&mut self, word: &[Letter]) -> Result<Config> {
        let mut p = self.initial_config()?;
        for &c in word {
            p = self.delta(&p, c)?;
        }
        Ok(p)
    }

    /// Nested-box rendering of one coalition entry.
    pub fn render(&self, v: ValueId) -> String {
        let names = &self.game.base.coloring.base.state_names;
        self.store.render(v, &|q| names[q as usize].clone())
    }
}
