//! Semi-automata, Mealy transducers and DFAs over interned alphabets.
//!
//! States and letters are dense indices. Names only matter at the file
//! boundary, so every structure keeps a symbol table next to its tables.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

pub type StateId = u32;
pub type Letter = usize;

/// Interned symbol table: external names to dense indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut a = Alphabet::default();
        for n in names {
            a.intern(n.into());
        }
        a
    }

    /// Returns the index of `name`, adding it if absent.
    pub fn intern(&mut self, name: String) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.clone(), i);
        self.names.push(name);
        i
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<usize> {
        self.get(name).ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Translates a sequence of names into letters.
    pub fn word<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Letter>> {
        names.iter().map(|n| self.lookup(n.as_ref())).collect()
    }

    /// Reads a word of single-character letter names, e.g. `"abc"`.
    pub fn chars(&self, s: &str) -> Result<Vec<Letter>> {
        s.chars().map(|c| self.lookup(&c.to_string())).collect()
    }

    pub fn render(&self, word: &[Letter]) -> Vec<String> {
        word.iter().map(|&l| self.names[l].clone()).collect()
    }
}

/// A deterministic, total semi-automaton ⟨Q, Γ, q_ε, δ⟩.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiAutomaton {
    pub alphabet: Alphabet,
    pub state_names: Vec<String>,
    pub initial: StateId,
    /// Row-major transition table indexed by `state * |Γ| + letter`.
    delta: Vec<StateId>,
}

impl SemiAutomaton {
    /// Builds from a complete table; `delta[q][a]` is the successor.
    pub fn new(
        alphabet: Alphabet,
        state_names: Vec<String>,
        initial: StateId,
        delta: Vec<Vec<StateId>>,
    ) -> Result<Self> {
        let n = state_names.len();
        if delta.len() != n || (initial as usize) >= n {
            return Err(Error::Schema("transition table does not match the state list".into()));
        }
        let mut flat = Vec::with_capacity(n * alphabet.len());
        for row in &delta {
            if row.len() != alphabet.len() {
                return Err(Error::Schema("transition row is not total".into()));
            }
            for &t in row {
                if (t as usize) >= n {
                    return Err(Error::Schema(format!("transition to unknown state {t}")));
                }
                flat.push(t);
            }
        }
        Ok(SemiAutomaton { alphabet, state_names, initial, delta: flat })
    }

    /// Builds from a successor function over dense states `0..n`.
    pub fn from_fn(
        alphabet: Alphabet,
        n: usize,
        initial: StateId,
        f: impl Fn(StateId, Letter) -> StateId,
    ) -> Self {
        let k = alphabet.len();
        let mut delta = Vec::with_capacity(n * k);
        for q in 0..n as StateId {
            for a in 0..k {
                delta.push(f(q, a));
            }
        }
        let state_names = (0..n).map(|i| format!("s{i}")).collect();
        SemiAutomaton { alphabet, state_names, initial, delta }
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.len()
    }

    #[inline]
    pub fn step(&self, q: StateId, a: Letter) -> StateId {
        self.delta[q as usize * self.alphabet.len() + a]
    }

    fn check(&self, word: &[Letter]) -> Result<()> {
        match word.iter().find(|&&a| a >= self.num_letters()) {
            Some(a) => Err(Error::UnknownLetter(a.to_string())),
            None => Ok(()),
        }
    }

    pub fn run_from(&self, q: StateId, word: &[Letter]) -> Result<StateId> {
        self.check(word)?;
        Ok(word.iter().fold(q, |q, &a| self.step(q, a)))
    }

    /// δ(q_ε, word).
    pub fn run(&self, word: &[Letter]) -> Result<StateId> {
        self.run_from(self.initial, word)
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial as usize] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            i += 1;
            for a in 0..self.num_letters() {
                let t = self.step(q, a);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    order.push(t);
                }
            }
        }
        order
    }
}

/// Synchronous product of two semi-automata over the same alphabet.
pub struct Product {
    pub automaton: SemiAutomaton,
    /// Component states of every product state.
    pub pairs: Vec<(StateId, StateId)>,
}

/// Only the reachable part of the product is built.
pub fn product(s1: &SemiAutomaton, s2: &SemiAutomaton) -> Result<Product> {
    if s1.alphabet != s2.alphabet {
        return Err(Error::AlphabetMismatch("product operands differ".into()));
    }
    let k = s1.num_letters();
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = vec![(s1.initial, s2.initial)];
    index.insert(pairs[0], 0);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (p, q) = pairs[i];
        i += 1;
        let mut row = Vec::with_capacity(k);
        for a in 0..k {
            let t = (s1.step(p, a), s2.step(q, a));
            let id = *index.entry(t).or_insert_with(|| {
                pairs.push(t);
                (pairs.len() - 1) as StateId
            });
            row.push(id);
        }
        delta.push(row);
    }
    let names = pairs
        .iter()
        .map(|&(p, q)| format!("({},{})", s1.state_names[p as usize], s2.state_names[q as usize]))
        .collect();
    let automaton = SemiAutomaton::new(s1.alphabet.clone(), names, 0, delta)?;
    Ok(Product { automaton, pairs })
}

/// A Mealy machine: semi-automaton plus a total output map λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine {
    pub base: SemiAutomaton,
    pub outputs: Alphabet,
    lambda: Vec<usize>,
}

impl MealyMachine {
    pub fn new(base: SemiAutomaton, outputs: Alphabet, lambda: Vec<Vec<usize>>) -> Result<Self> {
        if lambda.len() != base.num_states() {
            return Err(Error::Schema("output table does not match the state list".into()));
        }
        let mut flat = Vec::with_capacity(base.num_states() * base.num_letters());
        for row in &lambda {
            if row.len() != base.num_letters() {
                return Err(Error::Schema("output row is not total".into()));
            }
            for &o in row {
                if o >= outputs.len() {
                    return Err(Error::Schema(format!("unknown output {o}")));
                }
                flat.push(o);
            }
        }
        Ok(MealyMachine { base, outputs, lambda: flat })
    }

    pub fn from_fn(
        base: SemiAutomaton,
        outputs: Alphabet,
        f: impl Fn(StateId, Letter) -> usize,
    ) -> Self {
        let mut lambda = Vec::new();
        for q in 0..base.num_states() as StateId {
            for a in 0..base.num_letters() {
                lambda.push(f(q, a));
            }
        }
        MealyMachine { base, outputs, lambda }
    }

    /// Single-state machine applying `f` letterwise.
    pub fn memoryless(inputs: Alphabet, outputs: Alphabet, f: impl Fn(Letter) -> usize) -> Self {
        let base = SemiAutomaton::from_fn(inputs, 1, 0, |_, _| 0);
        Self::from_fn(base, outputs, |_, a| f(a))
    }

    #[inline]
    pub fn output(&self, q: StateId, a: Letter) -> usize {
        self.lambda[q as usize * self.base.num_letters() + a]
    }

    #[inline]
    pub fn step(&self, q: StateId, a: Letter) -> StateId {
        self.base.step(q, a)
    }

    pub fn initial(&self) -> StateId {
        self.base.initial
    }

    pub fn num_states(&self) -> usize {
        self.base.num_states()
    }

    /// λ̂: one output per input letter.
    pub fn trace(&self, word: &[Letter]) -> Result<Vec<usize>> {
        self.base.check(word)?;
        let mut q = self.base.initial;
        let mut out = Vec::with_capacity(word.len());
        for &a in word {
            out.push(self.output(q, a));
            q = self.step(q, a);
        }
        Ok(out)
    }
}

pub fn run(semi: &SemiAutomaton, word: &[Letter]) -> Result<StateId> {
    semi.run(word)
}

pub fn mealy_trace(m: &MealyMachine, word: &[Letter]) -> Result<Vec<usize>> {
    m.trace(word)
}

/// Semi-automaton plus accepting set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub base: SemiAutomaton,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn new(base: SemiAutomaton, accepting: Vec<bool>) -> Result<Self> {
        if accepting.len() != base.num_states() {
            return Err(Error::Schema("accepting set does not match the state list".into()));
        }
        Ok(Dfa { base, accepting })
    }

    pub fn accepts(&self, word: &[Letter]) -> Result<bool> {
        Ok(self.accepting[self.base.run(word)? as usize])
    }

    pub fn num_states(&self) -> usize {
        self.base.num_states()
    }

    /// States from which some accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n as StateId {
            for a in 0..self.base.num_letters() {
                rev[self.base.step(q, a) as usize].push(q);
            }
        }
        let mut good = self.accepting.clone();
        let mut stack: Vec<StateId> = (0..n as StateId).filter(|&q| good[q as usize]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q as usize] {
                if !good[p as usize] {
                    good[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        good
    }

    /// Restricts to the reachable states, renumbered in BFS order.
    pub fn trim(&self) -> Dfa {
        let order = self.base.reachable();
        let mut map = vec![u32::MAX; self.num_states()];
        for (i, &q) in order.iter().enumerate() {
            map[q as usize] = i as StateId;
        }
        let delta = order
            .iter()
            .map(|&q| {
                (0..self.base.num_letters())
                    .map(|a| map[self.base.step(q, a) as usize])
                    .collect()
            })
            .collect();
        let names = order.iter().map(|&q| self.base.state_names[q as usize].clone()).collect();
        let base = SemiAutomaton::new(self.base.alphabet.clone(), names, 0, delta)
            .expect("trimmed table stays total");
        let accepting = order.iter().map(|&q| self.accepting[q as usize]).collect();
        Dfa { base, accepting }
    }
}

pub fn dfa_accepts(d: &Dfa, word: &[Letter]) -> Result<bool> {
    d.accepts(word)
}

/// Outcome of a language comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equal,
    /// A shortest word on which the two automata disagree.
    Differ(Vec<Letter>),
}

impl Equivalence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal)
    }
}

/// BFS over the pair product; the first disagreeing pair gives a shortest
/// witness, ties broken by letter order.
pub fn dfa_equivalent(d1: &Dfa, d2: &Dfa) -> Result<Equivalence> {
    if d1.base.alphabet != d2.base.alphabet {
        return Err(Error::AlphabetMismatch("equivalence operands differ".into()));
    }
    let k = d1.base.num_letters();
    let start = (d1.base.initial, d2.base.initial);
    type Pair = (StateId, StateId);
    let mut parent: HashMap<Pair, Option<(Pair, Letter)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(pq) = queue.pop_front() {
        if d1.accepting[pq.0 as usize] != d2.accepting[pq.1 as usize] {
            let mut word = Vec::new();
            let mut cur = pq;
            while let Some(Some((prev, a))) = parent.get(&cur) {
                word.push(*a);
                cur = *prev;
            }
            word.reverse();
            return Ok(Equivalence::Differ(word));
        }
        for a in 0..k {
            let t = (d1.base.step(pq.0, a), d2.base.step(pq.1, a));
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(t) {
                e.insert(Some((pq, a)));
                queue.push_back(t);
            }
        }
    }
    Ok(Equivalence::Equal)
}

/// Moore partition refinement on the reachable part.
pub fn dfa_minimize(d: &Dfa) -> Dfa {
    let t = d.trim();
    let n = t.num_states();
    let k = t.base.num_letters();
    let mut class: Vec<usize> = t.accepting.iter().map(|&b| b as usize).collect();
    let mut count = refine_count(&class);
    loop {
        let mut sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for q in 0..n {
            let key = (
                class[q],
                (0..k).map(|a| class[t.base.step(q as StateId, a) as usize]).collect::<Vec<_>>(),
            );
            let len = sig.len();
            next[q] = *sig.entry(key).or_insert(len);
        }
        let c = sig.len();
        class = next;
        if c == count {
            break;
        }
        count = c;
    }
    // Renumber classes in BFS order of their first member so the result is canonical.
    let mut rep: Vec<Option<usize>> = vec![None; n];
    let mut order = Vec::new();
    for q in 0..n {
        if rep[class[q]].is_none() {
            rep[class[q]] = Some(q);
            order.push(class[q]);
        }
    }
    let mut new_id = vec![0 as StateId; n];
    for (i, &c) in order.iter().enumerate() {
        new_id[c] = i as StateId;
    }
    let delta = order
        .iter()
        .map(|&c| {
            let q = rep[c].unwrap();
            (0..k).map(|a| new_id[class[t.base.step(q as StateId, a) as usize]]).collect()
        })
        .collect();
    let names = order.iter().map(|&c| t.base.state_names[rep[c].unwrap()].clone()).collect();
    let accepting = order.iter().map(|&c| t.accepting[rep[c].unwrap()]).collect();
    let base = SemiAutomaton::new(t.base.alphabet.clone(), names, new_id[class[0]], delta)
        .expect("quotient table stays total");
    Dfa { base, accepting }
}

fn refine_count(class: &[usize]) -> usize {
    let mut seen = class.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toggle(n: usize) -> SemiAutomaton {
        SemiAutomaton::from_fn(Alphabet::new(["x"]), n, 0, move |q, _| (q + 1) % n as StateId)
    }

    #[test]
    fn run_toggle() {
        let t = toggle(2);
        assert_eq!(t.run(&[]).unwrap(), 0);
        assert_eq!(t.run(&[0, 0, 0]).unwrap(), 1);
        assert!(t.run(&[3]).is_err());
    }

    #[test]
    fn product_of_cycles_is_lcm() {
        let p = product(&toggle(2), &toggle(3)).unwrap();
        assert_eq!(p.automaton.num_states(), 6);
        let unit = product(&toggle(3), &toggle(1)).unwrap();
        assert_eq!(unit.automaton.num_states(), 3);
    }

    #[test]
    fn parity_transducer() {
        let ab = Alphabet::new(["a", "b"]);
        let base = SemiAutomaton::from_fn(ab.clone(), 2, 0, |q, a| if a == 0 { 1 - q } else { q });
        // output is the parity after reading the letter
        let m = MealyMachine::from_fn(base, Alphabet::new(["0", "1"]), |q, a| {
            if a == 0 {
                1 - q as usize
            } else {
                q as usize
            }
        });
        let out = m.trace(&ab.chars("aba").unwrap()).unwrap();
        assert_eq!(m.outputs.render(&out).concat(), "110");
        assert!(m.trace(&[]).unwrap().is_empty());
    }

    #[test]
    fn equivalence_witness_empty_word() {
        let one = SemiAutomaton::from_fn(Alphabet::new(["x"]), 1, 0, |_, _| 0);
        let all = Dfa::new(one.clone(), vec![true]).unwrap();
        let none = Dfa::new(one, vec![false]).unwrap();
        assert_eq!(dfa_equivalent(&all, &none).unwrap(), Equivalence::Differ(vec![]));
        assert!(dfa_equivalent(&all, &all).unwrap().is_equal());
    }

    #[test]
    fn minimize_drops_duplicate() {
        // accepts words with an even number of x, states 1 and 2 are copies
        let s = SemiAutomaton::from_fn(Alphabet::new(["x"]), 3, 0, |q, _| match q {
            0 => 1,
            1 => 2,
            _ => 1,
        });
        let d = Dfa::new(s, vec![true, false, true]).unwrap();
        // 0 and 2 are equivalent, so three states become two
        let m = dfa_minimize(&d);
        assert_eq!(m.num_states(), 2);
        assert!(dfa_equivalent(&d, &m).unwrap().is_equal());
        assert_eq!(dfa_minimize(&m).num_states(), 2);
    }
}
