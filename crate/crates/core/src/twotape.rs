//! Synchronous relations recognised by DFAs over pairs of moves.
//!
//! The pair (x, y) has letter index `x * |Γ| + y` and the name `"x|y"`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::automata::{dfa_equivalent, Alphabet, Dfa, Equivalence, Letter, SemiAutomaton, StateId};
use crate::error::{Error, Result};
use crate::fip::FipGame;
use crate::io::{dfa_from_file, MachineFile, TwoTapeFile, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoTapeDfa {
    pub moves: Alphabet,
    pub dfa: Dfa,
    /// Action of every move, for the visibility check.
    pub act: Option<(Alphabet, Vec<usize>)>,
}

pub fn pair_alphabet(moves: &Alphabet) -> Alphabet {
    let n = moves.names();
    Alphabet::new(n.iter().flat_map(|x| n.iter().map(move |y| format!("{x}|{y}"))))
}

/// A pair of equal-length words.
pub type WordPair = (Vec<Letter>, Vec<Letter>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnosis {
    Valid,
    /// (τ, τ) is rejected.
    NotReflexive(Vec<Letter>),
    /// The first pair is accepted, its swap is not.
    NotSymmetric(WordPair),
    /// (u, v) and (v, w) accepted, (u, w) rejected.
    NotTransitive { u: Vec<Letter>, v: Vec<Letter>, w: Vec<Letter> },
    /// The pair is accepted but the pair of its strict prefixes of length `prefix` is not.
    NotPrefixClosed { pair: WordPair, prefix: usize },
    /// An accepted pair whose last moves carry different actions.
    NotVisible(WordPair),
}

impl Diagnosis {
    pub fn is_valid(&self) -> bool {
        matches!(self, Diagnosis::Valid)
    }

    pub fn axiom(&self) -> &'static str {
        match self {
            Diagnosis::Valid => "valid",
            Diagnosis::NotReflexive(_) => "reflexivity",
            Diagnosis::NotSymmetric(_) => "symmetry",
            Diagnosis::NotTransitive { .. } => "transitivity",
            Diagnosis::NotPrefixClosed { .. } => "prefix-closure",
            Diagnosis::NotVisible(_) => "visibility",
        }
    }

    /// Length of the witness histories (0 when valid).
    pub fn witness_len(&self) -> usize {
        match self {
            Diagnosis::Valid => 0,
            Diagnosis::NotReflexive(w) => w.len(),
            Diagnosis::NotSymmetric((a, _)) | Diagnosis::NotVisible((a, _)) => a.len(),
            Diagnosis::NotTransitive { u, .. } => u.len(),
            Diagnosis::NotPrefixClosed { pair, .. } => pair.0.len(),
        }
    }

    pub fn render(&self, moves: &Alphabet) -> String {
        let w = |t: &[Letter]| {
            if t.is_empty() {
                "ε".to_string()
            } else {
                moves.render(t).concat()
            }
        };
        match self {
            Diagnosis::Valid => "valid indistinguishability relation".into(),
            Diagnosis::NotReflexive(t) => format!("reflexivity fails: ({}, {}) is rejected", w(t), w(t)),
            Diagnosis::NotSymmetric((a, b)) => {
                format!("symmetry fails: ({}, {}) is accepted but ({}, {}) is not", w(a), w(b), w(b), w(a))
            }
            Diagnosis::NotTransitive { u, v, w: x } => format!(
                "transitivity fails: ({0}, {1}) and ({1}, {2}) are accepted but ({0}, {2}) is not",
                w(u),
                w(v),
                w(x)
            ),
            Diagnosis::NotPrefixClosed { pair: (a, b), prefix } => format!(
                "prefix-closure fails: ({}, {}) is accepted but ({}, {}) is not",
                w(a),
                w(b),
                w(&a[..*prefix]),
                w(&b[..*prefix])
            ),
            Diagnosis::NotVisible((a, b)) => {
                format!("visibility fails: ({}, {}) is accepted but the last actions differ", w(a), w(b))
            }
        }
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.axiom())
    }
}

impl TwoTapeDfa {
    pub fn new(moves: Alphabet, dfa: Dfa) -> Result<TwoTapeDfa> {
        if dfa.base.alphabet != pair_alphabet(&moves) {
            return Err(Error::AlphabetMismatch("two-tape DFA must read exactly Γ × Γ".into()));
        }
        Ok(TwoTapeDfa { moves, dfa, act: None })
    }

    pub fn with_act(mut self, actions: Alphabet, act: Vec<usize>) -> TwoTapeDfa {
        self.act = Some((actions, act));
        self
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.moves.len()
    }

    #[inline]
    pub fn pair(&self, x: Letter, y: Letter) -> Letter {
        x * self.k() + y
    }

    #[inline]
    pub fn unpair(&self, l: Letter) -> (Letter, Letter) {
        (l / self.k(), l % self.k())
    }

    pub fn zip(&self, t1: &[Letter], t2: &[Letter]) -> Result<Vec<Letter>> {
        let k = self.k();
        t1.iter()
            .zip(t2)
            .map(|(&x, &y)| {
                if x >= k || y >= k {
                    Err(Error::UnknownLetter(x.max(y).to_string()))
                } else {
                    Ok(self.pair(x, y))
                }
            })
            .collect()
    }

    pub fn unzip(&self, w: &[Letter]) -> WordPair {
        w.iter().map(|&l| self.unpair(l)).unzip()
    }

    pub fn num_states(&self) -> usize {
        self.dfa.num_states()
    }

    pub fn from_file(f: &TwoTapeFile) -> Result<TwoTapeDfa> {
        if f.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schema_version {}", f.schema_version)));
        }
        let moves = Alphabet::new(f.moves.iter().cloned());
        let mf = MachineFile {
            states: f.states.clone(),
            alphabet: Some(pair_alphabet(&moves).names().to_vec()),
            initial: f.initial.clone(),
            delta: f.delta.clone(),
            outputs: None,
            lambda: None,
            accepting: Some(f.accepting.clone()),
            sink: f.sink.clone(),
        };
        let mut r = TwoTapeDfa::new(moves.clone(), dfa_from_file(&mf)?)?;
        if let Some(act) = &f.act {
            let mut actions = Alphabet::default();
            let mut table = Vec::with_capacity(moves.len());
            for m in moves.names() {
                let a = act.get(m).ok_or_else(|| Error::Schema(format!("act missing for move {m:?}")))?;
                table.push(actions.intern(a.clone()));
            }
            r = r.with_act(actions, table);
        }
        Ok(r)
    }

    pub fn to_file(&self) -> TwoTapeFile {
        let names = &self.dfa.base.state_names;
        let letters = self.dfa.base.alphabet.names();
        let mut delta = BTreeMap::new();
        for q in 0..self.num_states() {
            for (l, name) in letters.iter().enumerate() {
                delta.insert(format!("{},{}", names[q], name), names[self.dfa.base.step(q as StateId, l) as usize].clone());
            }
        }
        TwoTapeFile {
            schema_version: SCHEMA_VERSION,
            moves: self.moves.names().to_vec(),
            states: names.clone(),
            initial: names[self.dfa.base.initial as usize].clone(),
            accepting: (0..self.num_states()).filter(|&q| self.dfa.accepting[q]).map(|q| names[q].clone()).collect(),
            delta,
            sink: None,
            act: self.act.as_ref().map(|(actions, act)| {
                self.moves.names().iter().zip(act).map(|(m, &a)| (m.clone(), actions.name(a).to_string())).collect()
            }),
        }
    }
}

/// Acceptance of the zipped pair; different lengths are never related.
pub fn relation_accepts(r: &TwoTapeDfa, t1: &[Letter], t2: &[Letter]) -> Result<bool> {
    if t1.len() != t2.len() {
        return Ok(false);
    }
    r.dfa.accepts(&r.zip(t1, t2)?)
}

/// The relation with its tapes exchanged.
pub fn swap(r: &TwoTapeDfa) -> TwoTapeDfa {
    let base = &r.dfa.base;
    let semi = SemiAutomaton::from_fn(base.alphabet.clone(), base.num_states(), base.initial, |q, l| {
        let (x, y) = r.unpair(l);
        base.step(q, r.pair(y, x))
    });
    let mut semi = semi;
    semi.state_names = base.state_names.clone();
    TwoTapeDfa { moves: r.moves.clone(), dfa: Dfa::new(semi, r.dfa.accepting.clone()).expect("same shape"), act: r.act.clone() }
}

/// The relation restricted to words whose every letter pair satisfies
/// `keep`; other letters lead to a fresh rejecting state.
pub fn restrict(r: &TwoTapeDfa, keep: impl Fn(Letter, Letter) -> bool) -> TwoTapeDfa {
    let base = &r.dfa.base;
    let dead = base.num_states() as StateId;
    let mut semi = SemiAutomaton::from_fn(base.alphabet.clone(), base.num_states() + 1, base.initial, |q, l| {
        let (x, y) = r.unpair(l);
        if q == dead || !keep(x, y) {
            dead
        } else {
            base.step(q, l)
        }
    });
    semi.state_names = base.state_names.clone();
    semi.state_names.push("restricted".into());
    let mut accepting = r.dfa.accepting.clone();
    accepting.push(false);
    TwoTapeDfa { moves: r.moves.clone(), dfa: Dfa::new(semi, accepting).expect("same shape"), act: r.act.clone() }
}

/// Language equivalence with a shortest distinguishing pair.
pub fn relation_equivalent(r1: &TwoTapeDfa, r2: &TwoTapeDfa) -> Result<Option<WordPair>> {
    if r1.moves != r2.moves {
        return Err(Error::AlphabetMismatch("the relations range over different moves".into()));
    }
    Ok(match dfa_equivalent(&r1.dfa, &r2.dfa)? {
        Equivalence::Equal => None,
        Equivalence::Differ(w) => Some(r1.unzip(&w)),
    })
}

/// Breadth-first search from `starts`; returns the first goal node with the
/// letter path leading to it.
fn bfs<N: Clone + Eq + std::hash::Hash>(
    start: N,
    letters: usize,
    mut next: impl FnMut(&N, Letter) -> Option<N>,
    mut goal: impl FnMut(&N) -> bool,
) -> Option<(N, Vec<Letter>)> {
    let mut parent: HashMap<N, Option<(N, Letter)>> = HashMap::from([(start.clone(), None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        if goal(&n) {
            let mut path = Vec::new();
            let mut cur = n.clone();
            while let Some((p, l)) = parent[&cur].clone() {
                path.push(l);
                cur = p;
            }
            path.reverse();
            return Some((n, path));
        }
        for l in 0..letters {
            if let Some(m) = next(&n, l) {
                if !parent.contains_key(&m) {
                    parent.insert(m.clone(), Some((n.clone(), l)));
                    queue.push_back(m);
                }
            }
        }
    }
    None
}

/// Shortest word from q to an accepting state.
fn to_accepting(d: &Dfa, q: StateId) -> Option<Vec<Letter>> {
    bfs(q, d.base.num_letters(), |&p, l| Some(d.base.step(p, l)), |&p| d.accepting[p as usize]).map(|(_, w)| w)
}

/// Checks the axioms of an indistinguishability relation in the order
/// reflexivity, symmetry, transitivity, prefix-closure, visibility and
/// reports the first failure with a shortest witness.
pub fn is_indist_relation(r: &TwoTapeDfa, visibility: bool) -> Result<Diagnosis> {
    if visibility && r.act.is_none() {
        return Err(Error::MissingActMap);
    }
    let d = &r.dfa;
    let base = &d.base;
    let k = r.k();

    // reflexivity: walk the diagonal
    if let Some((_, w)) = bfs(
        base.initial,
        k,
        |&q, x| Some(base.step(q, r.pair(x, x))),
        |&q| !d.accepting[q as usize],
    ) {
        return Ok(Diagnosis::NotReflexive(w));
    }

    // symmetry
    if let Equivalence::Differ(w) = dfa_equivalent(d, &swap(r).dfa)? {
        let (a, b) = r.unzip(&w);
        let pair = if d.accepts(&w)? { (a, b) } else { (b, a) };
        return Ok(Diagnosis::NotSymmetric(pair));
    }

    // transitivity: triples (u,v), (v,w), (u,w) read in lockstep; states
    // that cannot reach acceptance are pruned from the first two tracks
    let live = d.coreachable();
    let q0 = base.initial;
    if let Some((_, word)) = bfs(
        (q0, q0, q0),
        k * k * k,
        |&(a, b, c), l| {
            let (x, y, z) = (l / (k * k), (l / k) % k, l % k);
            let a2 = base.step(a, r.pair(x, y));
            let b2 = base.step(b, r.pair(y, z));
            (live[a2 as usize] && live[b2 as usize]).then(|| (a2, b2, base.step(c, r.pair(x, z))))
        },
        |&(a, b, c)| d.accepting[a as usize] && d.accepting[b as usize] && !d.accepting[c as usize],
    ) {
        let u = word.iter().map(|&l| l / (k * k)).collect();
        let v = word.iter().map(|&l| (l / k) % k).collect();
        let w = word.iter().map(|&l| l % k).collect();
        return Ok(Diagnosis::NotTransitive { u, v, w });
    }

    // prefix-closure: a reachable rejecting state from which acceptance is reachable
    if let Some((q, w)) =
        bfs(q0, k * k, |&q, l| Some(base.step(q, l)), |&q| !d.accepting[q as usize] && live[q as usize])
    {
        let tail = to_accepting(d, q).expect("state is co-reachable");
        let prefix = w.len();
        let full: Vec<Letter> = w.into_iter().chain(tail).collect();
        return Ok(Diagnosis::NotPrefixClosed { pair: r.unzip(&full), prefix });
    }

    if visibility {
        let (_, act) = r.act.as_ref().unwrap();
        let offending = |q: StateId| {
            (0..k * k).find(|&l| {
                let (x, y) = r.unpair(l);
                act[x] != act[y] && live[base.step(q, l) as usize]
            })
        };
        if let Some((q, mut w)) = bfs(q0, k * k, |&q, l| Some(base.step(q, l)), |&q| offending(q).is_some()) {
            // accepted by prefix-closure, which holds at this point
            w.push(offending(q).unwrap());
            return Ok(Diagnosis::NotVisible(r.unzip(&w)));
        }
    }
    Ok(Diagnosis::Valid)
}

/// One player's tracker: both observation machine states and the last
/// common observation, or the rejecting sink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Track {
    Rej,
    Eq(StateId, StateId, Option<usize>),
}

/// The two-tape DFA of player 0's indistinguishability relation: the
/// product of per-player equality trackers, where a rejected tracker also
/// rejects every player linked to it on the current observation. States
/// whose player-0 entry is rejected are merged into one sink.
pub fn fip_to_2dfa(game: &FipGame) -> Result<TwoTapeDfa> {
    let report = game.validate();
    if !report.is_empty() {
        return Err(Error::InvalidGame(report.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")));
    }
    let k = game.moves.len();
    let n = game.num_players;
    let start: Vec<Track> = game.obs.iter().map(|m| Track::Eq(m.initial(), m.initial(), None)).collect();
    let mut index: HashMap<Vec<Track>, StateId> = HashMap::from([(start.clone(), 0)]);
    let mut states = vec![start];
    let mut delta: Vec<Vec<StateId>> = Vec::new();
    // the sink is numbered last
    const SINK: StateId = StateId::MAX;
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        i += 1;
        let mut row = Vec::with_capacity(k * k);
        for x in 0..k {
            for y in 0..k {
                let p: Vec<Track> = cur
                    .iter()
                    .zip(&game.obs)
                    .map(|(t, m)| match *t {
                        Track::Rej => Track::Rej,
                        Track::Eq(q1, q2, _) => {
                            let (o1, o2) = (m.output(q1, x), m.output(q2, y));
                            if o1 != o2 {
                                Track::Rej
                            } else {
                                Track::Eq(m.step(q1, x), m.step(q2, y), Some(o1))
                            }
                        }
                    })
                    .collect();
                // least J with the rejected entries, closed backwards under links
                let mut rejected: u32 = (0..n).filter(|&j| p[j] == Track::Rej).fold(0, |acc, j| acc | 1 << j);
                loop {
                    let mut grow = rejected;
                    for (j, t) in p.iter().enumerate() {
                        if let Track::Eq(_, _, Some(s)) = t {
                            if game.links(*s, j) & rejected != 0 {
                                grow |= 1 << j;
                            }
                        }
                    }
                    if grow == rejected {
                        break;
                    }
                    rejected = grow;
                }
                let r: Vec<Track> =
                    p.iter().enumerate().map(|(j, &t)| if rejected >> j & 1 == 1 { Track::Rej } else { t }).collect();
                let id = if r[0] == Track::Rej {
                    SINK
                } else {
                    *index.entry(r.clone()).or_insert_with(|| {
                        states.push(r);
                        (states.len() - 1) as StateId
                    })
                };
                row.push(id);
            }
        }
        delta.push(row);
    }
    let sink = states.len() as StateId;
    for row in delta.iter_mut() {
        for t in row.iter_mut() {
            if *t == SINK {
                *t = sink;
            }
        }
    }
    delta.push(vec![sink; k * k]);
    let mut names: Vec<String> = (0..states.len()).map(|s| format!("s{s}")).collect();
    names.push("rej".into());
    let mut accepting = vec![true; states.len()];
    accepting.push(false);
    let semi = SemiAutomaton::new(pair_alphabet(&game.moves), names, 0, delta)?;
    Ok(TwoTapeDfa::new(game.moves.clone(), Dfa::new(semi, accepting)?)?.with_act(game.actions.clone(), game.act.clone()))
}

/// All pairs of words of length `len` accepted, counted by dynamic
/// programming over the states.
pub fn count_accepted(r: &TwoTapeDfa, len: usize) -> u128 {
    let base = &r.dfa.base;
    let mut counts = vec![0u128; base.num_states()];
    counts[base.initial as usize] = 1;
    for _ in 0..len {
        let mut next = vec![0u128; base.num_states()];
        for (q, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for l in 0..base.num_letters() {
                next[base.step(q as StateId, l) as usize] += c;
            }
        }
        counts = next;
    }
    counts.iter().enumerate().filter(|(q, _)| r.dfa.accepting[*q]).map(|(_, &c)| c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(moves: &[&str]) -> TwoTapeDfa {
        let m = Alphabet::new(moves.iter().copied());
        let k = m.len();
        let semi = SemiAutomaton::from_fn(pair_alphabet(&m), 2, 0, |q, l| if q == 0 && l / k == l % k { 0 } else { 1 });
        TwoTapeDfa::new(m, Dfa::new(semi, vec![true, false]).unwrap()).unwrap()
    }

    #[test]
    fn identity_relation_is_valid() {
        let r = identity(&["a", "b"]);
        assert_eq!(is_indist_relation(&r, false).unwrap(), Diagnosis::Valid);
        assert!(relation_accepts(&r, &[], &[]).unwrap());
        assert!(relation_accepts(&r, &[0, 1], &[0, 1]).unwrap());
        assert!(!relation_accepts(&r, &[0, 1], &[1, 1]).unwrap());
        assert!(!relation_accepts(&r, &[0], &[0, 1]).unwrap());
    }

    #[test]
    fn visibility_needs_act() {
        let r = identity(&["a"]);
        assert_eq!(is_indist_relation(&r, true), Err(Error::MissingActMap));
    }

    #[test]
    fn universal_relation_is_not_visible_under_distinct_actions() {
        let m = Alphabet::new(["a", "b"]);
        let semi = SemiAutomaton::from_fn(pair_alphabet(&m), 1, 0, |_, _| 0);
        let r = TwoTapeDfa::new(m, Dfa::new(semi, vec![true]).unwrap())
            .unwrap()
            .with_act(Alphabet::new(["x", "y"]), vec![0, 1]);
        let d = is_indist_relation(&r, true).unwrap();
        assert_eq!(d, Diagnosis::NotVisible((vec![0], vec![1])));
        assert!(is_indist_relation(&r, false).unwrap().is_valid());
    }

    #[test]
    fn counting_matches_enumeration() {
        let r = identity(&["a", "b", "c"]);
        for len in 0..4 {
            assert_eq!(count_accepted(&r, len), 3u128.pow(len as u32));
        }
    }
}
