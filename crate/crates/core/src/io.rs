//! JSON file formats: machines, games, two-tape relations, strategies.
//!
//! Transition keys are `"state,letter"`; the split happens at the last
//! comma, so letters may not contain commas. A key `"state,*"` gives a
//! default for every letter not listed explicitly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::automata::{Alphabet, Dfa, MealyMachine, SemiAutomaton, StateId};
use crate::error::{Error, Result};
use crate::fip::{FipGame, Violation, VisibilityMode, WinningCondition};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineFile {
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub initial: String,
    pub delta: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepting: Option<Vec<String>>,
    /// Target of every transition missing from `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConditionFile {
    Reachability {
        targets: Vec<String>,
    },
    Parity {
        #[serde(default = "min_even")]
        convention: String,
        priorities: BTreeMap<String, u32>,
    },
}

fn min_even() -> String {
    "min-even".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameFile {
    pub schema_version: u32,
    pub players: usize,
    pub actions: Vec<String>,
    pub moves: Vec<String>,
    pub act: BTreeMap<String, String>,
    pub observations: Vec<String>,
    pub observers: Vec<MachineFile>,
    pub comm: BTreeMap<String, Vec<(usize, usize)>>,
    pub colors: Vec<String>,
    pub coloring: MachineFile,
    pub condition: ConditionFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTapeFile {
    pub schema_version: u32,
    pub moves: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub delta: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub schema_version: u32,
    pub initial_action: String,
    pub machine: MachineFile,
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Schema(format!("unsupported schema_version {v}")));
    }
    Ok(())
}

fn split_key(key: &str) -> Result<(&str, &str)> {
    key.rsplit_once(',')
        .ok_or_else(|| Error::Schema(format!("transition key {key:?} is not \"state,letter\"")))
}

/// Dense tables read from a machine file; `None` marks a missing entry.
struct Tables {
    states: Alphabet,
    initial: StateId,
    delta: Vec<Vec<Option<StateId>>>,
    lambda: Option<Vec<Vec<Option<usize>>>>,
}

fn read_tables(mf: &MachineFile, alphabet: &Alphabet, outputs: Option<&Alphabet>) -> Result<Tables> {
    let states = Alphabet::new(mf.states.iter().cloned());
    if states.len() != mf.states.len() {
        return Err(Error::Schema("duplicate state name".into()));
    }
    let state = |s: &str| {
        states.get(s).map(|i| i as StateId).ok_or_else(|| Error::Schema(format!("unknown state {s:?}")))
    };
    let initial = state(&mf.initial)?;
    let n = states.len();
    let k = alphabet.len();
    let fill = |map: &BTreeMap<String, String>, value: &dyn Fn(&str) -> Result<usize>| -> Result<Vec<Vec<Option<usize>>>> {
        let mut table = vec![vec![None; k]; n];
        // wildcard defaults first, explicit entries override
        for pass in [true, false] {
            for (key, v) in map {
                let (q, a) = split_key(key)?;
                if (a == "*") != pass {
                    continue;
                }
                let q = state(q)? as usize;
                let v = value(v)?;
                if pass {
                    for cell in table[q].iter_mut() {
                        *cell = Some(v);
                    }
                } else {
                    let a = alphabet.get(a).ok_or_else(|| Error::Schema(format!("unknown letter {a:?}")))?;
                    table[q][a] = Some(v);
                }
            }
        }
        Ok(table)
    };
    let mut delta = fill(&mf.delta, &|s| state(s).map(|q| q as usize))?;
    if let Some(sink) = &mf.sink {
        let sink = state(sink)? as usize;
        for row in delta.iter_mut() {
            for cell in row.iter_mut() {
                cell.get_or_insert(sink);
            }
        }
    }
    let delta = delta
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.map(|q| q as StateId)).collect())
        .collect();
    let lambda = match (&mf.lambda, outputs) {
        (Some(l), Some(out)) => Some(fill(l, &|s| {
            out.get(s).ok_or_else(|| Error::Schema(format!("unknown output {s:?}")))
        })?),
        (Some(_), None) => return Err(Error::Schema("unexpected lambda".into())),
        (None, _) => None,
    };
    Ok(Tables { states, initial, delta, lambda })
}

fn missing<T>(table: &[Vec<Option<T>>], states: &Alphabet, alphabet: &Alphabet) -> Option<String> {
    for (q, row) in table.iter().enumerate() {
        for (a, c) in row.iter().enumerate() {
            if c.is_none() {
                return Some(format!("({}, {})", states.name(q), alphabet.name(a)));
            }
        }
    }
    None
}

fn complete<T: Copy>(table: Vec<Vec<Option<T>>>) -> Vec<Vec<T>> {
    table.into_iter().map(|r| r.into_iter().map(|c| c.unwrap()).collect()).collect()
}

/// Reads a Mealy machine; a missing entry is reported as a violation.
fn mealy_from_file(
    mf: &MachineFile,
    what: &str,
    alphabet: &Alphabet,
    outputs: &Alphabet,
) -> Result<std::result::Result<MealyMachine, Violation>> {
    if let Some(a) = &mf.alphabet {
        if Alphabet::new(a.iter().cloned()) != *alphabet {
            return Err(Error::Schema(format!("{what}: alphabet differs from the move list")));
        }
    }
    let t = read_tables(mf, alphabet, Some(outputs))?;
    let lambda = t.lambda.ok_or_else(|| Error::Schema(format!("{what}: lambda missing")))?;
    if let Some(m) = missing(&t.delta, &t.states, alphabet) {
        return Ok(Err(Violation::NonTotal(format!("{what}: delta undefined at {m}"))));
    }
    if let Some(m) = missing(&lambda, &t.states, alphabet) {
        return Ok(Err(Violation::NonTotal(format!("{what}: lambda undefined at {m}"))));
    }
    let base = SemiAutomaton::new(alphabet.clone(), t.states.names().to_vec(), t.initial, complete(t.delta))?;
    Ok(Ok(MealyMachine::new(base, outputs.clone(), complete(lambda))?))
}

pub fn mealy_to_file(m: &MealyMachine) -> MachineFile {
    let mut delta = BTreeMap::new();
    let mut lambda = BTreeMap::new();
    let names = &m.base.state_names;
    for q in 0..m.num_states() {
        for a in 0..m.base.num_letters() {
            let key = format!("{},{}", names[q], m.base.alphabet.name(a));
            delta.insert(key.clone(), names[m.step(q as StateId, a) as usize].clone());
            lambda.insert(key, m.outputs.name(m.output(q as StateId, a)).to_string());
        }
    }
    MachineFile {
        states: names.clone(),
        alphabet: Some(m.base.alphabet.names().to_vec()),
        initial: names[m.initial() as usize].clone(),
        delta,
        outputs: Some(m.outputs.names().to_vec()),
        lambda: Some(lambda),
        accepting: None,
        sink: None,
    }
}

pub fn mealy_from_standalone(mf: &MachineFile) -> Result<MealyMachine> {
    let alphabet = Alphabet::new(mf.alphabet.clone().ok_or_else(|| Error::Schema("alphabet missing".into()))?);
    let outputs = Alphabet::new(mf.outputs.clone().ok_or_else(|| Error::Schema("outputs missing".into()))?);
    mealy_from_file(mf, "machine", &alphabet, &outputs)?.map_err(|v| Error::Schema(v.to_string()))
}

pub fn dfa_to_file(d: &Dfa) -> MachineFile {
    let names = &d.base.state_names;
    let mut delta = BTreeMap::new();
    for q in 0..d.num_states() {
        for a in 0..d.base.num_letters() {
            delta.insert(
                format!("{},{}", names[q], d.base.alphabet.name(a)),
                names[d.base.step(q as StateId, a) as usize].clone(),
            );
        }
    }
    MachineFile {
        states: names.clone(),
        alphabet: Some(d.base.alphabet.names().to_vec()),
        initial: names[d.base.initial as usize].clone(),
        delta,
        outputs: None,
        lambda: None,
        accepting: Some((0..d.num_states()).filter(|&q| d.accepting[q]).map(|q| names[q].clone()).collect()),
        sink: None,
    }
}

pub fn dfa_from_file(mf: &MachineFile) -> Result<Dfa> {
    let alphabet = Alphabet::new(mf.alphabet.clone().ok_or_else(|| Error::Schema("alphabet missing".into()))?);
    let t = read_tables(mf, &alphabet, None)?;
    if let Some(m) = missing(&t.delta, &t.states, &alphabet) {
        return Err(Error::Schema(format!("delta undefined at {m} and no sink declared")));
    }
    let mut accepting = vec![false; t.states.len()];
    for s in mf.accepting.iter().flatten() {
        accepting[t.states.get(s).ok_or_else(|| Error::Schema(format!("unknown state {s:?}")))?] = true;
    }
    Dfa::new(SemiAutomaton::new(alphabet, t.states.names().to_vec(), t.initial, complete(t.delta))?, accepting)
}

impl GameFile {
    pub fn parse(text: &str) -> Result<GameFile> {
        let g: GameFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        check_version(g.schema_version)?;
        Ok(g)
    }

    /// Builds and validates the game. Undeclared symbols are schema errors;
    /// everything `validate` reports comes back as violations.
    pub fn to_game(&self) -> Result<std::result::Result<FipGame, Vec<Violation>>> {
        self.to_game_with(VisibilityMode::AllPairs)
    }

    pub fn to_game_with(&self, mode: VisibilityMode) -> Result<std::result::Result<FipGame, Vec<Violation>>> {
        let moves = Alphabet::new(self.moves.iter().cloned());
        let actions = Alphabet::new(self.actions.iter().cloned());
        let observations = Alphabet::new(self.observations.iter().cloned());
        let colors = Alphabet::new(self.colors.iter().cloned());
        for (what, a, list) in [
            ("moves", &moves, &self.moves),
            ("actions", &actions, &self.actions),
            ("observations", &observations, &self.observations),
            ("colors", &colors, &self.colors),
        ] {
            if a.len() != list.len() {
                return Err(Error::Schema(format!("duplicate name in {what}")));
            }
            if let Some(bad) = list.iter().find(|s| s.contains(',')) {
                return Err(Error::Schema(format!("{what} name {bad:?} contains a comma")));
            }
        }
        let mut violations = Vec::new();
        let mut act = Vec::with_capacity(moves.len());
        for m in moves.names() {
            match self.act.get(m) {
                Some(a) => act.push(actions.lookup(a).map_err(|_| Error::Schema(format!("unknown action {a:?}")))?),
                None => {
                    violations.push(Violation::NonTotal(format!("act undefined on {m}")));
                    act.push(0);
                }
            }
        }
        for m in self.act.keys() {
            moves.lookup(m).map_err(|_| Error::Schema(format!("act: unknown move {m:?}")))?;
        }
        if self.observers.len() != self.players {
            return Err(Error::Schema(format!(
                "{} players declared but {} observation machines given",
                self.players,
                self.observers.len()
            )));
        }
        let mut obs = Vec::new();
        for (i, mf) in self.observers.iter().enumerate() {
            match mealy_from_file(mf, &format!("observer {i}"), &moves, &observations)? {
                Ok(m) => obs.push(m),
                Err(v) => violations.push(v),
            }
        }
        let coloring = match mealy_from_file(&self.coloring, "coloring", &moves, &colors)? {
            Ok(m) => Some(m),
            Err(v) => {
                violations.push(v);
                None
            }
        };
        let mut comm = vec![None; observations.len()];
        for (s, rel) in &self.comm {
            let s = observations.lookup(s).map_err(|_| Error::Schema(format!("comm: unknown observation {s:?}")))?;
            comm[s] = Some(rel.clone());
        }
        let condition = match &self.condition {
            ConditionFile::Reachability { targets } => {
                let mut t = vec![false; colors.len()];
                for c in targets {
                    t[colors.lookup(c).map_err(|_| Error::Schema(format!("unknown color {c:?}")))?] = true;
                }
                WinningCondition::Reachability { targets: t }
            }
            ConditionFile::Parity { convention, priorities } => {
                if convention != "min-even" {
                    return Err(Error::Schema(format!("unsupported parity convention {convention:?}")));
                }
                let mut p = vec![u32::MAX; colors.len()];
                for (c, &v) in priorities {
                    p[colors.lookup(c).map_err(|_| Error::Schema(format!("unknown color {c:?}")))?] = v;
                }
                if let Some(c) = p.iter().position(|&v| v == u32::MAX) {
                    violations.push(Violation::NonTotal(format!("no priority for color {}", colors.name(c))));
                }
                WinningCondition::Parity { priorities: p }
            }
        };
        if !violations.is_empty() {
            return Ok(Err(violations));
        }
        let game = FipGame {
            num_players: self.players,
            actions,
            moves,
            act,
            observations,
            obs,
            comm,
            colors,
            coloring: coloring.unwrap(),
            condition,
        };
        let violations = game.validate_with(mode);
        Ok(if violations.is_empty() { Ok(game) } else { Err(violations) })
    }

    pub fn from_game(g: &FipGame) -> GameFile {
        let mut comm = BTreeMap::new();
        for (s, rel) in g.comm.iter().enumerate() {
            if let Some(rel) = rel {
                comm.insert(g.observations.name(s).to_string(), rel.clone());
            }
        }
        let condition = match &g.condition {
            WinningCondition::Reachability { targets } => ConditionFile::Reachability {
                targets: (0..g.colors.len()).filter(|&c| targets[c]).map(|c| g.colors.name(c).into()).collect(),
            },
            WinningCondition::Parity { priorities } => ConditionFile::Parity {
                convention: min_even(),
                priorities: (0..g.colors.len()).map(|c| (g.colors.name(c).to_string(), priorities[c])).collect(),
            },
        };
        GameFile {
            schema_version: SCHEMA_VERSION,
            players: g.num_players,
            actions: g.actions.names().to_vec(),
            moves: g.moves.names().to_vec(),
            act: (0..g.moves.len()).map(|c| (g.moves.name(c).into(), g.actions.name(g.act[c]).into())).collect(),
            observations: g.observations.names().to_vec(),
            observers: g.obs.iter().map(mealy_to_file).collect(),
            comm,
            colors: g.colors.names().to_vec(),
            coloring: mealy_to_file(&g.coloring),
            condition,
        }
    }
}

/// Parses and builds a game; violations are flattened into a schema error.
pub fn load_game(text: &str) -> Result<FipGame> {
    GameFile::parse(text)?.to_game()?.map_err(|v| {
        Error::InvalidGame(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
    })
}

pub fn game_to_json(g: &FipGame) -> String {
    serde_json::to_string_pretty(&GameFile::from_game(g)).expect("game serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wildcard_and_override() {
        let mf: MachineFile = serde_json::from_value(serde_json::json!({
            "states": ["s"], "initial": "s",
            "delta": {"s,*": "s"},
            "lambda": {"s,*": "u", "s,c": "c"}
        }))
        .unwrap();
        let moves = Alphabet::new(["a", "b", "c"]);
        let out = Alphabet::new(["u", "c"]);
        let m = mealy_from_file(&mf, "m", &moves, &out).unwrap().unwrap();
        assert_eq!(m.trace(&[0, 1, 2]).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn missing_transition_is_reported() {
        let mf: MachineFile = serde_json::from_value(serde_json::json!({
            "states": ["s"], "initial": "s",
            "delta": {"s,a": "s"},
            "lambda": {"s,*": "u"}
        }))
        .unwrap();
        let moves = Alphabet::new(["a", "b"]);
        let out = Alphabet::new(["u"]);
        assert!(matches!(mealy_from_file(&mf, "m", &moves, &out).unwrap(), Err(Violation::NonTotal(_))));
    }
}
