//! The learned human model: a Mealy machine over headway levels plus
//! re-deliberation edges that say how a hinted driver answers a repeated
//! stimulus.
//!
//! A hint only matters where the machine would take the retrieval shortcut,
//! so hint edges are recorded exactly for the `(state, level)` pairs whose
//! plain output uses the shortcut chain. Each edge is probed on the system
//! itself and its target is identified by a characterising word set.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::automata::{parse_mealy, to_text, AutomataError, MealyMachine, StateId, Word};
use crate::driver::{DriverSul, Level, Response, RuleChain};
use crate::learner::{Sul, SulError};

pub type DriverMachine = MealyMachine<Level, Response>;

/// A SUL that accepts an advisory hint between stimuli.
pub trait HintableSul: Sul {
    fn hint(&mut self);
}

impl HintableSul for DriverSul {
    fn hint(&mut self) {
        self.apply_hint()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HintEdge {
    pub response: Response,
    /// `None` when the probed successor matches no model state.
    pub target: Option<StateId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HumanModel {
    machine: DriverMachine,
    hints: BTreeMap<(StateId, Level), HintEdge>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Automata(#[from] AutomataError),

    #[error(transparent)]
    Sul(#[from] SulError),

    #[error("hint file line {line}: {message}")]
    HintParse { line: usize, message: String },
}

const HINT_HEADER: &str = "hints v1";

impl HumanModel {
    /// Model without hint knowledge; hinted shortcuts are then unknown.
    pub fn without_hints(machine: DriverMachine) -> Self {
        Self {
            machine: machine.canonical(),
            hints: BTreeMap::new(),
        }
    }

    /// Canonicalises `machine` and probes every hint edge on `sul`.
    pub fn probe<S>(machine: &DriverMachine, sul: &mut S) -> Result<Self, ModelError>
    where
        S: HintableSul<Input = Level, Output = Response>,
    {
        let machine = machine.canonical();
        let access = machine.access_words();
        let tests = characterising_set(&machine)?;
        let mut hints = BTreeMap::new();
        for (q, w) in access.iter().enumerate() {
            let w = w.as_ref().expect("canonical machines are reachable");
            for l in machine.inputs().iter() {
                let (_, out) = machine.step(q, l)?;
                if out.chain != RuleChain::Shortcut {
                    continue;
                }
                let run = |sul: &mut S, suffix: &[Level]| -> Result<Vec<Response>, SulError> {
                    sul.reset();
                    for a in w {
                        sul.step(a)?;
                    }
                    sul.hint();
                    let mut out = vec![sul.step(l)?];
                    for a in suffix {
                        out.push(sul.step(a)?);
                    }
                    Ok(out)
                };
                let response = run(sul, &[])?[0];
                let mut observed = Vec::with_capacity(tests.len());
                for t in &tests {
                    observed.push(run(sul, t)?[1..].to_vec());
                }
                let target = (0..machine.num_states()).find(|&cand| {
                    tests
                        .iter()
                        .zip(&observed)
                        .all(|(t, o)| machine.run_from(cand, t).map(|(_, out)| out == *o).unwrap_or(false))
                });
                hints.insert((q, *l), HintEdge { response, target });
            }
        }
        Ok(Self { machine, hints })
    }

    pub fn machine(&self) -> &DriverMachine {
        &self.machine
    }

    pub fn hints(&self) -> &BTreeMap<(StateId, Level), HintEdge> {
        &self.hints
    }

    pub fn initial(&self) -> StateId {
        self.machine.initial()
    }

    pub fn num_states(&self) -> usize {
        self.machine.num_states()
    }

    /// Driver reaction to `level` from `q`. `hinted` routes repeated stimuli
    /// through the re-deliberation edge. Returns `None` if that edge is
    /// unknown.
    pub fn step(&self, q: StateId, level: Level, hinted: bool) -> Result<Option<(Option<StateId>, Response)>, AutomataError> {
        let (next, out) = self.machine.step(q, &level)?;
        if hinted && out.chain == RuleChain::Shortcut {
            return Ok(self.hints.get(&(q, level)).map(|e| (e.target, e.response)));
        }
        Ok(Some((Some(next), *out)))
    }

    pub fn hints_text(&self) -> String {
        let mut out = format!("{HINT_HEADER} {}\n", self.hints.len());
        for (&(q, l), e) in &self.hints {
            let target = e.target.map_or("-".to_string(), |t| t.to_string());
            writeln!(out, "{q} {l} {target} {}", e.response).unwrap();
        }
        out
    }

    /// Parses the machine text and hint text written by `to_text` /
    /// `hints_text`.
    pub fn parse(machine_text: &str, hints_text: &str) -> Result<Self, ModelError> {
        let machine: DriverMachine = parse_mealy(machine_text)?;
        let machine = machine.canonical();
        let err = |line: usize, m: &str| ModelError::HintParse {
            line,
            message: m.to_string(),
        };
        let mut lines = hints_text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty hint file"))?;
        let count: usize = header
            .strip_prefix(HINT_HEADER)
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| err(1, "expected 'hints v1 <count>'"))?;
        let mut hints = BTreeMap::new();
        for (n, line) in lines.filter(|(_, l)| !l.is_empty()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            let [q, l, t, r] = f[..] else {
                return Err(err(n, "expected '<state> <level> <target|-> <response>'"));
            };
            let q: StateId = q.parse().map_err(|_| err(n, "bad state"))?;
            let l: Level = l.parse().map_err(|_| err(n, "bad level"))?;
            let target = match t {
                "-" => None,
                t => Some(t.parse::<StateId>().map_err(|_| err(n, "bad target"))?),
            };
            let response: Response = r.parse().map_err(|m: String| err(n, &m))?;
            let (_, plain) = machine.step(q, &l).map_err(|e| err(n, &e.to_string()))?;
            if plain.chain != RuleChain::Shortcut {
                return Err(err(n, "hint edge on a non-shortcut transition"));
            }
            if target.is_some_and(|t| t >= machine.num_states()) {
                return Err(err(n, "target out of range"));
            }
            hints.insert((q, l), HintEdge { response, target });
        }
        if hints.len() != count {
            return Err(err(0, "hint count does not match header"));
        }
        Ok(Self { machine, hints })
    }

    pub fn machine_text(&self) -> String {
        to_text(&self.machine)
    }
}

/// Words that separate every pair of distinct states, plus all single
/// letters.
pub fn characterising_set(m: &DriverMachine) -> Result<Vec<Word<Level>>, AutomataError> {
    let mut set: Vec<Word<Level>> = m.inputs().iter().map(|a| vec![*a]).collect();
    for a in 0..m.num_states() {
        for b in a + 1..m.num_states() {
            if let Some(w) = m.distinguish(a, b)? {
                if !set.contains(&w) {
                    set.push(w);
                }
            }
        }
    }
    Ok(set)
}
