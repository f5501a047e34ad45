//! Turn-based safety game between the supervisor and its environment.

mod arena;
mod build;

pub use arena::{
    arena_to_dot, check_templates, extract_strategy, realizable, solve, ArenaNode, Edge, GameArena, Move, Player,
    Strategy, TemplateReport, WinningRegion,
};
pub use build::{build_arena, true_level, DriveArena, GameState, GridWorld, Lattice, Turn};

use std::fmt::Write;

use crate::automata::AutomataError;
use crate::scenario::hex_digest;
use crate::supervisor::{ControlAction, Variant};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GameError {
    #[error("model has {model} inputs but the scenario defines {levels} headway levels")]
    AlphabetMismatch { model: usize, levels: usize },

    #[error("arena exceeds the state cap of {cap}")]
    ArenaTooLarge { cap: usize },

    #[error("objectives are unrealizable: the initial state is not winning")]
    Unrealizable,

    #[error("malformed arena: {0}")]
    Malformed(String),

    #[error(transparent)]
    Automata(#[from] AutomataError),

    #[error("strategy file line {line}: {message}")]
    StrategyParse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaStats {
    pub states: usize,
    pub controller_states: usize,
    pub environment_states: usize,
    pub edges: usize,
    pub bad_states: usize,
    pub goal_states: usize,
    pub iterations: usize,
    pub winning: usize,
    pub realizable: bool,
}

impl ArenaStats {
    pub fn new<K: Clone + Eq + std::hash::Hash + std::fmt::Debug>(arena: &GameArena<K>, w: &WinningRegion) -> Self {
        let nodes = arena.nodes();
        let count = |f: &dyn Fn(&ArenaNode<K>) -> bool| nodes.iter().filter(|n| f(n)).count();
        Self {
            states: nodes.len(),
            controller_states: count(&|n| n.owner == Player::Controller),
            environment_states: count(&|n| n.owner == Player::Environment),
            edges: arena.num_edges(),
            bad_states: count(&|n| n.bad),
            goal_states: count(&|n| n.goal),
            iterations: w.iterations,
            winning: w.size(),
            realizable: realizable(arena, w),
        }
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        writeln!(out, "states = {}", self.states).unwrap();
        writeln!(out, "controller_states = {}", self.controller_states).unwrap();
        writeln!(out, "environment_states = {}", self.environment_states).unwrap();
        writeln!(out, "edges = {}", self.edges).unwrap();
        writeln!(out, "bad_states = {}", self.bad_states).unwrap();
        writeln!(out, "goal_states = {}", self.goal_states).unwrap();
        writeln!(out, "iterations = {}", self.iterations).unwrap();
        writeln!(out, "winning = {}", self.winning).unwrap();
        writeln!(out, "realizable = {}", self.realizable).unwrap();
        out
    }
}

/// Strategy plus the fingerprints of what it was synthesized against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyFile {
    pub scenario: String,
    pub model: String,
    pub variant: Variant,
    pub strategy: Strategy<GameState>,
}

const STRATEGY_HEADER: &str = "strategy v1";

/// Fingerprint of a learned model's machine and hint texts.
pub fn model_fingerprint(machine_text: &str, hints_text: &str) -> String {
    hex_digest(format!("{machine_text}\n{hints_text}").as_bytes())
}

impl StrategyFile {
    /// ```text
    /// strategy v1
    /// scenario <sha256>
    /// model <sha256>
    /// variant <name>
    /// entries <n>
    /// <state-key> <action>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * self.strategy.len() + 256);
        writeln!(out, "{STRATEGY_HEADER}").unwrap();
        writeln!(out, "scenario {}", self.scenario).unwrap();
        writeln!(out, "model {}", self.model).unwrap();
        writeln!(out, "variant {}", self.variant).unwrap();
        writeln!(out, "entries {}", self.strategy.len()).unwrap();
        for (k, a) in &self.strategy.actions {
            writeln!(out, "{k} {a}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GameError> {
        let err = |line: usize, message: String| GameError::StrategyParse { line, message };
        let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
        let mut field = |name: &str| -> Result<String, GameError> {
            let (n, l) = lines.next().ok_or_else(|| err(0, format!("missing '{name}' line")))?;
            if name == STRATEGY_HEADER {
                return if l == STRATEGY_HEADER {
                    Ok(String::new())
                } else {
                    Err(err(n, format!("expected '{STRATEGY_HEADER}'")))
                };
            }
            l.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| err(n, format!("expected '{name} <value>'")))
        };
        field(STRATEGY_HEADER)?;
        let scenario = field("scenario")?;
        let model = field("model")?;
        let variant = field("variant")?.parse().map_err(|m| err(4, m))?;
        let entries: usize = field("entries")?
            .parse()
            .map_err(|_| err(5, "bad entry count".into()))?;
        let mut strategy = Strategy::default();
        for (n, line) in lines.filter(|(_, l)| !l.is_empty()) {
            let (k, a) = line
                .split_once(' ')
                .ok_or_else(|| err(n, "expected '<state> <action>'".into()))?;
            let key = k.parse().map_err(|m| err(n, m))?;
            let action: ControlAction = a.trim().parse().map_err(|m| err(n, m))?;
            if strategy.actions.insert(key, action).is_some() {
                return Err(err(n, format!("duplicate state '{k}'")));
            }
        }
        if strategy.len() != entries {
            return Err(err(0, format!("expected {entries} entries, found {}", strategy.len())));
        }
        Ok(Self {
            scenario,
            model,
            variant,
            strategy,
        })
    }
}
