//! Finite-state machinery shared by the rest of the crate: alphabets,
//! deterministic Mealy machines, minimization, exact equivalence and the
//! plain-text / DOT formats.

mod alphabet;
mod format;
mod mealy;

pub use alphabet::Alphabet;
pub use format::{parse_mealy, to_dot, to_text};
pub use mealy::{Equivalence, MealyMachine, StateId};

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

/// Opaque alphabet token. Symbols must render without whitespace so that they
/// survive the line-oriented text format.
pub trait Symbol: Clone + Eq + Hash + Debug + Display + FromStr {}

impl<T> Symbol for T where T: Clone + Eq + Hash + Debug + Display + FromStr {}

/// A finite input sequence.
pub type Word<I> = Vec<I>;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,

    #[error("alphabet contains duplicate symbol '{0}'")]
    DuplicateSymbol(String),

    #[error("symbol '{0}' is not part of the input alphabet")]
    UnknownSymbol(String),

    #[error("state {state} is outside the valid range 0..{count}")]
    UnknownState { state: StateId, count: usize },

    #[error("state {state} has {found} transitions, expected {expected}")]
    Incomplete {
        state: StateId,
        found: usize,
        expected: usize,
    },

    #[error("machines are defined over different input alphabets")]
    AlphabetMismatch,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
