//! Angluin-style L* for Mealy machines.

mod oracle;
mod sul;
mod table;

pub use oracle::{EqOracleConfig, EquivalenceOracle, ExactOracle, RandomWalkOracle};
pub use sul::{MealySul, Sul, SulError};
pub use table::{ObservationTable, Row};

use std::fmt::Write;

use crate::automata::{AutomataError, MealyMachine, Symbol};

pub const DEFAULT_ROUND_CAP: usize = 100;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LearnError {
    #[error(transparent)]
    Sul(#[from] SulError),

    #[error(transparent)]
    Automata(#[from] AutomataError),

    #[error("observation table has unfilled cells")]
    Unfilled,

    #[error("observation table is not closed")]
    NotClosed,

    #[error("observation table is not consistent")]
    Inconsistent,

    #[error("word '{0}' does not distinguish the hypothesis from the system")]
    NotACounterexample(String),

    #[error("no convergence within {0} rounds")]
    RoundCap(usize),

    #[error("bad oracle configuration: {0}")]
    BadOracleConfig(&'static str),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LearnStats {
    pub rounds: usize,
    pub membership_queries: u64,
    pub equivalence_queries: u64,
    /// Hypothesis size after each round.
    pub history: Vec<usize>,
    pub states: usize,
    pub transitions: usize,
    pub converged: bool,
}

impl LearnStats {
    /// `key = value` report, readable back with the config reader.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let hist: Vec<String> = self.history.iter().map(usize::to_string).collect();
        writeln!(out, "rounds = {}", self.rounds).unwrap();
        writeln!(out, "membership_queries = {}", self.membership_queries).unwrap();
        writeln!(out, "equivalence_queries = {}", self.equivalence_queries).unwrap();
        writeln!(out, "states = {}", self.states).unwrap();
        writeln!(out, "transitions = {}", self.transitions).unwrap();
        writeln!(out, "converged = {}", self.converged).unwrap();
        writeln!(out, "history = {}", hist.join(",")).unwrap();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundOutcome {
    Converged,
    Refined,
}

/// An L* session that can be advanced one round at a time and fed external
/// counterexamples between rounds.
#[derive(Clone, Debug)]
pub struct Lstar<I: Symbol, O: Symbol> {
    table: ObservationTable<I, O>,
    hypothesis: Option<MealyMachine<I, O>>,
    stats: LearnStats,
}

impl<I: Symbol, O: Symbol> Lstar<I, O> {
    pub fn new(inputs: Vec<I>) -> Self {
        Self {
            table: ObservationTable::new(inputs),
            hypothesis: None,
            stats: LearnStats::default(),
        }
    }

    pub fn table(&self) -> &ObservationTable<I, O> {
        &self.table
    }

    pub fn hypothesis(&self) -> Option<&MealyMachine<I, O>> {
        self.hypothesis.as_ref()
    }

    pub fn stats(&self) -> LearnStats {
        let mut s = self.stats.clone();
        s.membership_queries = self.table.membership_queries();
        if let Some(h) = &self.hypothesis {
            s.states = h.num_states();
            s.transitions = h.num_transitions();
        }
        s
    }

    /// Repairs the table and rebuilds the hypothesis.
    pub fn rebuild<S>(&mut self, sul: &mut S) -> Result<&MealyMachine<I, O>, LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        self.table.stabilize(sul)?;
        let h = self.table.build_hypothesis()?;
        Ok(self.hypothesis.insert(h))
    }

    /// One round: stabilise, hypothesise, ask the oracle, and process the
    /// counterexample if there is one.
    pub fn round<S, E>(&mut self, sul: &mut S, oracle: &mut E) -> Result<RoundOutcome, LearnError>
    where
        S: Sul<Input = I, Output = O>,
        E: EquivalenceOracle<S>,
    {
        let h = self.rebuild(sul)?.clone();
        self.stats.rounds += 1;
        self.stats.history.push(h.num_states());
        self.stats.equivalence_queries += 1;
        match oracle.find_counterexample(sul, &h)? {
            None => {
                self.stats.converged = true;
                Ok(RoundOutcome::Converged)
            }
            Some(ce) => {
                self.stats.converged = false;
                self.table.process_counterexample(&h, &ce, sul)?;
                Ok(RoundOutcome::Refined)
            }
        }
    }

    /// Feeds an externally found counterexample to the current hypothesis.
    pub fn inject<S>(&mut self, sul: &mut S, ce: &[I]) -> Result<usize, LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        let h = match &self.hypothesis {
            Some(h) => h.clone(),
            None => self.rebuild(sul)?.clone(),
        };
        let added = self.table.process_counterexample(&h, ce, sul)?;
        self.stats.converged = false;
        Ok(added)
    }

    /// Runs rounds until the oracle passes or `max_rounds` is reached.
    pub fn run<S, E>(&mut self, sul: &mut S, oracle: &mut E, max_rounds: usize) -> Result<RoundOutcome, LearnError>
    where
        S: Sul<Input = I, Output = O>,
        E: EquivalenceOracle<S>,
    {
        for _ in 0..max_rounds {
            if self.round(sul, oracle)? == RoundOutcome::Converged {
                return Ok(RoundOutcome::Converged);
            }
        }
        // The last counterexample has been absorbed; expose the hypothesis
        // that accounts for it.
        self.rebuild(sul)?;
        Ok(RoundOutcome::Refined)
    }
}

/// A converged machine with the statistics of the session that learned it.
pub type Learned<I, O> = (MealyMachine<I, O>, LearnStats);

/// Learns `sul` to convergence. The inputs are taken in the given order.
pub fn learn<S, E>(
    sul: &mut S,
    inputs: Vec<S::Input>,
    oracle: &mut E,
    max_rounds: usize,
) -> Result<Learned<S::Input, S::Output>, LearnError>
where
    S: Sul,
    E: EquivalenceOracle<S>,
{
    let mut session = Lstar::new(inputs);
    match session.run(sul, oracle, max_rounds)? {
        RoundOutcome::Converged => {
            let h = session.hypothesis().expect("built in round").clone();
            Ok((h, session.stats()))
        }
        RoundOutcome::Refined => Err(LearnError::RoundCap(max_rounds)),
    }
}
