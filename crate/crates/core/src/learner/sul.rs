use crate::automata::{MealyMachine, StateId, Symbol};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SulError {
    #[error("input '{0}' rejected by the system under learning")]
    RejectedInput(String),
}

/// A resettable, deterministic black box that maps inputs to outputs.
pub trait Sul {
    type Input: Symbol;
    type Output: Symbol;

    fn reset(&mut self);

    fn step(&mut self, input: &Self::Input) -> Result<Self::Output, SulError>;

    /// Reset, then feed `word`.
    fn query(&mut self, word: &[Self::Input]) -> Result<Vec<Self::Output>, SulError> {
        self.reset();
        word.iter().map(|a| self.step(a)).collect()
    }
}

/// Exposes a known Mealy machine as a SUL; used for fixtures and oracles.
#[derive(Clone, Debug)]
pub struct MealySul<I: Symbol, O: Symbol> {
    machine: MealyMachine<I, O>,
    state: StateId,
}

impl<I: Symbol, O: Symbol> MealySul<I, O> {
    pub fn new(machine: MealyMachine<I, O>) -> Self {
        let state = machine.initial();
        Self { machine, state }
    }

    pub fn machine(&self) -> &MealyMachine<I, O> {
        &self.machine
    }
}

impl<I: Symbol, O: Symbol> Sul for MealySul<I, O> {
    type Input = I;
    type Output = O;

    fn reset(&mut self) {
        self.state = self.machine.initial();
    }

    fn step(&mut self, input: &I) -> Result<O, SulError> {
        let (next, out) = self
            .machine
            .step(self.state, input)
            .map_err(|_| SulError::RejectedInput(input.to_string()))?;
        self.state = next;
        Ok(out.clone())
    }
}
