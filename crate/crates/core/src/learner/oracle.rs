use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Equivalence, MealyMachine, Symbol, Word};

use super::{LearnError, Sul};

/// Answers equivalence queries: `None` when no divergence was found.
pub trait EquivalenceOracle<S: Sul> {
    fn find_counterexample(
        &mut self,
        sul: &mut S,
        hypothesis: &MealyMachine<S::Input, S::Output>,
    ) -> Result<Option<Word<S::Input>>, LearnError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct EqOracleConfig {
    pub num_walks: usize,
    pub max_walk_len: usize,
    pub reset_prob: f64,
    pub rng_seed: u64,
}

impl Default for EqOracleConfig {
    fn default() -> Self {
        Self {
            num_walks: 500,
            max_walk_len: 20,
            reset_prob: 0.09,
            rng_seed: 0,
        }
    }
}

impl EqOracleConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.num_walks == 0 || self.max_walk_len == 0 {
            return Err(LearnError::BadOracleConfig("walk count and length must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.reset_prob) {
            return Err(LearnError::BadOracleConfig("reset probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Random-walk conformance testing. Each walk starts from reset and ends
/// after `max_walk_len` steps or, after any step, with probability
/// `reset_prob`. The first diverging prefix is returned.
#[derive(Clone, Debug)]
pub struct RandomWalkOracle {
    cfg: EqOracleConfig,
    rng: ChaCha8Rng,
    steps: u64,
}

impl RandomWalkOracle {
    pub fn new(cfg: EqOracleConfig) -> Result<Self, LearnError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        Ok(Self { cfg, rng, steps: 0 })
    }

    /// Total SUL steps spent on testing so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }
}

impl<S: Sul> EquivalenceOracle<S> for RandomWalkOracle {
    fn find_counterexample(
        &mut self,
        sul: &mut S,
        hypothesis: &MealyMachine<S::Input, S::Output>,
    ) -> Result<Option<Word<S::Input>>, LearnError> {
        let inputs = hypothesis.inputs();
        for _ in 0..self.cfg.num_walks {
            sul.reset();
            let mut state = hypothesis.initial();
            let mut word = Vec::new();
            for _ in 0..self.cfg.max_walk_len {
                let a = inputs.get(self.rng.gen_range(0..inputs.len())).clone();
                let got = sul.step(&a)?;
                self.steps += 1;
                let (next, expected) = hypothesis.step(state, &a)?;
                word.push(a);
                if *expected != got {
                    return Ok(Some(word));
                }
                state = next;
                if self.rng.gen_bool(self.cfg.reset_prob) {
                    break;
                }
            }
        }
        Ok(None)
    }
}

/// Exact oracle for a SUL whose behaviour is known as a Mealy machine.
/// Returns shortest counterexamples.
#[derive(Clone, Debug)]
pub struct ExactOracle<I: Symbol, O: Symbol> {
    reference: MealyMachine<I, O>,
}

impl<I: Symbol, O: Symbol> ExactOracle<I, O> {
    pub fn new(reference: MealyMachine<I, O>) -> Self {
        Self { reference }
    }
}

impl<S: Sul> EquivalenceOracle<S> for ExactOracle<S::Input, S::Output> {
    fn find_counterexample(
        &mut self,
        _sul: &mut S,
        hypothesis: &MealyMachine<S::Input, S::Output>,
    ) -> Result<Option<Word<S::Input>>, LearnError> {
        Ok(match hypothesis.equivalent(&self.reference)? {
            Equivalence::Equal => None,
            Equivalence::Counterexample(w) => Some(w),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::MealySul;

    fn toggle() -> MealyMachine<char, u8> {
        MealyMachine::new(vec!['a'], 0, vec![vec![(1, 0)], vec![(0, 1)]]).unwrap()
    }

    fn stub() -> MealyMachine<char, u8> {
        MealyMachine::new(vec!['a'], 0, vec![vec![(0, 0)]]).unwrap()
    }

    #[test]
    fn exact_hypothesis_passes() {
        let mut sul = MealySul::new(toggle());
        let mut o = RandomWalkOracle::new(EqOracleConfig::default()).unwrap();
        assert_eq!(o.find_counterexample(&mut sul, &toggle()).unwrap(), None);
    }

    #[test]
    fn stub_fails_within_two_steps() {
        let cfg = EqOracleConfig {
            reset_prob: 0.0,
            ..EqOracleConfig::default()
        };
        let mut sul = MealySul::new(toggle());
        let mut o = RandomWalkOracle::new(cfg).unwrap();
        let ce = o.find_counterexample(&mut sul, &stub()).unwrap().unwrap();
        assert_eq!(ce, vec!['a', 'a']);
    }

    #[test]
    fn same_seed_same_verdict() {
        let mk = || {
            let mut sul = MealySul::new(toggle());
            let mut o = RandomWalkOracle::new(EqOracleConfig {
                rng_seed: 7,
                reset_prob: 0.5,
                ..EqOracleConfig::default()
            })
            .unwrap();
            (o.find_counterexample(&mut sul, &stub()).unwrap(), o.steps())
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn config_validation() {
        let bad = EqOracleConfig {
            reset_prob: 1.5,
            ..EqOracleConfig::default()
        };
        assert!(RandomWalkOracle::new(bad).is_err());
        let bad = EqOracleConfig {
            num_walks: 0,
            ..EqOracleConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
