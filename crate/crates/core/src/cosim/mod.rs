//! Closed-loop validation against the full driver, objective monitoring and
//! counterexample-driven model refinement.

mod monitor;
mod refine;
mod sim;
mod trace;

pub use monitor::{monitor, Status, Verdict};
pub use refine::{
    refine, refine_loop, run_seed, Iteration, LoopConfig, RefineOutcome, RefinementReport, Termination,
    DEFAULT_MAX_ITERATIONS, DEFAULT_RUNS,
};
pub use sim::{execute, state_labels, Policy};
pub use trace::{SimEvent, SimTrace, TraceRow, CSV_HEADER};

use sha2::{Digest, Sha256};

use crate::automata::AutomataError;
use crate::game::{model_fingerprint, GameError, StrategyFile};
use crate::hm::{HumanModel, ModelError};
use crate::learner::{LearnError, SulError};
use crate::scenario::Scenario;
use crate::vehicle::{compute_thw, compute_ttc, WorldState};

#[derive(Debug, thiserror::Error)]
pub enum CosimError {
    #[error(transparent)]
    Sul(#[from] SulError),

    #[error(transparent)]
    Automata(#[from] AutomataError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Game(#[from] GameError),

    #[error(transparent)]
    Learn(#[from] LearnError),

    #[error("strategy does not match: {0}")]
    Mismatch(String),
}

/// Headway and time to collision; both 0 once the follower has overtaken.
pub fn headways(w: &WorldState) -> (f64, f64) {
    (compute_thw(w).unwrap_or(0.0), compute_ttc(w).unwrap_or(0.0))
}

/// Per-purpose seed derived from the run seed, stable across platforms.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}/{tag}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Rejects a strategy synthesized for another scenario or model.
pub fn check_strategy(file: &StrategyFile, scenario: &Scenario, hm: &HumanModel) -> Result<(), CosimError> {
    if file.scenario != scenario.fingerprint() {
        return Err(CosimError::Mismatch("scenario fingerprint differs".into()));
    }
    if file.model != model_fingerprint(&hm.machine_text(), &hm.hints_text()) {
        return Err(CosimError::Mismatch("model fingerprint differs".into()));
    }
    Ok(())
}
