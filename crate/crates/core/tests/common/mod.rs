#![allow(dead_code)]

use std::path::PathBuf;

use hcps_synth::automata::MealyMachine;
use hcps_synth::driver::{explicit_machine, DriverParams, DriverSul, Level, Response};
use hcps_synth::game::{build_arena, extract_strategy, solve, DriveArena, GameState, Strategy, WinningRegion};
use hcps_synth::hm::HumanModel;
use hcps_synth::learner::{learn, ExactOracle, LearnStats, DEFAULT_ROUND_CAP};
use hcps_synth::scenario::Scenario;
use hcps_synth::supervisor::Variant;

/// Learns the reference driver with the exact oracle.
pub fn learn_exact(params: &DriverParams) -> (MealyMachine<Level, Response>, LearnStats) {
    let mut sul = DriverSul::new(params.clone());
    let mut oracle = ExactOracle::new(explicit_machine(params).minimize());
    learn(&mut sul, params.levels.levels(), &mut oracle, DEFAULT_ROUND_CAP).unwrap()
}

pub fn model(params: &DriverParams) -> HumanModel {
    let (m, _) = learn_exact(params);
    HumanModel::probe(&m, &mut DriverSul::new(params.clone())).unwrap()
}

pub struct Synthesis {
    pub model: HumanModel,
    pub arena: DriveArena,
    pub winning: WinningRegion,
    pub strategy: Option<Strategy<GameState>>,
}

pub fn synthesize(scenario: &Scenario, variant: Variant) -> Synthesis {
    let model = model(&scenario.driver);
    let arena = build_arena(&model, scenario, variant).unwrap();
    let winning = solve(&arena);
    let strategy = extract_strategy(&arena, &winning).ok();
    Synthesis {
        model,
        arena,
        winning,
        strategy,
    }
}

pub fn scenario_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

pub fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_file(name)).unwrap()
}

pub mod micro;
