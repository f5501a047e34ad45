mod common;

use hcps_synth::automata::MealyMachine;
use hcps_synth::cosim::{
    execute, monitor, refine, refine_loop, LoopConfig, Policy, SimTrace, Status, Termination, TraceRow,
};
use hcps_synth::driver::{explicit_machine, DriverParams, DriverSul, Level, Response, RuleChain};
use hcps_synth::game::{check_templates, realizable, Player, Strategy, Turn};
use hcps_synth::learner::{EqOracleConfig, ExactOracle, Lstar, MealySul, RandomWalkOracle};
use hcps_synth::supervisor::{arbitrate, safe_now, ControlAction, Mode, Variant};
use hcps_synth::vehicle::{SensorErrorModel, VehicleState, WorldState};

use common::{learn_exact, load, synthesize};

#[test]
fn learner_recovers_the_reference_driver() {
    let p = DriverParams::default();
    let (m, stats) = learn_exact(&p);
    let reference = explicit_machine(&p).minimize();
    assert!(m.equivalent(&reference).unwrap().is_equal());
    assert!(stats.converged);
    assert_eq!(m.num_transitions(), m.num_states() * 4);
}

#[test]
fn random_walks_also_converge_on_the_default_driver() {
    let p = DriverParams::default();
    let mut sul = DriverSul::new(p.clone());
    let mut oracle = RandomWalkOracle::new(EqOracleConfig::default()).unwrap();
    let (m, _) = hcps_synth::learner::learn(&mut sul, p.levels.levels(), &mut oracle, 50).unwrap();
    assert!(m.equivalent(&explicit_machine(&p).minimize()).unwrap().is_equal());
}

#[test]
fn repeated_stimulus_skips_retrieval() {
    let (m, _) = learn_exact(&DriverParams::default());
    for (src, l, dst, out) in m.transitions() {
        let (_, again) = m.step(dst, l).unwrap();
        assert_eq!(again.chain, RuleChain::Shortcut, "state {src} input {l}");
        assert_eq!(again.acc, out.acc);
        for other in m.inputs().iter().filter(|o| *o != l) {
            assert_eq!(m.step(dst, other).unwrap().1.chain, RuleChain::Full);
        }
    }
}

#[test]
fn sensor_offset_controls_environment_branching() {
    let mut s = load("default.scn");
    s.sensor = SensorErrorModel { max_level_offset: 0 };
    let exact = synthesize(&s, Variant::Full);
    let start = exact.arena.node(exact.arena.initial());
    assert_eq!(start.edges.len(), 1);
    for n in exact.arena.nodes() {
        if n.owner == Player::Environment && !n.edges.is_empty() {
            assert_eq!(n.edges.len(), 1);
        }
    }
    s.sensor = SensorErrorModel { max_level_offset: 1 };
    let noisy = synthesize(&s, Variant::Full);
    for n in noisy.arena.nodes() {
        if n.owner == Player::Environment && !n.edges.is_empty() {
            assert!((2..=3).contains(&n.edges.len()), "{:?}", n.key);
        }
    }
}

#[test]
fn goal_and_collision_never_overlap() {
    let syn = synthesize(&load("default.scn"), Variant::Full);
    assert!(syn.arena.nodes().iter().all(|n| !(n.bad && n.goal)));
    assert!(syn.arena.nodes().iter().all(|n| n.key.turn != Turn::Lost));
}

#[test]
fn braking_lead_needs_the_override() {
    let s = load("braking.scn");
    let full = synthesize(&s, Variant::Full);
    assert!(realizable(&full.arena, &full.winning));
    let weak = synthesize(&s, Variant::NoOverride);
    assert!(!realizable(&weak.arena, &weak.winning));
    assert!(weak.strategy.is_none());
}

#[test]
fn synthesized_strategy_satisfies_every_template() {
    let syn = synthesize(&load("default.scn"), Variant::Full);
    let strategy = syn.strategy.as_ref().unwrap();
    let r = check_templates(&syn.arena, strategy);
    assert!(r.all_ok(), "{r:?}");
    assert!(r.visited > 1);
}

#[test]
fn always_override_breaks_minimal_intervention() {
    let syn = synthesize(&load("default.scn"), Variant::Full);
    let always = Strategy {
        actions: syn
            .arena
            .nodes()
            .iter()
            .filter(|n| n.owner == Player::Controller)
            .map(|n| (n.key, ControlAction::Override))
            .collect(),
    };
    let r = check_templates(&syn.arena, &always);
    let w = r.min_intervention_witness.expect("calm node with an override");
    assert!(syn.arena.node(w).calm);
}

fn run(syn: &common::Synthesis, s: &hcps_synth::scenario::Scenario, seed: u64) -> SimTrace {
    let mut sul = DriverSul::new(s.driver.clone());
    let strategy = syn.strategy.as_ref().unwrap();
    execute(Policy::Strategy(strategy), &syn.model, &mut sul, s, s.sensor, seed).unwrap()
}

#[test]
fn closed_loop_runs_are_safe_and_consistent() {
    let s = load("default.scn");
    let syn = synthesize(&s, Variant::Full);
    for seed in 0..10 {
        let t = run(&syn, &s, seed);
        assert_eq!(t.misses(), 0, "seed {seed}");
        assert!(monitor(&t, s.initial.dest, &s.supervisor.thresholds).passed());
        for r in &t.rows {
            assert!(r.world.follow.pos < r.world.lead.pos);
            assert!(!r.fallback);
            assert_eq!((r.applied_acc, r.action), arbitrate(r.mode, r.driver_acc, &s.supervisor));
        }
        assert_eq!(t.to_csv().lines().count(), t.rows.len() + 2);
    }
}

#[test]
fn runs_are_reproducible_per_seed() {
    let s = load("default.scn");
    let syn = synthesize(&s, Variant::Full);
    assert_eq!(run(&syn, &s, 7).to_csv(), run(&syn, &s, 7).to_csv());
}

#[test]
fn no_epochs_when_starting_at_the_destination() {
    let mut s = load("default.scn");
    s.initial.dest = 0.0;
    let syn = synthesize(&s, Variant::Full);
    let t = run(&syn, &s, 0);
    assert!(t.rows.is_empty());
    assert!(monitor(&t, s.initial.dest, &s.supervisor.thresholds).passed());
}

#[test]
fn unguided_driver_collides_on_the_aggressive_lead() {
    let s = load("aggressive.scn");
    let model = common::model(&s.driver);
    let mut failed = 0;
    for seed in 0..5 {
        let mut sul = DriverSul::new(s.driver.clone());
        let t = execute(Policy::Fixed(ControlAction::None), &model, &mut sul, &s, s.sensor, seed).unwrap();
        let v = monitor(&t, s.initial.dest, &s.supervisor.thresholds);
        if v.status == Status::SafetyViolation {
            failed += 1;
        }
    }
    assert_eq!(failed, 5);
}

fn passing_trace() -> (hcps_synth::scenario::Scenario, SimTrace) {
    let s = load("default.scn");
    let syn = synthesize(&s, Variant::Full);
    let t = run(&syn, &s, 3);
    (s, t)
}

#[test]
fn monitor_reports_each_objective() {
    let (s, t) = passing_trace();
    let th = &s.supervisor.thresholds;
    let dest = s.initial.dest;
    assert!(monitor(&t, dest, th).passed());

    let mut crash = t.clone();
    crash.rows[4].world.follow.pos = crash.rows[4].world.lead.pos;
    let v = monitor(&crash, dest, th);
    assert_eq!((v.status, v.witness), (Status::SafetyViolation, Some(4)));

    let mut short = t.clone();
    short.final_world = short.rows[2].world;
    let v = monitor(&short, dest, th);
    assert_eq!((v.status, v.witness), (Status::GoalNotReached, Some(t.rows.len())));

    let calm = t.rows.iter().position(|r| safe_now(r.thw, r.ttc, th)).unwrap();
    let mut eager = t.clone();
    eager.rows[calm].mode = Mode::Intervention;
    let v = monitor(&eager, dest, th);
    assert_eq!((v.status, v.witness), (Status::MinInterventionViolation, Some(calm)));

    let mut ignored = t.clone();
    ignored.rows[0].action = ControlAction::Hint;
    ignored.rows[1].chain = RuleChain::Shortcut;
    let v = monitor(&ignored, dest, th);
    assert_eq!((v.status, v.witness), (Status::ResponseViolation, Some(0)));
}

#[test]
fn safety_outranks_the_other_objectives() {
    let (s, t) = passing_trace();
    let mut both = t.clone();
    both.rows[0].mode = Mode::Intervention;
    both.final_world.follow.pos = both.final_world.lead.pos + 1.0;
    let v = monitor(&both, s.initial.dest, &s.supervisor.thresholds);
    assert_eq!(v.status, Status::SafetyViolation);
    assert_eq!(v.witness, Some(t.rows.len()));
}

/// Answers `full(0)` on every third L1 and `shortcut(0)` otherwise: one
/// round with single-letter suffixes cannot see the counter.
fn counter_machine() -> MealyMachine<Level, Response> {
    let levels: Vec<Level> = (1..=4).map(Level).collect();
    let rows = (0..3)
        .map(|c| {
            levels
                .iter()
                .map(|l| {
                    if *l == Level(1) {
                        let out = if c == 2 { Response::full(0) } else { Response::shortcut(0) };
                        ((c + 1) % 3, out)
                    } else {
                        (c, Response::shortcut(0))
                    }
                })
                .collect()
        })
        .collect();
    MealyMachine::new(levels, 0, rows).unwrap()
}

fn trace_of(stimuli: &[u8]) -> SimTrace {
    let w = WorldState {
        lead: VehicleState::new(30.0, 10.0),
        follow: VehicleState::new(0.0, 10.0),
        t: 0.0,
        dest: 100.0,
    };
    SimTrace {
        rows: stimuli
            .iter()
            .map(|&l| TraceRow {
                t: 0.0,
                world: w,
                thw: 3.0,
                ttc: f64::INFINITY,
                perceived: Level(l),
                mode: Mode::Nominal,
                driver_acc: 0,
                applied_acc: 0,
                action: ControlAction::None,
                chain: RuleChain::Shortcut,
                fallback: false,
            })
            .collect(),
        final_world: w,
        horizon_steps: 10,
        events: Vec::new(),
    }
}

#[test]
fn refinement_grows_an_undertrained_model() {
    let target = counter_machine();
    let mut sul = MealySul::new(target.clone());
    let mut session: Lstar<Level, Response> = Lstar::new((1..=4).map(Level).collect());
    let before = session.rebuild(&mut sul).unwrap().num_states();
    assert_eq!(before, 1);

    let missed = trace_of(&[1, 1, 1]);
    let agreed = trace_of(&[2, 3]);
    let mut oracle = ExactOracle::new(target.clone());
    let out = refine(&mut session, &[(0, &agreed), (1, &missed)], &mut sul, &mut oracle, 10).unwrap();
    assert_eq!(out.injected, vec![1]);
    assert_eq!(out.skipped.len(), 1);
    assert_eq!(out.skipped[0].0, 0);
    let after = session.hypothesis().unwrap();
    assert!(after.num_states() > before);
    assert!(after.equivalent(&target).unwrap().is_equal());
}

#[test]
fn refinement_leaves_an_exact_model_alone() {
    let p = DriverParams::default();
    let (m, _) = learn_exact(&p);
    let mut sul = DriverSul::new(p.clone());
    let mut session: Lstar<Level, Response> = Lstar::new(p.levels.levels());
    let mut oracle = ExactOracle::new(m.clone());
    session.run(&mut sul, &mut oracle, 10).unwrap();
    let trace = trace_of(&[1, 2, 2, 4, 3, 1]);
    let out = refine(&mut session, &[(0, &trace)], &mut sul, &mut oracle, 10).unwrap();
    assert!(out.injected.is_empty());
    assert!(session.hypothesis().unwrap().equivalent(&m).unwrap().is_equal());
}

#[test]
fn loop_ends_at_the_iteration_cap() {
    let cfg = LoopConfig {
        max_iterations: 1,
        runs: 3,
        ..LoopConfig::default()
    };
    let r = refine_loop(&load("default.scn"), &cfg).unwrap();
    assert_eq!(r.iterations.len(), 1);
    assert!(matches!(r.termination, Termination::AllPass | Termination::MaxIterations));
}

#[test]
fn loop_reports_an_unrealizable_design() {
    let cfg = LoopConfig {
        variant: Variant::NoOverride,
        runs: 3,
        ..LoopConfig::default()
    };
    let r = refine_loop(&load("default.scn"), &cfg).unwrap();
    assert_eq!(r.termination, Termination::Unrealizable);
    assert_eq!(r.iterations.len(), 1);
    assert!(r.iterations[0].strategy.is_none());
    assert!(r.to_text().ends_with("termination unrealizable\n"));
}

#[test]
fn loop_passes_on_the_default_scenario() {
    let r = refine_loop(&load("default.scn"), &LoopConfig::default()).unwrap();
    assert_eq!(r.termination, Termination::AllPass);
    let last = r.iterations.last().unwrap();
    assert_eq!(last.passed(), 25);
    assert_eq!(last.misses(), 0);
}
