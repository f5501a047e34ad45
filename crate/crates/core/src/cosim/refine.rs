use std::fmt::Write;

use crate::automata::MealyMachine;
use crate::driver::{DriverParams, DriverSul, Level, Response};
use crate::game::{build_arena, extract_strategy, model_fingerprint, solve, ArenaStats, StrategyFile};
use crate::hm::HumanModel;
use crate::learner::{EqOracleConfig, EquivalenceOracle, LearnStats, Lstar, RandomWalkOracle, RoundOutcome, Sul, DEFAULT_ROUND_CAP};
use crate::scenario::Scenario;
use crate::supervisor::Variant;

use super::monitor::{monitor, Verdict};
use super::sim::{execute, Policy};
use super::trace::SimTrace;
use super::{derive_seed, CosimError};

pub const DEFAULT_RUNS: usize = 25;
pub const DEFAULT_MAX_ITERATIONS: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineOutcome {
    /// Traces whose stimuli were fed to the learner.
    pub injected: Vec<usize>,
    /// Traces the model already reproduces, with the reason.
    pub skipped: Vec<(usize, String)>,
}

/// Feeds the stimulus sequences of `traces` to `session` as counterexamples
/// and resumes learning. A sequence the current hypothesis already answers
/// like the driver is skipped: the violation it came from is not a model
/// fidelity problem.
pub fn refine<S, E>(
    session: &mut Lstar<Level, Response>,
    traces: &[(usize, &SimTrace)],
    sul: &mut S,
    oracle: &mut E,
    max_rounds: usize,
) -> Result<RefineOutcome, CosimError>
where
    S: Sul<Input = Level, Output = Response>,
    E: EquivalenceOracle<S>,
{
    let mut out = RefineOutcome::default();
    for &(i, trace) in traces {
        let word = trace.stimuli();
        let hyp = match session.hypothesis() {
            Some(h) => h.clone(),
            None => session.rebuild(sul)?.clone(),
        };
        let predicted = hyp.run(&word)?;
        let observed = sul.query(&word)?;
        if predicted == observed {
            out.skipped.push((i, "stimuli reproduced by the model".into()));
            continue;
        }
        session.inject(sul, &word)?;
        session.rebuild(sul)?;
        out.injected.push(i);
    }
    if !out.injected.is_empty() {
        session.run(sul, oracle, max_rounds)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopConfig {
    pub variant: Variant,
    pub runs: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Walk parameters; the walk seed is derived from `seed`.
    pub oracle: EqOracleConfig,
    /// Stop the initial learning after this many rounds.
    pub initial_rounds: Option<usize>,
    pub round_cap: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Full,
            runs: DEFAULT_RUNS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
            oracle: EqOracleConfig::default(),
            initial_rounds: None,
            round_cap: DEFAULT_ROUND_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    AllPass,
    MaxIterations,
    Stable,
    /// The variant admits no winning strategy; the design must change.
    Unrealizable,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::AllPass => "all-pass",
            Termination::MaxIterations => "max-iterations",
            Termination::Stable => "stable",
            Termination::Unrealizable => "unrealizable",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Iteration {
    pub states: usize,
    pub transitions: usize,
    pub learn: LearnStats,
    pub model: HumanModel,
    pub arena: ArenaStats,
    pub strategy: Option<StrategyFile>,
    pub traces: Vec<SimTrace>,
    pub verdicts: Vec<Verdict>,
    pub refine: Option<RefineOutcome>,
}

impl Iteration {
    pub fn realizable(&self) -> bool {
        self.arena.realizable
    }

    pub fn passed(&self) -> usize {
        self.verdicts.iter().filter(|v| v.passed()).count()
    }

    pub fn misses(&self) -> usize {
        self.traces.iter().map(SimTrace::misses).sum()
    }

    /// All runs passed and none left the model.
    pub fn clean(&self) -> bool {
        self.realizable() && self.passed() == self.verdicts.len() && self.misses() == 0
    }
}

#[derive(Clone, Debug)]
pub struct RefinementReport {
    pub scenario: String,
    pub config: LoopConfig,
    pub iterations: Vec<Iteration>,
    pub termination: Termination,
}

impl RefinementReport {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        writeln!(out, "refinement v1").unwrap();
        writeln!(out, "scenario {}", self.scenario).unwrap();
        writeln!(out, "variant {}", c.variant).unwrap();
        writeln!(out, "seed {}", c.seed).unwrap();
        writeln!(out, "runs {}", c.runs).unwrap();
        for (i, it) in self.iterations.iter().enumerate() {
            let (inj, skip) = it
                .refine
                .as_ref()
                .map_or((0, 0), |r| (r.injected.len(), r.skipped.len()));
            writeln!(
                out,
                "iteration {} states={} transitions={} realizable={} passed={}/{} misses={} injected={inj} skipped={skip}",
                i + 1,
                it.states,
                it.transitions,
                it.realizable(),
                it.passed(),
                it.verdicts.len(),
                it.misses()
            )
            .unwrap();
            for (r, v) in it.verdicts.iter().enumerate() {
                writeln!(out, "  run {r} {v}").unwrap();
            }
        }
        writeln!(out, "termination {}", self.termination).unwrap();
        out
    }

    pub fn first_states(&self) -> usize {
        self.iterations[0].states
    }
}

fn walk_oracle(cfg: &LoopConfig, tag: &str) -> Result<RandomWalkOracle, CosimError> {
    Ok(RandomWalkOracle::new(EqOracleConfig {
        rng_seed: derive_seed(cfg.seed, tag),
        ..cfg.oracle.clone()
    })?)
}

/// Seeds of the validation runs; shared by every iteration so that
/// successive strategies face the same sensor draws.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    derive_seed(seed, &format!("validate/{run}"))
}

/// Learns the driver, then alternates synthesis, validation and refinement
/// until every run passes, the model stops changing, the variant turns out
/// unrealizable, or the iteration cap is hit.
pub fn refine_loop(scenario: &Scenario, cfg: &LoopConfig) -> Result<RefinementReport, CosimError> {
    let params: DriverParams = scenario.driver.clone();
    let mut sul = DriverSul::new(params.clone());
    let mut session = Lstar::new(params.levels.levels());
    let mut oracle = walk_oracle(cfg, "learn")?;
    let rounds = cfg.initial_rounds.unwrap_or(cfg.round_cap);
    let outcome = session.run(&mut sul, &mut oracle, rounds)?;
    if outcome != RoundOutcome::Converged && cfg.initial_rounds.is_none() {
        return Err(crate::learner::LearnError::RoundCap(rounds).into());
    }

    let mut iterations: Vec<Iteration> = Vec::new();
    let max = cfg.max_iterations.max(1);
    let termination = loop {
        let machine: MealyMachine<Level, Response> = session.hypothesis().expect("learned").clone();
        let model = HumanModel::probe(&machine, &mut sul)?;
        let arena = build_arena(&model, scenario, cfg.variant)?;
        let w = solve(&arena);
        let stats = ArenaStats::new(&arena, &w);
        let mut it = Iteration {
            states: model.num_states(),
            transitions: model.machine().num_transitions(),
            learn: session.stats(),
            arena: stats.clone(),
            strategy: None,
            traces: Vec::new(),
            verdicts: Vec::new(),
            refine: None,
            model,
        };
        if !stats.realizable {
            iterations.push(it);
            break Termination::Unrealizable;
        }
        let strategy = extract_strategy(&arena, &w)?;
        drop(arena);
        for r in 0..cfg.runs {
            let mut driver = DriverSul::new(params.clone());
            let trace = execute(
                Policy::Strategy(&strategy),
                &it.model,
                &mut driver,
                scenario,
                scenario.sensor,
                run_seed(cfg.seed, r),
            )?;
            it.verdicts
                .push(monitor(&trace, scenario.initial.dest, &scenario.supervisor.thresholds));
            it.traces.push(trace);
        }
        it.strategy = Some(StrategyFile {
            scenario: scenario.fingerprint(),
            model: model_fingerprint(&it.model.machine_text(), &it.model.hints_text()),
            variant: cfg.variant,
            strategy,
        });
        if it.clean() {
            iterations.push(it);
            break Termination::AllPass;
        }
        if iterations.len() + 1 >= max {
            iterations.push(it);
            break Termination::MaxIterations;
        }
        let violating: Vec<(usize, &SimTrace)> = it
            .traces
            .iter()
            .zip(&it.verdicts)
            .enumerate()
            .filter(|(_, (t, v))| !v.passed() || t.misses() > 0)
            .map(|(i, (t, _))| (i, t))
            .collect();
        let before = machine.minimize().canonical();
        let mut oracle = walk_oracle(cfg, &format!("refine/{}", iterations.len()))?;
        let outcome = refine(&mut session, &violating, &mut sul, &mut oracle, cfg.round_cap)?;
        it.refine = Some(outcome);
        iterations.push(it);
        let after = session.hypothesis().expect("learned").minimize().canonical();
        if after == before {
            break Termination::Stable;
        }
    };
    Ok(RefinementReport {
        scenario: scenario.fingerprint(),
        config: cfg.clone(),
        iterations,
        termination,
    })
}
