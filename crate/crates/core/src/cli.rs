//! Command-line front end: `learn`, `synth`, `validate`, `refine` and `demo`.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 unrealizable, 3 failed
//! validation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::automata::to_dot;
use crate::cosim::{
    check_strategy, derive_seed, execute, monitor, refine_loop, run_seed, Iteration, LoopConfig, Policy,
    RefinementReport, SimTrace, Termination, Verdict, DEFAULT_MAX_ITERATIONS, DEFAULT_RUNS,
};
use crate::driver::DriverSul;
use crate::game::{build_arena, extract_strategy, model_fingerprint, solve, ArenaStats, StrategyFile};
use crate::hm::HumanModel;
use crate::learner::{learn, EqOracleConfig, LearnStats, RandomWalkOracle, DEFAULT_ROUND_CAP};
use crate::scenario::Scenario;
use crate::supervisor::Variant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNREALIZABLE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hcps-synth", version, about = "Learn a driver model, synthesize a supervisor, validate it in closed loop")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Learn the driver model (hm.mealy, hm.hints, hm.dot, learn_report).
    Learn(Common),
    /// Synthesize a strategy for a learned model (strategy.txt, arena_stats).
    Synth {
        #[command(flatten)]
        common: Common,
        /// Learned machine; hm.hints is read from the same directory.
        #[arg(long, default_value = "hm.mealy")]
        hm: PathBuf,
    },
    /// Run the strategy against the full driver (traces/*.csv, verdicts).
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "hm.mealy")]
        hm: PathBuf,
        #[arg(long, default_value = "strategy.txt")]
        strategy: PathBuf,
    },
    /// Learn, synthesize, validate and refine until the objectives hold.
    Refine(Common),
    /// One refinement loop narrated on the console.
    Demo(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "full")]
    pub variant: Variant,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    pub runs: usize,
    #[arg(long = "oracle-walks", default_value_t = EqOracleConfig::default().num_walks)]
    pub oracle_walks: usize,
    #[arg(long = "oracle-len", default_value_t = EqOracleConfig::default().max_walk_len)]
    pub oracle_len: usize,
    #[arg(long = "oracle-reset-prob", default_value_t = EqOracleConfig::default().reset_prob)]
    pub oracle_reset_prob: f64,
    /// Stop the initial learning after this many rounds (refine, demo).
    #[arg(long = "initial-rounds")]
    pub initial_rounds: Option<usize>,
}

impl Common {
    fn scenario(&self) -> anyhow::Result<Scenario> {
        match &self.scenario {
            Some(p) => Ok(Scenario::load(p)?),
            None => Ok(Scenario::default()),
        }
    }

    fn oracle(&self, tag: &str) -> EqOracleConfig {
        EqOracleConfig {
            num_walks: self.oracle_walks,
            max_walk_len: self.oracle_len,
            reset_prob: self.oracle_reset_prob,
            rng_seed: derive_seed(self.seed, tag),
        }
    }

    fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            variant: self.variant,
            runs: self.runs,
            max_iterations: self.max_iter,
            seed: self.seed,
            oracle: self.oracle("learn"),
            initial_rounds: self.initial_rounds,
            round_cap: DEFAULT_ROUND_CAP,
        }
    }

    fn out_dir(&self) -> anyhow::Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("cannot create {}", self.out.display()))?;
        Ok(&self.out)
    }
}

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(hm: &Path) -> anyhow::Result<HumanModel> {
    let hints = hm.with_file_name("hm.hints");
    Ok(HumanModel::parse(&read(hm)?, &read(&hints)?)?)
}

fn write_model(dir: &Path, hm: &HumanModel, stats: &LearnStats) -> anyhow::Result<()> {
    write(dir, "hm.mealy", &hm.machine_text())?;
    write(dir, "hm.hints", &hm.hints_text())?;
    write(dir, "hm.dot", &to_dot(hm.machine()))?;
    write(dir, "learn_report", &stats.report())
}

fn write_traces(dir: &Path, traces: &[SimTrace], verdicts: &[Verdict]) -> anyhow::Result<()> {
    let mut summary = String::new();
    for (i, (t, v)) in traces.iter().zip(verdicts).enumerate() {
        write(dir, &format!("traces/run-{i:03}.csv"), &t.to_csv())?;
        writeln!(summary, "run-{i:03} {v} misses={}", t.misses()).unwrap();
    }
    write(dir, "verdicts", &summary)
}

fn write_iteration(dir: &Path, it: &Iteration) -> anyhow::Result<()> {
    write_model(dir, &it.model, &it.learn)?;
    write(dir, "arena_stats", &it.arena.report())?;
    if let Some(s) = &it.strategy {
        write(dir, "strategy.txt", &s.to_text())?;
    }
    write_traces(dir, &it.traces, &it.verdicts)
}

fn cmd_learn(c: &Common) -> anyhow::Result<i32> {
    let scenario = c.scenario()?;
    let dir = c.out_dir()?;
    let mut sul = DriverSul::new(scenario.driver.clone());
    let mut oracle = RandomWalkOracle::new(c.oracle("learn"))?;
    let (machine, stats) = learn(&mut sul, scenario.driver.levels.levels(), &mut oracle, DEFAULT_ROUND_CAP)?;
    let hm = HumanModel::probe(&machine, &mut sul)?;
    write_model(dir, &hm, &stats)?;
    println!("learned {} states, {} transitions", hm.num_states(), hm.machine().num_transitions());
    Ok(EXIT_OK)
}

fn cmd_synth(c: &Common, hm_path: &Path) -> anyhow::Result<i32> {
    let scenario = c.scenario()?;
    let hm = load_model(hm_path)?;
    let dir = c.out_dir()?;
    let arena = build_arena(&hm, &scenario, c.variant)?;
    let w = solve(&arena);
    let stats = ArenaStats::new(&arena, &w);
    write(dir, "arena_stats", &stats.report())?;
    if !stats.realizable {
        println!("unrealizable: variant {} has no winning strategy", c.variant);
        return Ok(EXIT_UNREALIZABLE);
    }
    let file = StrategyFile {
        scenario: scenario.fingerprint(),
        model: model_fingerprint(&hm.machine_text(), &hm.hints_text()),
        variant: c.variant,
        strategy: extract_strategy(&arena, &w)?,
    };
    write(dir, "strategy.txt", &file.to_text())?;
    println!("realizable: {} winning states, {} strategy entries", stats.winning, file.strategy.len());
    Ok(EXIT_OK)
}

fn cmd_validate(c: &Common, hm_path: &Path, strategy_path: &Path) -> anyhow::Result<i32> {
    let scenario = c.scenario()?;
    let hm = load_model(hm_path)?;
    let file = StrategyFile::parse(&read(strategy_path)?)?;
    check_strategy(&file, &scenario, &hm)?;
    let dir = c.out_dir()?;
    if c.runs == 0 {
        eprintln!("warning: zero runs requested, nothing validated");
    }
    let mut traces = Vec::with_capacity(c.runs);
    let mut verdicts = Vec::with_capacity(c.runs);
    for r in 0..c.runs {
        let mut sul = DriverSul::new(scenario.driver.clone());
        let t = execute(
            Policy::Strategy(&file.strategy),
            &hm,
            &mut sul,
            &scenario,
            scenario.sensor,
            run_seed(c.seed, r),
        )?;
        verdicts.push(monitor(&t, scenario.initial.dest, &scenario.supervisor.thresholds));
        traces.push(t);
    }
    write_traces(dir, &traces, &verdicts)?;
    let passed = verdicts.iter().filter(|v| v.passed()).count();
    println!("{passed}/{} runs passed", verdicts.len());
    Ok(if passed == verdicts.len() { EXIT_OK } else { EXIT_VALIDATION })
}

fn loop_exit(report: &RefinementReport) -> i32 {
    match report.termination {
        Termination::AllPass => EXIT_OK,
        Termination::Unrealizable => EXIT_UNREALIZABLE,
        Termination::MaxIterations | Termination::Stable => EXIT_VALIDATION,
    }
}

fn cmd_refine(c: &Common) -> anyhow::Result<i32> {
    let scenario = c.scenario()?;
    let dir = c.out_dir()?;
    let report = refine_loop(&scenario, &c.loop_config())?;
    for (i, it) in report.iterations.iter().enumerate() {
        write_iteration(&dir.join(format!("iter-{:02}", i + 1)), it)?;
    }
    write(dir, "report", &report.to_text())?;
    println!(
        "{} iteration(s), termination {}",
        report.iterations.len(),
        report.termination
    );
    Ok(loop_exit(&report))
}

fn cmd_demo(c: &Common) -> anyhow::Result<i32> {
    let scenario = c.scenario()?;
    let report = refine_loop(&scenario, &c.loop_config())?;
    for (i, it) in report.iterations.iter().enumerate() {
        println!(
            "iteration {}: model {} states / {} transitions, arena {} states, realizable {}",
            i + 1,
            it.states,
            it.transitions,
            it.arena.states,
            it.realizable()
        );
        if it.realizable() {
            println!("  validation: {}/{} runs passed, {} model misses", it.passed(), it.verdicts.len(), it.misses());
        }
    }
    println!("termination: {}", report.termination);
    let last = report.iterations.last().expect("at least one iteration");
    if let Some(t) = last.traces.first() {
        println!("\nrun 0 of the last iteration ({}):", last.verdicts[0]);
        print!("{}", t.to_table());
    }
    Ok(loop_exit(&report))
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Learn(c) => cmd_learn(c),
        Command::Synth { common, hm } => cmd_synth(common, hm),
        Command::Validate { common, hm, strategy } => cmd_validate(common, hm, strategy),
        Command::Refine(c) => {
            if c.max_iter == 0 {
                bail!("--max-iter must be at least 1");
            }
            cmd_refine(c)
        }
        Command::Demo(c) => cmd_demo(c),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
