//! Reference cognitive driver used as the system under learning.
//!
//! Each stimulus is a quantised time-headway level. A new level triggers a
//! full deliberation (attend, read, encode, retrieve, decide) that updates the
//! acceleration with the adapted Salvucci law; a repeated level takes the
//! short retrieval path (attend, read, encode, n_ret) and reuses the cached
//! decision.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::automata::MealyMachine;
use crate::config::{ConfigError, ConfigFile};
use crate::learner::{Sul, SulError};

/// 1-based quantised time-headway level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level(pub u8);

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<u8>() {
            Ok(n) if n >= 1 => Ok(Level(n)),
            _ => Err(format!("bad level '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleLabel {
    Attend,
    Read,
    Encode,
    Retrieve,
    NRet,
    Decide,
}

impl RuleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleLabel::Attend => "attend",
            RuleLabel::Read => "read",
            RuleLabel::Encode => "encode",
            RuleLabel::Retrieve => "retrieve",
            RuleLabel::NRet => "n_ret",
            RuleLabel::Decide => "decide",
        }
    }
}

/// The two production-rule chains the driver can fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleChain {
    /// attend, read, encode, retrieve, decide
    Full,
    /// attend, read, encode, n_ret
    Shortcut,
}

const FULL_CHAIN: [RuleLabel; 5] = [
    RuleLabel::Attend,
    RuleLabel::Read,
    RuleLabel::Encode,
    RuleLabel::Retrieve,
    RuleLabel::Decide,
];
const SHORT_CHAIN: [RuleLabel; 4] = [
    RuleLabel::Attend,
    RuleLabel::Read,
    RuleLabel::Encode,
    RuleLabel::NRet,
];

impl RuleChain {
    pub fn labels(self) -> &'static [RuleLabel] {
        match self {
            RuleChain::Full => &FULL_CHAIN,
            RuleChain::Shortcut => &SHORT_CHAIN,
        }
    }

    fn text(self) -> String {
        self.labels()
            .iter()
            .map(|l| l.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Output symbol: fired rule chain plus the decided acceleration (m/s²).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Response {
    pub chain: RuleChain,
    pub acc: i32,
}

impl Response {
    pub fn full(acc: i32) -> Self {
        Self {
            chain: RuleChain::Full,
            acc,
        }
    }

    pub fn shortcut(acc: i32) -> Self {
        Self {
            chain: RuleChain::Shortcut,
            acc,
        }
    }

    /// Same decision reported through a full deliberation.
    pub fn redeliberated(self) -> Self {
        Self::full(self.acc)
    }

    /// Python-tuple rendering as it appears in observation-table dumps,
    /// e.g. `(('attend','read','encode','n_ret'), -2)`.
    pub fn tuple_repr(&self) -> String {
        let labels: Vec<String> = self
            .chain
            .labels()
            .iter()
            .map(|l| format!("'{}'", l.as_str()))
            .collect();
        format!("(({}), {})", labels.join(","), self.acc)
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain.text(), self.acc)
    }
}

impl FromStr for Response {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (chain, acc) = s.rsplit_once(':').ok_or_else(|| format!("bad response '{s}'"))?;
        let acc = acc.parse().map_err(|_| format!("bad acceleration in '{s}'"))?;
        let chain = if chain == RuleChain::Full.text() {
            RuleChain::Full
        } else if chain == RuleChain::Shortcut.text() {
            RuleChain::Shortcut
        } else {
            return Err(format!("unknown rule chain '{chain}'"));
        };
        Ok(Self { chain, acc })
    }
}

/// Quantisation of time headway into stimulus levels.
#[derive(Clone, Debug, PartialEq)]
pub struct ThwLevels {
    /// Strictly increasing bin boundaries; bins are half-open `[lo, hi)`.
    pub bounds: Vec<f64>,
    /// One representative headway per level.
    pub representatives: Vec<f64>,
}

impl ThwLevels {
    pub fn count(&self) -> usize {
        self.bounds.len() + 1
    }

    pub fn levels(&self) -> Vec<Level> {
        (1..=self.count() as u8).map(Level).collect()
    }

    /// Level of a headway; `+∞` maps to the top level.
    pub fn quantize(&self, thw: f64) -> Level {
        Level(self.bounds.iter().filter(|&&b| thw >= b).count() as u8 + 1)
    }

    pub fn representative(&self, level: Level) -> Option<f64> {
        (level.0 as usize)
            .checked_sub(1)
            .and_then(|i| self.representatives.get(i))
            .copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriverParams {
    /// Gain on headway change (1/s²).
    pub k1: f64,
    /// Gain on headway error rate (1/s³).
    pub k2: f64,
    /// Desired time headway (s).
    pub thw_follow: f64,
    /// Time between stimuli (s).
    pub decision_epoch: f64,
    /// Admissible accelerations (m/s²), sorted.
    pub acc_set: Vec<i32>,
    pub levels: ThwLevels,
}

impl Default for DriverParams {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 0.5,
            thw_follow: 2.0,
            decision_epoch: 0.5,
            acc_set: vec![-3, -2, -1, 0, 1, 2],
            levels: ThwLevels {
                bounds: vec![1.0, 2.0, 3.0],
                representatives: vec![0.5, 1.5, 2.5, 3.5],
            },
        }
    }
}

impl DriverParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return bad("k1 and k2 must be positive");
        }
        if !(self.thw_follow > 0.0 && self.decision_epoch > 0.0) {
            return bad("thw_follow and decision_epoch must be positive");
        }
        if self.acc_set.is_empty()
            || !self.acc_set.windows(2).all(|w| w[0] < w[1])
            || !self.acc_set.contains(&0)
        {
            return bad("acc_set must be non-empty, strictly increasing and contain 0");
        }
        let lv = &self.levels;
        if !lv.bounds.windows(2).all(|w| w[0] < w[1]) {
            return bad("thw_bounds must be strictly increasing");
        }
        if lv.representatives.len() != lv.count() || lv.count() > u8::MAX as usize {
            return bad("need exactly one representative per level");
        }
        for (i, &r) in lv.representatives.iter().enumerate() {
            if lv.quantize(r) != Level(i as u8 + 1) {
                return bad("each representative must fall into its own level");
            }
        }
        Ok(())
    }

    /// Reads the driver keys from a configuration, leaving other keys alone.
    pub fn from_config(cfg: &mut ConfigFile) -> Result<Self, ConfigError> {
        let d = Self::default();
        let p = Self {
            k1: cfg.take("k1")?.unwrap_or(d.k1),
            k2: cfg.take("k2")?.unwrap_or(d.k2),
            thw_follow: cfg.take("thw_follow")?.unwrap_or(d.thw_follow),
            decision_epoch: cfg.take("decision_epoch")?.unwrap_or(d.decision_epoch),
            acc_set: cfg.take_list("acc_set")?.unwrap_or(d.acc_set),
            levels: ThwLevels {
                bounds: cfg.take_list("thw_bounds")?.unwrap_or(d.levels.bounds),
                representatives: cfg
                    .take_list("thw_representatives")?
                    .unwrap_or(d.levels.representatives),
            },
        };
        p.validate()?;
        Ok(p)
    }

    /// Member of `acc_set` nearest to `x`; ties go toward zero.
    pub fn nearest_acc(&self, x: f64) -> i32 {
        *self
            .acc_set
            .iter()
            .min_by(|&&a, &&b| {
                let da = (a as f64 - x).abs();
                let db = (b as f64 - x).abs();
                da.total_cmp(&db).then(a.abs().cmp(&b.abs()))
            })
            .expect("validated non-empty")
    }
}

impl FromStr for DriverParams {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = ConfigFile::parse(s)?;
        let p = Self::from_config(&mut cfg)?;
        cfg.finish()?;
        Ok(p)
    }
}

/// Adapted Salvucci law: `Δa = k1·(thw − prev_thw) + k2·(thw − thw_follow)·dt`,
/// snapped to the nearest admissible acceleration.
pub fn decide_acceleration(thw: f64, prev_thw: f64, dt: f64, params: &DriverParams, prev_acc: i32) -> i32 {
    let delta = params.k1 * (thw - prev_thw) + params.k2 * (thw - params.thw_follow) * dt;
    params.nearest_acc(prev_acc as f64 + delta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriverState {
    pub last_level: Option<Level>,
    pub last_acc: i32,
    pub last_thw: f64,
}

#[derive(Clone, Debug)]
pub struct DriverSul {
    params: DriverParams,
    state: DriverState,
}

impl DriverSul {
    pub fn new(params: DriverParams) -> Self {
        let state = Self::initial_state(&params);
        Self { params, state }
    }

    fn initial_state(params: &DriverParams) -> DriverState {
        DriverState {
            last_level: None,
            last_acc: 0,
            last_thw: params.thw_follow,
        }
    }

    pub fn params(&self) -> &DriverParams {
        &self.params
    }

    pub fn state(&self) -> &DriverState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = Self::initial_state(&self.params);
    }

    pub fn query(&mut self, level: Level) -> Result<Response, SulError> {
        let thw = self
            .params
            .levels
            .representative(level)
            .ok_or_else(|| SulError::RejectedInput(level.to_string()))?;
        let st = &mut self.state;
        let resp = if st.last_level == Some(level) {
            Response::shortcut(st.last_acc)
        } else {
            let acc = decide_acceleration(thw, st.last_thw, self.params.decision_epoch, &self.params, st.last_acc);
            Response::full(acc)
        };
        st.last_level = Some(level);
        st.last_acc = resp.acc;
        st.last_thw = thw;
        Ok(resp)
    }

    /// Forces the next query to deliberate in full, even on a repeated stimulus.
    pub fn apply_hint(&mut self) {
        self.state.last_level = None;
    }
}

impl Sul for DriverSul {
    type Input = Level;
    type Output = Response;

    fn reset(&mut self) {
        DriverSul::reset(self)
    }

    fn step(&mut self, input: &Level) -> Result<Response, SulError> {
        self.query(*input)
    }
}

/// Explicit Mealy machine over the reachable `(last_level, last_acc)` states
/// of the reference driver, enumerated breadth-first from reset. This is the
/// exact target the learner should converge to (after minimisation).
pub fn explicit_machine(params: &DriverParams) -> MealyMachine<Level, Response> {
    type Key = (Option<Level>, i32);
    let levels = params.levels.levels();
    let key = |s: &DriverState| -> Key { (s.last_level, s.last_acc) };

    let mut sul = DriverSul::new(params.clone());
    let start = sul.state().clone();
    let mut ids: HashMap<Key, usize> = HashMap::from([(key(&start), 0)]);
    let mut states = vec![start];
    let mut rows: Vec<Vec<(usize, Response)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let mut row = Vec::with_capacity(levels.len());
        for &l in &levels {
            sul.state = states[id].clone();
            let out = sul.query(l).expect("levels come from params");
            let k = key(sul.state());
            let dst = *ids.entry(k).or_insert_with(|| {
                states.push(sul.state().clone());
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            row.push((dst, out));
        }
        if rows.len() <= id {
            rows.resize(id + 1, Vec::new());
        }
        rows[id] = row;
    }
    MealyMachine::new(levels, 0, rows).expect("enumerated machine is complete")
}
