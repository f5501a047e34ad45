//! Product arena of the learned driver, the vehicles, the sensor and the
//! supervisor, one round per decision epoch:
//! sensor (environment) → driver (model step) → controller → physics.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::automata::StateId;
use crate::driver::{Level, Response, RuleChain};
use crate::hm::HumanModel;
use crate::scenario::Scenario;
use crate::supervisor::{allowed_actions, arbitrate, assess, Mode, Variant};
use crate::vehicle::{compute_thw, quantize_thw, sensor_perturb, VehicleState, WorldState};

use super::{ArenaNode, Edge, GameArena, GameError, Player};

/// Which player moves next in a game state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Turn {
    /// Sensor picks the perceived level, then the driver answers.
    Environment,
    /// Supervisor picks an action; physics follows.
    Controller,
    /// Driver behaviour left the model (unknown re-deliberation target).
    Lost,
}

/// Follower kinematics on the lattice plus the epoch counter. The lead is a
/// function of the epoch and is not stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridWorld {
    pub step: u32,
    pub follow_pos: i64,
    pub follow_vel: i64,
}

/// Node key of the driving arena. Field order is the canonical key order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    pub turn: Turn,
    pub world: GridWorld,
    /// Model state; at controller turns, the state after the driver moved.
    pub driver: StateId,
    /// Mode chosen in the previous epoch.
    pub mode: Mode,
    /// A hint is pending for the next stimulus (environment turns).
    pub hinted: bool,
    /// Perceived level; 0 at environment turns.
    pub level: u8,
    /// Driver answer at controller turns.
    pub response: Option<Response>,
}

fn mode_code(m: Mode) -> char {
    match m {
        Mode::Nominal => 'N',
        Mode::Advisory => 'A',
        Mode::Intervention => 'I',
    }
}

impl fmt::Display for GameState {
    /// `turn/step/pos/vel/driver/mode/hinted/level/response`, e.g.
    /// `C/12/340/28/3/N/0/2/F-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let turn = match self.turn {
            Turn::Environment => 'E',
            Turn::Controller => 'C',
            Turn::Lost => 'L',
        };
        let resp = match self.response {
            None => "-".to_string(),
            Some(r) => format!(
                "{}{}",
                if r.chain == RuleChain::Full { 'F' } else { 'S' },
                r.acc
            ),
        };
        write!(
            f,
            "{turn}/{}/{}/{}/{}/{}/{}/{}/{resp}",
            self.world.step,
            self.world.follow_pos,
            self.world.follow_vel,
            self.driver,
            mode_code(self.mode),
            self.hinted as u8,
            self.level
        )
    }
}

impl FromStr for GameState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad state key '{s}'");
        let f: Vec<&str> = s.split('/').collect();
        let [turn, step, pos, vel, driver, mode, hinted, level, resp] = f[..] else {
            return Err(bad());
        };
        let turn = match turn {
            "E" => Turn::Environment,
            "C" => Turn::Controller,
            "L" => Turn::Lost,
            _ => return Err(bad()),
        };
        let mode = match mode {
            "N" => Mode::Nominal,
            "A" => Mode::Advisory,
            "I" => Mode::Intervention,
            _ => return Err(bad()),
        };
        let response = match resp {
            "-" => None,
            r => {
                let (chain, acc) = r.split_at(1);
                let chain = match chain {
                    "F" => RuleChain::Full,
                    "S" => RuleChain::Shortcut,
                    _ => return Err(bad()),
                };
                Some(Response {
                    chain,
                    acc: acc.parse().map_err(|_| bad())?,
                })
            }
        };
        Ok(Self {
            turn,
            world: GridWorld {
                step: step.parse().map_err(|_| bad())?,
                follow_pos: pos.parse().map_err(|_| bad())?,
                follow_vel: vel.parse().map_err(|_| bad())?,
            },
            driver: driver.parse().map_err(|_| bad())?,
            mode,
            hinted: match hinted {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            },
            level: level.parse().map_err(|_| bad())?,
            response,
        })
    }
}

pub type DriveArena = GameArena<GameState>;

/// Maps between continuous worlds and lattice states for one scenario.
#[derive(Clone, Debug)]
pub struct Lattice<'a> {
    scenario: &'a Scenario,
    leads: Vec<VehicleState>,
}

impl<'a> Lattice<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let mut leads = Vec::with_capacity(scenario.horizon_steps as usize + 1);
        let mut w = scenario.initial;
        leads.push(w.lead);
        for _ in 0..scenario.horizon_steps {
            w = scenario.dynamics.step_world(&w, 0.0, scenario.epoch);
            leads.push(w.lead);
        }
        Self { scenario, leads }
    }

    pub fn project(&self, w: &WorldState, step: u32) -> GridWorld {
        let g = &self.scenario.grid;
        GridWorld {
            step,
            follow_pos: g.pos_index(w.follow.pos),
            follow_vel: g.vel_index(w.follow.vel),
        }
    }

    pub fn world(&self, gw: &GridWorld) -> WorldState {
        let g = &self.scenario.grid;
        let s = self.scenario;
        WorldState {
            lead: self.leads[gw.step as usize],
            follow: VehicleState::new(g.pos(gw.follow_pos), g.vel(gw.follow_vel)),
            t: gw.step as f64 * s.epoch,
            dest: s.initial.dest,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.scenario.horizon_steps
    }
}

/// Builds the reachable product arena. Fails if the model's inputs are not
/// the scenario's headway levels or the arena outgrows `scenario.arena_cap`.
pub fn build_arena(hm: &HumanModel, scenario: &Scenario, variant: Variant) -> Result<DriveArena, GameError> {
    let levels = scenario.driver.levels.levels();
    let inputs = hm.machine().inputs();
    if inputs.len() != levels.len() || !levels.iter().all(|l| inputs.contains(l)) {
        return Err(GameError::AlphabetMismatch {
            model: inputs.len(),
            levels: levels.len(),
        });
    }
    let lattice = Lattice::new(scenario);
    let sup = &scenario.supervisor;
    let dt = scenario.epoch;

    let mut nodes: Vec<ArenaNode<GameState>> = Vec::new();
    let mut index: HashMap<GameState, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: GameState, nodes: &mut Vec<ArenaNode<GameState>>, queue: &mut VecDeque<usize>| -> Result<usize, GameError> {
        if let Some(&i) = index.get(&key) {
            return Ok(i);
        }
        if nodes.len() >= scenario.arena_cap {
            return Err(GameError::ArenaTooLarge {
                cap: scenario.arena_cap,
            });
        }
        let owner = match key.turn {
            Turn::Controller => Player::Controller,
            _ => Player::Environment,
        };
        nodes.push(ArenaNode::new(key, owner));
        index.insert(key, nodes.len() - 1);
        queue.push_back(nodes.len() - 1);
        Ok(nodes.len() - 1)
    };

    let start = GameState {
        turn: Turn::Environment,
        world: lattice.project(&scenario.initial, 0),
        driver: hm.initial(),
        mode: Mode::Nominal,
        hinted: false,
        level: 0,
        response: None,
    };
    let initial = intern(start, &mut nodes, &mut queue)?;

    while let Some(i) = queue.pop_front() {
        let key = nodes[i].key;
        let w = lattice.world(&key.world);
        match key.turn {
            Turn::Lost => {
                nodes[i].bad = true;
            }
            Turn::Environment => {
                // Arriving by overtaking is a collision, not an arrival.
                nodes[i].bad = w.overtaken();
                nodes[i].goal = w.arrived() && !nodes[i].bad;
                if nodes[i].goal || nodes[i].bad || key.world.step >= lattice.horizon() {
                    continue;
                }
                let thw = compute_thw(&w).expect("not overtaken");
                let true_level = quantize_thw(thw, &scenario.driver.levels);
                let mut edges = Vec::new();
                for l in sensor_perturb(true_level, scenario.sensor, levels.len()) {
                    let step = hm.step(key.driver, l, key.hinted)?;
                    let (target, full) = match step {
                        Some((Some(q), resp)) => (
                            GameState {
                                turn: Turn::Controller,
                                driver: q,
                                hinted: false,
                                level: l.0,
                                response: Some(resp),
                                ..key
                            },
                            resp.chain == RuleChain::Full,
                        ),
                        lost => (
                            GameState {
                                turn: Turn::Lost,
                                level: l.0,
                                hinted: false,
                                response: lost.map(|(_, r)| r),
                                ..key
                            },
                            true,
                        ),
                    };
                    edges.push(Edge::sensor(l, intern(target, &mut nodes, &mut queue)?, full));
                }
                nodes[i].edges = edges;
            }
            Turn::Controller => {
                let resp = key.response.expect("controller states carry the driver answer");
                let risk = assess(&w, resp.acc, sup, &scenario.dynamics, dt);
                nodes[i].calm = risk.safe && !risk.warn;
                let mut edges = Vec::new();
                for a in allowed_actions(key.mode, risk, variant) {
                    let (applied, _) = arbitrate(a.mode(), resp.acc, sup);
                    let next = scenario.dynamics.step_world(&w, applied as f64, dt);
                    let target = GameState {
                        turn: Turn::Environment,
                        world: lattice.project(&next, key.world.step + 1),
                        driver: key.driver,
                        mode: a.mode(),
                        hinted: a == crate::supervisor::ControlAction::Hint,
                        level: 0,
                        response: None,
                    };
                    let dev = (applied - resp.acc).unsigned_abs();
                    edges.push(Edge::control(a, intern(target, &mut nodes, &mut queue)?, dev));
                }
                nodes[i].edges = edges;
            }
        }
    }
    Ok(GameArena::from_parts_unchecked(nodes, index, initial))
}

/// Perceived level of a world for a given true level choice; exposed for
/// simulation so both sides quantise identically.
pub fn true_level(w: &WorldState, scenario: &Scenario) -> Option<Level> {
    compute_thw(w).ok().map(|thw| quantize_thw(thw, &scenario.driver.levels))
}
