//! Scenario files: initial world, lead profile, sensor noise, supervisor
//! thresholds, driver parameters and game limits in one `key = value` file.
//!
//! ```text
//! lead_pos = 30
//! follow_vel = 15
//! segment 0 0
//! segment 5 -2
//! segment 8 0
//! ```

use std::fmt::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::{ConfigError, ConfigFile};
use crate::driver::DriverParams;
use crate::supervisor::SupervisorConfig;
use crate::vehicle::{Dynamics, GridSpec, LeadProfile, SensorErrorModel, VehicleState, WorldState};

pub const DEFAULT_ARENA_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub initial: WorldState,
    pub dynamics: Dynamics,
    /// Decision epoch (s).
    pub epoch: f64,
    /// Epoch budget for reaching the destination.
    pub horizon_steps: u32,
    pub sensor: SensorErrorModel,
    pub grid: GridSpec,
    pub supervisor: SupervisorConfig,
    pub driver: DriverParams,
    pub arena_cap: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            initial: WorldState {
                lead: VehicleState::new(30.0, 12.0),
                follow: VehicleState::new(0.0, 15.0),
                t: 0.0,
                dest: 100.0,
            },
            dynamics: Dynamics {
                profile: LeadProfile::new(vec![(0.0, 0.0), (5.0, -2.0), (8.0, 0.0)]).expect("valid"),
                v_max: Dynamics::DEFAULT_V_MAX,
            },
            epoch: 0.5,
            horizon_steps: 120,
            sensor: SensorErrorModel { max_level_offset: 1 },
            grid: GridSpec::default(),
            supervisor: SupervisorConfig::default(),
            driver: DriverParams::default(),
            arena_cap: DEFAULT_ARENA_CAP,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let d = Self::default();
        let mut cfg = ConfigFile::parse(text)?;
        let mut segments = Vec::new();
        for (line, args) in cfg.take_directives("segment") {
            let parsed = match args[..] {
                [ref t, ref a] => t.parse::<f64>().ok().zip(a.parse::<f64>().ok()),
                _ => None,
            };
            segments.push(parsed.ok_or(ConfigError::Syntax {
                line,
                message: "expected 'segment <start_s> <acc>'".into(),
            })?);
        }
        let profile = if segments.is_empty() {
            d.dynamics.profile.clone()
        } else {
            LeadProfile::new(segments).map_err(|e| invalid(e.to_string()))?
        };
        let horizon: f64 = cfg.take("horizon")?.unwrap_or(d.horizon_steps as f64 * d.epoch);
        let epoch: f64 = cfg.take("epoch")?.unwrap_or(d.epoch);
        let s = Self {
            initial: WorldState {
                lead: VehicleState::new(
                    cfg.take("lead_pos")?.unwrap_or(d.initial.lead.pos),
                    cfg.take("lead_vel")?.unwrap_or(d.initial.lead.vel),
                ),
                follow: VehicleState::new(
                    cfg.take("follow_pos")?.unwrap_or(d.initial.follow.pos),
                    cfg.take("follow_vel")?.unwrap_or(d.initial.follow.vel),
                ),
                t: 0.0,
                dest: cfg.take("dest")?.unwrap_or(d.initial.dest),
            },
            dynamics: Dynamics {
                profile,
                v_max: cfg.take("v_max")?.unwrap_or(d.dynamics.v_max),
            },
            epoch,
            horizon_steps: if epoch > 0.0 { (horizon / epoch).round() as u32 } else { 0 },
            sensor: SensorErrorModel {
                max_level_offset: cfg.take("sensor_offset")?.unwrap_or(d.sensor.max_level_offset),
            },
            grid: GridSpec {
                pos_res: cfg.take("grid_pos")?.unwrap_or(d.grid.pos_res),
                vel_res: cfg.take("grid_vel")?.unwrap_or(d.grid.vel_res),
            },
            supervisor: SupervisorConfig::from_config(&mut cfg)?,
            driver: DriverParams::from_config(&mut cfg)?,
            arena_cap: cfg.take("arena_cap")?.unwrap_or(d.arena_cap),
        };
        cfg.finish()?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let w = &self.initial;
        // Written so that NaN is rejected too.
        if self.epoch.is_nan() || self.epoch <= 0.0 {
            return Err(invalid("epoch must be positive"));
        }
        if w.gap() <= 0.0 {
            return Err(invalid("lead must start ahead of the follower"));
        }
        if w.lead.vel < 0.0 || w.follow.vel < 0.0 || self.dynamics.v_max.is_nan() || self.dynamics.v_max <= 0.0 {
            return Err(invalid("velocities must be non-negative and v_max positive"));
        }
        if !(self.grid.pos_res > 0.0 && self.grid.vel_res > 0.0) {
            return Err(invalid("grid resolutions must be positive"));
        }
        if self.arena_cap == 0 {
            return Err(invalid("arena_cap must be positive"));
        }
        self.supervisor.validate()?;
        self.driver.validate()
    }

    /// Canonical `key = value` rendering; parses back to an equal scenario.
    pub fn to_text(&self) -> String {
        let w = &self.initial;
        let th = &self.supervisor.thresholds;
        let d = &self.driver;
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("lead_pos", w.lead.pos.to_string());
        kv("lead_vel", w.lead.vel.to_string());
        kv("follow_pos", w.follow.pos.to_string());
        kv("follow_vel", w.follow.vel.to_string());
        kv("dest", w.dest.to_string());
        kv("v_max", self.dynamics.v_max.to_string());
        kv("epoch", self.epoch.to_string());
        kv("horizon", (self.horizon_steps as f64 * self.epoch).to_string());
        kv("sensor_offset", self.sensor.max_level_offset.to_string());
        kv("grid_pos", self.grid.pos_res.to_string());
        kv("grid_vel", self.grid.vel_res.to_string());
        kv("arena_cap", self.arena_cap.to_string());
        kv("thw_warn", th.thw_warn.to_string());
        kv("ttc_warn", th.ttc_warn.to_string());
        kv("thw_min", th.thw_min.to_string());
        kv("ttc_min", th.ttc_min.to_string());
        kv("thw_safe", th.thw_safe.to_string());
        kv("ttc_safe", th.ttc_safe.to_string());
        kv("acc_floor", self.supervisor.acc_floor.to_string());
        kv("acc_cap", self.supervisor.acc_cap.to_string());
        kv("lookahead_steps", self.supervisor.lookahead_steps.to_string());
        kv("k1", d.k1.to_string());
        kv("k2", d.k2.to_string());
        kv("thw_follow", d.thw_follow.to_string());
        kv("decision_epoch", d.decision_epoch.to_string());
        kv(
            "acc_set",
            d.acc_set.iter().map(i32::to_string).collect::<Vec<_>>().join(","),
        );
        kv("thw_bounds", list(&d.levels.bounds));
        kv("thw_representatives", list(&d.levels.representatives));
        for &(t, a) in self.dynamics.profile.segments() {
            writeln!(out, "segment {t} {a}").unwrap();
        }
        out
    }

    /// SHA-256 of the canonical rendering, used to pair strategies with the
    /// scenario they were synthesized for.
    pub fn fingerprint(&self) -> String {
        hex_digest(self.to_text().as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
