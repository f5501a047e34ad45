//! Discrete-time longitudinal car-following world.

use crate::driver::{Level, ThwLevels};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("vehicles overlap: gap {gap:.3} m")]
    Collision { gap: f64 },

    #[error("bad lead profile: {0}")]
    BadProfile(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleState {
    /// m
    pub pos: f64,
    /// m/s
    pub vel: f64,
    /// m/s²
    pub acc: f64,
}

impl VehicleState {
    pub fn new(pos: f64, vel: f64) -> Self {
        Self { pos, vel, acc: 0.0 }
    }

    /// Explicit Euler: position advances with the old velocity.
    fn advance(self, acc: f64, dt: f64, v_max: f64) -> Self {
        Self {
            pos: self.pos + self.vel * dt,
            vel: (self.vel + acc * dt).clamp(0.0, v_max),
            acc,
        }
    }
}

/// Piecewise-constant lead acceleration as `(start_time, acc)` segments.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadProfile {
    segments: Vec<(f64, f64)>,
}

impl LeadProfile {
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self, VehicleError> {
        match segments.first() {
            None => return Err(VehicleError::BadProfile("no segments")),
            Some(&(t0, _)) if t0 != 0.0 => return Err(VehicleError::BadProfile("first segment must start at 0")),
            _ => {}
        }
        if !segments.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(VehicleError::BadProfile("segment start times must increase"));
        }
        Ok(Self { segments })
    }

    pub fn constant(acc: f64) -> Self {
        Self {
            segments: vec![(0.0, acc)],
        }
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn acc_at(&self, t: f64) -> f64 {
        // Small tolerance so that accumulated epochs land on segment starts.
        self.segments
            .iter()
            .rev()
            .find(|&&(start, _)| t + 1e-9 >= start)
            .map_or(0.0, |&(_, a)| a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldState {
    pub lead: VehicleState,
    pub follow: VehicleState,
    /// s
    pub t: f64,
    /// Destination of the follower (m).
    pub dest: f64,
}

impl WorldState {
    pub fn gap(&self) -> f64 {
        self.lead.pos - self.follow.pos
    }

    pub fn overtaken(&self) -> bool {
        self.follow.pos >= self.lead.pos
    }

    pub fn arrived(&self) -> bool {
        self.follow.pos >= self.dest
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dynamics {
    pub profile: LeadProfile,
    /// m/s
    pub v_max: f64,
}

impl Dynamics {
    pub const DEFAULT_V_MAX: f64 = 40.0;

    pub fn step_world(&self, w: &WorldState, follow_acc: f64, dt: f64) -> WorldState {
        step_world(w, self.profile.acc_at(w.t), follow_acc, dt, self.v_max)
    }
}

/// One epoch of both vehicles; velocities are clamped to `[0, v_max]`.
pub fn step_world(w: &WorldState, lead_acc: f64, follow_acc: f64, dt: f64, v_max: f64) -> WorldState {
    WorldState {
        lead: w.lead.advance(lead_acc, dt, v_max),
        follow: w.follow.advance(follow_acc, dt, v_max),
        t: w.t + dt,
        dest: w.dest,
    }
}

/// Time headway in seconds, `+∞` for a stationary follower.
pub fn compute_thw(w: &WorldState) -> Result<f64, VehicleError> {
    let gap = w.gap();
    if gap < 0.0 {
        return Err(VehicleError::Collision { gap });
    }
    Ok(if w.follow.vel > 0.0 {
        gap / w.follow.vel
    } else {
        f64::INFINITY
    })
}

/// Time to collision in seconds, `+∞` unless the follower is closing in.
pub fn compute_ttc(w: &WorldState) -> Result<f64, VehicleError> {
    let gap = w.gap();
    if gap < 0.0 {
        return Err(VehicleError::Collision { gap });
    }
    let closing = w.follow.vel - w.lead.vel;
    Ok(if closing > 0.0 { gap / closing } else { f64::INFINITY })
}

pub fn quantize_thw(thw: f64, levels: &ThwLevels) -> Level {
    levels.quantize(thw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SensorErrorModel {
    pub max_level_offset: u8,
}

/// Every level the sensor may report for a true `level`, in ascending order.
pub fn sensor_perturb(level: Level, model: SensorErrorModel, level_count: usize) -> Vec<Level> {
    let top = level_count as i32;
    let d = model.max_level_offset as i32;
    let lo = (level.0 as i32 - d).max(1);
    let hi = (level.0 as i32 + d).min(top);
    (lo..=hi).map(|l| Level(l as u8)).collect()
}

/// Lattice used to keep the game arena finite. With the default 0.25 m /
/// 0.5 m/s resolution and integer accelerations over 0.5 s epochs the
/// lattice is closed under `step_world`, so snapping is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub pos_res: f64,
    pub vel_res: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            pos_res: 0.25,
            vel_res: 0.5,
        }
    }
}

impl GridSpec {
    pub fn pos_index(&self, pos: f64) -> i64 {
        (pos / self.pos_res).round() as i64
    }

    pub fn vel_index(&self, vel: f64) -> i64 {
        (vel / self.vel_res).round() as i64
    }

    pub fn pos(&self, idx: i64) -> f64 {
        idx as f64 * self.pos_res
    }

    pub fn vel(&self, idx: i64) -> f64 {
        idx as f64 * self.vel_res
    }

    /// True when every epoch maps lattice points to lattice points.
    pub fn is_exact_for(&self, dt: f64, accs: &[i32]) -> bool {
        let whole = |x: f64| (x - x.round()).abs() < 1e-9;
        whole(self.vel_res * dt / self.pos_res) && accs.iter().all(|&a| whole(a as f64 * dt / self.vel_res))
    }
}
