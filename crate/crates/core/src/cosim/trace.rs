use std::fmt::Write;

use crate::driver::{Level, RuleChain};
use crate::supervisor::{ControlAction, Mode};
use crate::vehicle::WorldState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// World at the start of the epoch.
    pub world: WorldState,
    pub thw: f64,
    pub ttc: f64,
    /// Level the sensor reported to the driver.
    pub perceived: Level,
    pub mode: Mode,
    pub driver_acc: i32,
    pub applied_acc: i32,
    pub action: ControlAction,
    pub chain: RuleChain,
    /// The strategy had no entry and the fallback policy acted.
    pub fallback: bool,
}

/// Something the run could not follow through the learned model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimEvent {
    /// The driver answered differently from the model.
    Divergence { row: usize, expected: Option<String>, observed: String },
    /// Model tracking moved to a state matching the observed step.
    Resync { row: usize, state: Option<usize> },
    /// No strategy entry for the current game state.
    StrategyMiss { row: usize, key: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
    /// World after the last row.
    pub final_world: WorldState,
    /// Epoch budget the run was given.
    pub horizon_steps: u32,
    pub events: Vec<SimEvent>,
}

pub const CSV_HEADER: &str =
    "t,lead_pos,follow_pos,lead_vel,follow_vel,thw,ttc,control_mode,driver_acc,follow_acc,controller_action";

fn num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.3}")
    }
}

impl SimTrace {
    pub fn stimuli(&self) -> Vec<Level> {
        self.rows.iter().map(|r| r.perceived).collect()
    }

    pub fn misses(&self) -> usize {
        self.events
            .iter()
            .filter(|e| !matches!(e, SimEvent::Resync { .. }))
            .count()
    }

    /// One line per epoch plus a closing line for the final world, whose
    /// control columns are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(96 * (self.rows.len() + 2));
        writeln!(out, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            let w = &r.world;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                num(r.t),
                num(w.lead.pos),
                num(w.follow.pos),
                num(w.lead.vel),
                num(w.follow.vel),
                num(r.thw),
                num(r.ttc),
                r.mode,
                r.driver_acc,
                r.applied_acc,
                r.action
            )
            .unwrap();
        }
        let w = &self.final_world;
        let (thw, ttc) = crate::cosim::headways(w);
        writeln!(
            out,
            "{},{},{},{},{},{},{},,,,",
            num(w.t),
            num(w.lead.pos),
            num(w.follow.pos),
            num(w.lead.vel),
            num(w.follow.vel),
            num(thw),
            num(ttc)
        )
        .unwrap();
        out
    }

    /// Fixed-width rendering in the spirit of a printed trace table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:>6} {:>9} {:>10} {:>6} {:>6} {:<13} {:>10} {:>10} {:<8}",
            "t", "lead_pos", "follow_pos", "thw", "ttc", "control_mode", "driver_acc", "follow_acc", "action"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:>6.1} {:>9.2} {:>10.2} {:>6} {:>6} {:<13} {:>10} {:>10} {:<8}",
                r.t,
                r.world.lead.pos,
                r.world.follow.pos,
                short(r.thw),
                short(r.ttc),
                r.mode.to_string(),
                r.driver_acc,
                r.applied_acc,
                r.action.to_string()
            )
            .unwrap();
        }
        out
    }
}

fn short(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.2}")
    }
}
