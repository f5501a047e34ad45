use std::fmt;
use std::str::FromStr;

use crate::driver::RuleChain;
use crate::supervisor::{safe_now, ControlAction, HazardThresholds, Mode};

use super::trace::SimTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    SafeAndReached,
    SafetyViolation,
    GoalNotReached,
    MinInterventionViolation,
    ResponseViolation,
}

impl Status {
    pub const ALL: [Status; 5] = [
        Status::SafeAndReached,
        Status::SafetyViolation,
        Status::GoalNotReached,
        Status::MinInterventionViolation,
        Status::ResponseViolation,
    ];

    pub fn passed(self) -> bool {
        self == Status::SafeAndReached
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::SafeAndReached => "safe-and-reached",
            Status::SafetyViolation => "safety-violation",
            Status::GoalNotReached => "goal-not-reached",
            Status::MinInterventionViolation => "min-intervention-violation",
            Status::ResponseViolation => "response-violation",
        })
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| format!("unknown verdict '{s}'"))
    }
}

/// Monitor outcome. The witness is a row index; `rows.len()` points at the
/// final world.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<usize>,
}

impl Verdict {
    pub const PASS: Verdict = Verdict {
        status: Status::SafeAndReached,
        witness: None,
    };

    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.witness {
            Some(i) => write!(f, "{} at {i}", self.status),
            None => write!(f, "{}", self.status),
        }
    }
}

/// Checks the objectives in priority order; the first failure wins.
///
/// * safety: the follower stays strictly behind the lead in every row and
///   in the final world;
/// * reachability: the final world is at or past `dest`;
/// * minimal intervention: no Intervention row while SafeNow holds;
/// * response: a hint is followed by a full deliberation in the next row.
pub fn monitor(trace: &SimTrace, dest: f64, thresholds: &HazardThresholds) -> Verdict {
    let fail = |status, i| Verdict {
        status,
        witness: Some(i),
    };
    let worlds = trace
        .rows
        .iter()
        .map(|r| r.world)
        .chain(std::iter::once(trace.final_world));
    if let Some(i) = worlds.clone().position(|w| w.follow.pos >= w.lead.pos) {
        return fail(Status::SafetyViolation, i);
    }
    if trace.final_world.follow.pos < dest {
        return fail(Status::GoalNotReached, trace.rows.len());
    }
    if let Some(i) = trace
        .rows
        .iter()
        .position(|r| r.mode == Mode::Intervention && safe_now(r.thw, r.ttc, thresholds))
    {
        return fail(Status::MinInterventionViolation, i);
    }
    let late = trace.rows.windows(2).position(|p| {
        p[0].action == ControlAction::Hint && p[1].chain != RuleChain::Full
    });
    if let Some(i) = late {
        return fail(Status::ResponseViolation, i);
    }
    Verdict::PASS
}
