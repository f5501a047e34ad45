//! Three-mode shared-control supervisor: hazard predicates, mode switching
//! with hysteresis, and acceleration arbitration.

use std::fmt;
use std::str::FromStr;

use crate::config::{ConfigError, ConfigFile};
use crate::vehicle::{compute_thw, compute_ttc, Dynamics, WorldState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HazardThresholds {
    pub thw_warn: f64,
    pub ttc_warn: f64,
    pub thw_min: f64,
    pub ttc_min: f64,
    pub thw_safe: f64,
    pub ttc_safe: f64,
}

impl Default for HazardThresholds {
    fn default() -> Self {
        Self {
            thw_warn: 1.5,
            ttc_warn: 2.0,
            thw_min: 0.8,
            ttc_min: 1.0,
            thw_safe: 2.0,
            ttc_safe: 3.0,
        }
    }
}

impl HazardThresholds {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let nested = self.thw_min < self.thw_warn
            && self.thw_warn <= self.thw_safe
            && self.ttc_min < self.ttc_warn
            && self.ttc_warn <= self.ttc_safe;
        if nested {
            Ok(())
        } else {
            Err(ConfigError::Invalid(
                "thresholds must satisfy min < warn <= safe for both thw and ttc".into(),
            ))
        }
    }
}

pub fn risk_warn(thw: f64, ttc: f64, th: &HazardThresholds) -> bool {
    thw < th.thw_warn || ttc < th.ttc_warn
}

pub fn risk_filter(thw: f64, ttc: f64, th: &HazardThresholds) -> bool {
    thw < th.thw_min || ttc < th.ttc_min
}

pub fn safe_now(thw: f64, ttc: f64, th: &HazardThresholds) -> bool {
    thw >= th.thw_safe && ttc >= th.ttc_safe
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Nominal,
    Advisory,
    Intervention,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Nominal, Mode::Advisory, Mode::Intervention];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Nominal => "Nominal",
            Mode::Advisory => "Advisory",
            Mode::Intervention => "Intervention",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

/// Controllable actions. Each action selects the matching mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlAction {
    None,
    Hint,
    Override,
}

impl ControlAction {
    pub const ALL: [ControlAction; 3] = [ControlAction::None, ControlAction::Hint, ControlAction::Override];

    pub fn mode(self) -> Mode {
        match self {
            ControlAction::None => Mode::Nominal,
            ControlAction::Hint => Mode::Advisory,
            ControlAction::Override => Mode::Intervention,
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Nominal => ControlAction::None,
            Mode::Advisory => ControlAction::Hint,
            Mode::Intervention => ControlAction::Override,
        }
    }

    /// Intervention severity: none < hint < override.
    pub fn severity(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for ControlAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlAction::None => "none",
            ControlAction::Hint => "hint",
            ControlAction::Override => "override",
        })
    }
}

impl FromStr for ControlAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ControlAction::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| format!("unknown action '{s}'"))
    }
}

/// Controllable action set of an automation design variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// none, hint, override
    Full,
    /// none, hint
    NoOverride,
    /// hint only; Advisory is always available.
    AdvisoryOnly,
}

impl Variant {
    pub fn allows(self, a: ControlAction) -> bool {
        match self {
            Variant::Full => true,
            Variant::NoOverride => a != ControlAction::Override,
            Variant::AdvisoryOnly => a == ControlAction::Hint,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::NoOverride => "no-override",
            Variant::AdvisoryOnly => "advisory-only",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Variant::Full),
            "no-override" => Ok(Variant::NoOverride),
            "advisory-only" => Ok(Variant::AdvisoryOnly),
            _ => Err(format!("unknown variant '{s}' (expected full, no-override or advisory-only)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupervisorConfig {
    pub thresholds: HazardThresholds,
    pub acc_floor: i32,
    pub acc_cap: i32,
    pub lookahead_steps: u8,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            thresholds: HazardThresholds::default(),
            acc_floor: -3,
            acc_cap: -1,
            lookahead_steps: 2,
        }
    }
}

impl SupervisorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate()?;
        if !(self.acc_floor <= self.acc_cap && self.acc_cap < 0) {
            return Err(ConfigError::Invalid("need acc_floor <= acc_cap < 0".into()));
        }
        if !(1..=2).contains(&self.lookahead_steps) {
            return Err(ConfigError::Invalid("lookahead_steps must be 1 or 2".into()));
        }
        Ok(())
    }

    pub fn from_config(cfg: &mut ConfigFile) -> Result<Self, ConfigError> {
        let d = Self::default();
        let t = d.thresholds;
        let s = Self {
            thresholds: HazardThresholds {
                thw_warn: cfg.take("thw_warn")?.unwrap_or(t.thw_warn),
                ttc_warn: cfg.take("ttc_warn")?.unwrap_or(t.ttc_warn),
                thw_min: cfg.take("thw_min")?.unwrap_or(t.thw_min),
                ttc_min: cfg.take("ttc_min")?.unwrap_or(t.ttc_min),
                thw_safe: cfg.take("thw_safe")?.unwrap_or(t.thw_safe),
                ttc_safe: cfg.take("ttc_safe")?.unwrap_or(t.ttc_safe),
            },
            acc_floor: cfg.take("acc_floor")?.unwrap_or(d.acc_floor),
            acc_cap: cfg.take("acc_cap")?.unwrap_or(d.acc_cap),
            lookahead_steps: cfg.take("lookahead_steps")?.unwrap_or(d.lookahead_steps),
        };
        s.validate()?;
        Ok(s)
    }
}

/// Hazard flags for one decision point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Risk {
    pub warn: bool,
    pub filter: bool,
    pub safe: bool,
}

/// Evaluates warn/filter over the current state and `lookahead_steps`
/// predicted epochs under `driver_acc`. An overlap counts as a filter hit.
pub fn predict_risk(w: &WorldState, driver_acc: i32, cfg: &SupervisorConfig, dynamics: &Dynamics, dt: f64) -> (bool, bool) {
    let th = &cfg.thresholds;
    let mut warn = false;
    let mut filter = false;
    let mut cur = *w;
    for i in 0..=cfg.lookahead_steps {
        if i > 0 {
            cur = dynamics.step_world(&cur, driver_acc as f64, dt);
        }
        match (compute_thw(&cur), compute_ttc(&cur)) {
            (Ok(thw), Ok(ttc)) => {
                warn |= risk_warn(thw, ttc, th);
                filter |= risk_filter(thw, ttc, th);
            }
            _ => return (true, true),
        }
    }
    (warn, filter)
}

/// Full assessment: predicted warn/filter plus current SafeNow.
pub fn assess(w: &WorldState, driver_acc: i32, cfg: &SupervisorConfig, dynamics: &Dynamics, dt: f64) -> Risk {
    let (warn, filter) = predict_risk(w, driver_acc, cfg, dynamics, dt);
    let safe = match (compute_thw(w), compute_ttc(w)) {
        (Ok(thw), Ok(ttc)) => safe_now(thw, ttc, &cfg.thresholds),
        _ => false,
    };
    Risk { warn, filter, safe }
}

pub fn mode_transition(m: Mode, warn: bool, filter: bool, safe: bool) -> Mode {
    if filter {
        Mode::Intervention
    } else if warn {
        Mode::Advisory
    } else if safe {
        Mode::Nominal
    } else {
        m
    }
}

/// Applied acceleration and controller action for a mode.
pub fn arbitrate(m: Mode, driver_acc: i32, cfg: &SupervisorConfig) -> (i32, ControlAction) {
    match m {
        Mode::Nominal => (driver_acc, ControlAction::None),
        Mode::Advisory => (driver_acc, ControlAction::Hint),
        Mode::Intervention => (driver_acc.clamp(cfg.acc_floor, cfg.acc_cap), ControlAction::Override),
    }
}

/// Actions the controller may pick from `prev` mode given the hazard flags.
///
/// The envelope widens `mode_transition` (whose choice is always included)
/// so the game has room to trade severity for safety:
/// * Nominal needs no warning, and recovery into it needs SafeNow;
/// * Advisory needs a warning, or continues a raised mode until SafeNow;
/// * Intervention is never active while SafeNow holds, and is entered only
///   on a filter hit.
pub fn allowed_actions(prev: Mode, risk: Risk, variant: Variant) -> Vec<ControlAction> {
    let raised = prev != Mode::Nominal;
    let nominal = !risk.warn && (!raised || risk.safe);
    let advisory = risk.warn || (raised && !risk.safe) || variant == Variant::AdvisoryOnly;
    let intervention = !risk.safe && (risk.filter || prev == Mode::Intervention);
    [
        (ControlAction::None, nominal),
        (ControlAction::Hint, advisory),
        (ControlAction::Override, intervention),
    ]
    .into_iter()
    .filter(|&(a, ok)| ok && variant.allows(a))
    .map(|(a, _)| a)
    .collect()
}
