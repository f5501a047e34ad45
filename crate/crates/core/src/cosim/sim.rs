use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::StateId;
use crate::driver::{Level, Response};
use crate::game::{GameState, Lattice, Strategy, Turn};
use crate::hm::{HintableSul, HumanModel};
use crate::scenario::Scenario;
use crate::supervisor::{arbitrate, ControlAction, Mode};
use crate::vehicle::{quantize_thw, sensor_perturb, SensorErrorModel};

use super::trace::{SimEvent, SimTrace, TraceRow};
use super::{headways, CosimError};

/// Who picks the supervisor action during a run.
#[derive(Clone, Copy, Debug)]
pub enum Policy<'a> {
    Strategy(&'a Strategy<GameState>),
    /// Same action every epoch; used for baselines and mutation tests.
    Fixed(ControlAction),
}

/// Incoming-transition labels of every model state: the last stimulus and
/// the acceleration answered to it. The driver's memory is exactly this
/// pair, so a label identifies the state whenever the model is faithful.
pub fn state_labels(hm: &HumanModel) -> BTreeMap<(Level, i32), Vec<StateId>> {
    let mut map: BTreeMap<(Level, i32), Vec<StateId>> = BTreeMap::new();
    for (_, l, dst, out) in hm.machine().transitions() {
        let v = map.entry((*l, out.acc)).or_default();
        if !v.contains(&dst) {
            v.push(dst);
        }
    }
    for v in map.values_mut() {
        v.sort_unstable();
    }
    map
}

/// Runs the closed loop of `policy`, the driver `sul` and the vehicles for
/// one seeded episode. The learned model is stepped alongside the driver to
/// form the strategy's state key. When the driver leaves the model, tracking
/// resynchronises on the observed step and the divergence is logged; when
/// the strategy has no entry, the supervisor falls back to Intervention at
/// full braking.
pub fn execute<S>(
    policy: Policy<'_>,
    hm: &HumanModel,
    sul: &mut S,
    scenario: &Scenario,
    sensor: SensorErrorModel,
    seed: u64,
) -> Result<SimTrace, CosimError>
where
    S: HintableSul<Input = Level, Output = Response>,
{
    let lattice = Lattice::new(scenario);
    let labels = state_labels(hm);
    let levels = scenario.driver.levels.count();
    let sup = &scenario.supervisor;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sul.reset();

    let mut w = scenario.initial;
    let mut q = Some(hm.initial());
    let mut mode = Mode::Nominal;
    let mut hinted = false;
    let mut rows = Vec::new();
    let mut events = Vec::new();

    for step in 0..scenario.horizon_steps {
        if w.arrived() || w.overtaken() {
            break;
        }
        let row = rows.len();
        let (thw, ttc) = headways(&w);
        let truth = quantize_thw(thw, &scenario.driver.levels);
        let perceived = *sensor_perturb(truth, sensor, levels)
            .choose(&mut rng)
            .expect("perturbation set is never empty");

        if hinted {
            sul.hint();
        }
        let resp = sul.step(&perceived)?;
        let predicted = match q {
            Some(cur) => hm.step(cur, perceived, hinted)?,
            None => None,
        };
        let next = match predicted {
            Some((Some(n), r)) if r == resp => Some(n),
            other => {
                events.push(SimEvent::Divergence {
                    row,
                    expected: other.map(|(_, r)| r.to_string()),
                    observed: resp.to_string(),
                });
                let state = labels
                    .get(&(perceived, resp.acc))
                    .and_then(|c| c.first().copied());
                events.push(SimEvent::Resync { row, state });
                state
            }
        };

        let key = next.map(|n| GameState {
            turn: Turn::Controller,
            world: lattice.project(&w, step),
            driver: n,
            mode,
            hinted: false,
            level: perceived.0,
            response: Some(resp),
        });
        let chosen = match policy {
            Policy::Fixed(a) => Some(a),
            Policy::Strategy(s) => key.as_ref().and_then(|k| s.get(k)),
        };
        let (new_mode, applied, action, fallback) = match chosen {
            Some(a) => {
                let (applied, action) = arbitrate(a.mode(), resp.acc, sup);
                (a.mode(), applied, action, false)
            }
            None => {
                events.push(SimEvent::StrategyMiss {
                    row,
                    key: key.map_or_else(|| "-".to_string(), |k| k.to_string()),
                });
                (Mode::Intervention, sup.acc_floor, ControlAction::Override, true)
            }
        };

        rows.push(TraceRow {
            t: w.t,
            world: w,
            thw,
            ttc,
            perceived,
            mode: new_mode,
            driver_acc: resp.acc,
            applied_acc: applied,
            action,
            chain: resp.chain,
            fallback,
        });
        w = scenario.dynamics.step_world(&w, applied as f64, scenario.epoch);
        mode = new_mode;
        hinted = action == ControlAction::Hint;
        q = next;
    }
    Ok(SimTrace {
        rows,
        final_world: w,
        horizon_steps: scenario.horizon_steps,
        events,
    })
}
