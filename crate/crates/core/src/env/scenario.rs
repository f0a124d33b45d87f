//! Plain PI runs of the GFL connection scenario: the GFM forms the bus, the
//! GFL breaker closes at `connect_time` and the GFL tracks Pref.

use super::{trace_row, EnvConfig, GainEnv, Metrics, TraceRow, Variant};
use crate::env::compute_metrics;
use crate::error::{Error, Result};
use crate::nn::PiActor;
use crate::sim::{PiGains, PlantParams};

/// Start of the window in which the bus voltage magnitude is tracked (s).
/// Earlier samples belong to the GFM charging the discharged bus.
pub const VOLTAGE_WINDOW_START: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    pub gains: PiGains,
    /// One row per agent step.
    pub rows: Vec<TraceRow>,
    /// Metrics of P after the breaker closes.
    pub metrics: Metrics,
    /// Smallest and largest bus voltage magnitude from
    /// [`VOLTAGE_WINDOW_START`] on.
    pub bus_voltage: (f64, f64),
    /// An observation left its bounds (the run stops there).
    pub limit_violation: bool,
    pub final_p: f64,
}

impl ScenarioRun {
    /// True if P settled into the band within `window` seconds of connection.
    pub fn settled_within(&self, window: f64) -> bool {
        self.metrics.settled && self.metrics.settling_time <= window
    }
}

/// Runs the fixed-gain environment under a constant PI actor, which applies
/// exactly the classical controller with `gains`. `env.variant` must be the
/// fixed-gain one.
pub fn run_pi_scenario(plant: &PlantParams, env: &EnvConfig, gains: PiGains, seed: u64) -> Result<ScenarioRun> {
    if env.variant != Variant::FixedGain {
        return Err(Error::Config("the PI scenario runs on the fixed_gain environment".into()));
    }
    if !(gains.kp >= 0.0 && gains.ki >= 0.0 && gains.kp.is_finite() && gains.ki.is_finite()) {
        return Err(Error::Usage(format!(
            "gains must be finite and nonnegative (kp={}, ki={})",
            gains.kp, gains.ki
        )));
    }
    let mut sim = GainEnv::new(plant.clone(), env.clone())?;
    let actor = PiActor::new(gains, plant.gfl_omega_l());
    let mut obs = sim.reset(seed)?;
    let mut rows = Vec::with_capacity(sim.episode_steps() as usize);
    let mut p_after = Vec::new();
    let mut v_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut limit_violation = false;
    let connect_step = plant.steps_for(plant.connect_time).unwrap_or(0);
    let mut step = 0u64;
    loop {
        let r = sim.step_fixed(actor.forward(&obs))?;
        step += u64::from(env.decimation);
        if step > connect_step {
            p_after.push(r.info.meas.p);
        }
        if r.info.t >= VOLTAGE_WINDOW_START {
            let v = sim.state().bus_voltage_magnitude();
            v_range = (v_range.0.min(v), v_range.1.max(v));
        }
        rows.push(trace_row(&r, Some(gains)));
        limit_violation |= r.terminated;
        if r.terminated || r.truncated {
            break;
        }
        obs = r.obs;
    }
    if p_after.is_empty() {
        return Err(Error::Config(format!(
            "episode of {} s ends before the GFL connects at {} s",
            env.episode_length, plant.connect_time
        )));
    }
    let metrics = compute_metrics(&p_after, sim.agent_dt(), env.pref)?;
    Ok(ScenarioRun {
        gains,
        final_p: *p_after.last().unwrap_or(&f64::NAN),
        rows,
        metrics,
        bus_voltage: v_range,
        limit_violation,
    })
}
