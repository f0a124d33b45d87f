//! Episodic MDP around the two-inverter plant.
//!
//! The fixed-gain variant hands the agent the GFL voltage command and
//! observes `(e_d, int e_d, e_q, int e_q, Vd, Vq, iLd, iLq)`. The adaptive
//! variant hands it the PI gains of the classical controller and observes
//! `(P, Q, P_err, Q_err)`. Power setpoints are dispatched once the GFL
//! breaker closes, so every error term is zero before connection.

mod config;
mod limits;
mod metrics;
mod reward;
mod scenario;
mod trace;

pub use config::{EnvConfig, Variant, MAX_EPISODE_STEPS};
pub use limits::check_limits;
pub use metrics::{compute_metrics, Metrics, SETTLING_BAND};
pub use reward::{reward_adaptive, reward_fixed};
pub use scenario::{run_pi_scenario, ScenarioRun, VOLTAGE_WINDOW_START};
pub use trace::{TraceRow, TraceWriter};

use crate::error::{Error, Result};
use crate::sim::{
    current_reference, measure, pi_closed_loop_step, reset_plant, step_plant, BusMeasurement, Dq,
    PiGains, PlantParams, PlantState,
};

/// Diagnostics of one agent step. Plugin-backed environments leave this at
/// its default.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    /// Time at the end of the step (s).
    pub t: f64,
    pub meas: BusMeasurement,
    /// Current reference at the end of the step.
    pub iref: Dq,
    /// GFL voltage command applied on the last plant step.
    pub u_cmd: Dq,
    /// Gains in effect (adaptive variant only).
    pub gains: Option<PiGains>,
    pub raw_action: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// An observation left its bounds; the episode must be reset.
    pub terminated: bool,
    /// The episode reached its time limit.
    pub truncated: bool,
    pub info: StepInfo,
}

/// Minimal reset/step contract shared by in-process and plugin-backed
/// environments.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn act_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn obs_dim(&self) -> usize {
        (**self).obs_dim()
    }
    fn act_dim(&self) -> usize {
        (**self).act_dim()
    }
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        (**self).step(action)
    }
}

/// In-process environment for either variant.
#[derive(Clone, Debug)]
pub struct GainEnv {
    plant: PlantParams,
    config: EnvConfig,
    episode_steps: u64,
    state: PlantState,
    lpf: Dq,
    steps: u64,
    done: bool,
}

impl GainEnv {
    pub fn new(plant: PlantParams, config: EnvConfig) -> Result<Self> {
        let episode_steps = config.validate(&plant)?;
        let state = reset_plant(&plant, 0)?;
        Ok(GainEnv {
            plant,
            config,
            episode_steps,
            state,
            lpf: Dq::ZERO,
            steps: 0,
            done: false,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn plant(&self) -> &PlantParams {
        &self.plant
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    /// Agent steps per episode.
    pub fn episode_steps(&self) -> u64 {
        self.episode_steps
    }

    /// Agent step time (s).
    pub fn agent_dt(&self) -> f64 {
        self.plant.dt_sim * self.config.decimation as f64
    }

    pub fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        self.state = reset_plant(&self.plant, seed)?;
        self.lpf = Dq::ZERO;
        self.steps = 0;
        self.done = false;
        Ok(self.observe().0)
    }

    fn observe(&self) -> (Vec<f64>, BusMeasurement, Dq) {
        let meas = measure(&self.state);
        let c = &self.config;
        let iref = current_reference(&meas, c.pref, c.qref, self.state.breaker_closed);
        let obs = match c.variant {
            Variant::FixedGain => {
                let e = iref - meas.i_dq;
                let int = self.state.gfl_int_c;
                vec![e.d, int.d, e.q, int.q, meas.v_dq.d, meas.v_dq.q, meas.i_dq.d, meas.i_dq.q]
            }
            Variant::AdaptiveGain => {
                let (pref, qref) = self.dispatched_setpoints();
                vec![meas.p, meas.q, pref - meas.p, qref - meas.q]
            }
        };
        (obs, meas, iref)
    }

    fn dispatched_setpoints(&self) -> (f64, f64) {
        if self.state.breaker_closed {
            (self.config.pref, self.config.qref)
        } else {
            (0.0, 0.0)
        }
    }

    fn begin_step(&self, variant: Variant) -> Result<()> {
        if self.config.variant != variant {
            return Err(Error::Usage(format!(
                "{variant} step on a {} environment",
                self.config.variant
            )));
        }
        if self.done {
            return Err(Error::Usage("step after the episode ended; call reset first".into()));
        }
        Ok(())
    }

    fn clamp_action(&self, a: [f64; 2]) -> Result<[f64; 2]> {
        if a.iter().any(|x| x.is_nan()) {
            return Err(Error::Usage(format!("action {a:?} is not a number")));
        }
        let b = &self.config.action_bounds;
        Ok([a[0].clamp(b[0][0], b[0][1]), a[1].clamp(b[1][0], b[1][1])])
    }

    fn finish_step(&mut self, obs: Vec<f64>, mut reward: f64, terminated: bool, info: StepInfo) -> StepResult {
        self.steps += 1;
        let truncated = self.steps >= self.episode_steps;
        if terminated {
            reward += self.config.termination_penalty;
        }
        self.done = terminated || truncated;
        StepResult {
            obs,
            reward,
            terminated,
            truncated,
            info,
        }
    }

    /// Applies a GFL voltage command for `decimation` plant steps.
    pub fn step_fixed(&mut self, action: [f64; 2]) -> Result<StepResult> {
        self.begin_step(Variant::FixedGain)?;
        let a = self.clamp_action(action)?;
        let u = Dq::new(a[0], a[1]);
        let (pref, qref) = (self.config.pref, self.config.qref);
        for _ in 0..self.config.decimation {
            let meas = measure(&self.state);
            let iref = current_reference(&meas, pref, qref, self.state.breaker_closed);
            self.state = step_plant(&self.state, &self.plant, u, iref)?.0;
        }
        let (obs, meas, iref) = self.observe();
        let err = Dq::new(obs[0], obs[2]);
        let (reward, lpf) = reward_fixed(
            err,
            u,
            self.lpf,
            meas.p,
            &self.config.reward_weights,
            self.config.lpf_alpha,
        );
        self.lpf = lpf;
        let terminated = check_limits(&obs, &self.config.obs_bounds);
        let info = StepInfo {
            t: self.state.t,
            meas,
            iref,
            u_cmd: u,
            gains: None,
            raw_action: action,
        };
        Ok(self.finish_step(obs, reward, terminated, info))
    }

    /// Runs the classical controller with the given `(kp, ki)` for
    /// `decimation` plant steps, stopping early if a limit is crossed.
    pub fn step_adaptive(&mut self, action: [f64; 2]) -> Result<StepResult> {
        self.begin_step(Variant::AdaptiveGain)?;
        let a = self.clamp_action(action)?;
        let gains = PiGains { kp: a[0], ki: a[1] };
        let mut u_cmd = Dq::ZERO;
        let mut terminated = false;
        for _ in 0..self.config.decimation {
            let (pref, qref) = self.dispatched_setpoints();
            let (next, _, signals) = pi_closed_loop_step(&self.state, &self.plant, gains, pref, qref)?;
            self.state = next;
            u_cmd = signals.u_cmd;
            if check_limits(&self.observe().0, &self.config.obs_bounds) {
                terminated = true;
                break;
            }
        }
        let (obs, meas, iref) = self.observe();
        let b = &self.config.action_bounds;
        let norm = [
            (a[0] - b[0][0]) / (b[0][1] - b[0][0]),
            (a[1] - b[1][0]) / (b[1][1] - b[1][0]),
        ];
        let reward = reward_adaptive(obs[2], obs[3], norm, &self.config.reward_weights);
        let info = StepInfo {
            t: self.state.t,
            meas,
            iref,
            u_cmd,
            gains: Some(gains),
            raw_action: action,
        };
        Ok(self.finish_step(obs, reward, terminated, info))
    }
}

impl Environment for GainEnv {
    fn obs_dim(&self) -> usize {
        self.config.variant.obs_dim()
    }

    fn act_dim(&self) -> usize {
        self.config.variant.act_dim()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        GainEnv::reset(self, seed)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let a: [f64; 2] = action.try_into().map_err(|_| {
            Error::Usage(format!("expected a 2-element action, got {}", action.len()))
        })?;
        match self.config.variant {
            Variant::FixedGain => self.step_fixed(a),
            Variant::AdaptiveGain => self.step_adaptive(a),
        }
    }
}

/// Builds a trace row from a step of either variant. `gains` fills the kp/ki
/// columns when the environment does not report them itself.
pub fn trace_row(step: &StepResult, gains: Option<PiGains>) -> TraceRow {
    let i = &step.info;
    let g = i.gains.or(gains).unwrap_or(PiGains { kp: f64::NAN, ki: f64::NAN });
    TraceRow {
        t: i.t,
        vd: i.meas.v_dq.d,
        vq: i.meas.v_dq.q,
        ild: i.meas.i_dq.d,
        ilq: i.meas.i_dq.q,
        ild_ref: i.iref.d,
        ilq_ref: i.iref.q,
        p: i.meas.p,
        q: i.meas.q,
        ud: i.u_cmd.d,
        uq: i.u_cmd.q,
        kp: g.kp,
        ki: g.ki,
        reward: step.reward,
    }
}
