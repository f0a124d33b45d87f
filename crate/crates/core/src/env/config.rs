use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::PlantParams;

/// Longest episode the plant may run, in plant steps.
pub const MAX_EPISODE_STEPS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The agent emits the GFL voltage command directly.
    FixedGain,
    /// The agent emits PI gains that drive the classical controller.
    AdaptiveGain,
}

impl Variant {
    pub fn obs_dim(self) -> usize {
        match self {
            Variant::FixedGain => 8,
            Variant::AdaptiveGain => 4,
        }
    }

    pub fn act_dim(self) -> usize {
        2
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::FixedGain => "fixed_gain",
            Variant::AdaptiveGain => "adaptive_gain",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" | "fixed_gain" => Ok(Variant::FixedGain),
            "adaptive" | "adaptive_gain" => Ok(Variant::AdaptiveGain),
            other => Err(Error::Usage(format!(
                "unknown model variant `{other}` (expected fixed or adaptive)"
            ))),
        }
    }
}

/// Episode definition shared by both agent variants. Bounds are closed
/// `[min, max]` intervals; an infinite bound disables the check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub variant: Variant,
    /// Episode duration (s).
    pub episode_length: f64,
    /// Plant steps per agent decision.
    pub decimation: u32,
    pub pref: f64,
    pub qref: f64,
    pub obs_bounds: Vec<[f64; 2]>,
    pub action_bounds: Vec<[f64; 2]>,
    /// Six weights for the fixed-gain reward, four for the adaptive one.
    pub reward_weights: Vec<f64>,
    pub lpf_alpha: f64,
    pub termination_penalty: f64,
}

impl EnvConfig {
    pub fn fixed_gain() -> Self {
        let inf = f64::INFINITY;
        EnvConfig {
            variant: Variant::FixedGain,
            episode_length: 2.0,
            decimation: 1,
            pref: 0.5,
            qref: 0.0,
            obs_bounds: vec![
                [-2.0, 2.0],
                [-inf, inf],
                [-2.0, 2.0],
                [-inf, inf],
                [-2.0, 2.0],
                [-2.0, 2.0],
                [-2.0, 2.0],
                [-2.0, 2.0],
            ],
            action_bounds: vec![[-2.0, 2.0]; 2],
            reward_weights: vec![-1.0, -1.0, -0.1, -0.1, -5.0, -1.0],
            lpf_alpha: 0.05,
            termination_penalty: -10.0,
        }
    }

    pub fn adaptive_gain() -> Self {
        EnvConfig {
            variant: Variant::AdaptiveGain,
            episode_length: 2.0,
            decimation: 20,
            pref: 0.5,
            qref: 0.0,
            obs_bounds: vec![[-2.0, 2.0]; 4],
            action_bounds: vec![[0.0, 20.0], [0.0, 100.0]],
            reward_weights: vec![10.0, 5.0, 0.1, 0.1],
            lpf_alpha: 0.05,
            termination_penalty: -10.0,
        }
    }

    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::FixedGain => Self::fixed_gain(),
            Variant::AdaptiveGain => Self::adaptive_gain(),
        }
    }

    /// Checks the config against the plant it will drive and returns the
    /// number of agent steps in one episode.
    pub fn validate(&self, plant: &PlantParams) -> Result<u64> {
        plant.validate()?;
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.decimation == 0 {
            return cfg("env.decimation must be at least 1".into());
        }
        if !(self.episode_length > 0.0) {
            return cfg(format!("env.episode_length must be positive, got {}", self.episode_length));
        }
        let Some(plant_steps) = plant.steps_for(self.episode_length) else {
            return cfg(format!(
                "env.episode_length {} s is not a whole number of {} s plant steps",
                self.episode_length, plant.dt_sim
            ));
        };
        if plant_steps > MAX_EPISODE_STEPS {
            return cfg(format!(
                "episode of {} s needs {plant_steps} plant steps, more than {MAX_EPISODE_STEPS}",
                self.episode_length
            ));
        }
        if plant_steps % self.decimation as u64 != 0 {
            return cfg(format!(
                "{plant_steps} plant steps per episode is not divisible by decimation {}",
                self.decimation
            ));
        }
        let dim_check = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "env.{name} has {got} entries, the {} variant needs {want}",
                    self.variant
                )))
            }
        };
        dim_check("obs_bounds", self.obs_bounds.len(), self.variant.obs_dim())?;
        dim_check("action_bounds", self.action_bounds.len(), self.variant.act_dim())?;
        let n_weights = match self.variant {
            Variant::FixedGain => 6,
            Variant::AdaptiveGain => 4,
        };
        dim_check("reward_weights", self.reward_weights.len(), n_weights)?;
        for (name, bounds) in [("obs_bounds", &self.obs_bounds), ("action_bounds", &self.action_bounds)] {
            for b in bounds.iter() {
                if b[0].is_nan() || b[1].is_nan() || b[0] >= b[1] {
                    return cfg(format!("env.{name} entry {b:?} must satisfy min < max"));
                }
            }
        }
        if self.action_bounds.iter().flatten().any(|b| !b.is_finite()) {
            return cfg("env.action_bounds must be finite".into());
        }
        if !(self.lpf_alpha > 0.0 && self.lpf_alpha <= 1.0) {
            return cfg(format!("env.lpf_alpha must lie in (0, 1], got {}", self.lpf_alpha));
        }
        if !self.termination_penalty.is_finite() || self.reward_weights.iter().any(|w| !w.is_finite()) {
            return cfg("reward weights and termination penalty must be finite".into());
        }
        Ok(plant_steps / self.decimation as u64)
    }
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self::fixed_gain()
    }
}
