use serde::{Deserialize, Serialize};

use crate::env::Variant;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpoConfig {
    /// Learning rate, or the starting point of the linear anneal.
    pub learning_rate: f64,
    pub learning_rate_final: f64,
    pub clip_range: f64,
    pub clip_range_final: f64,
    /// Anneal learning rate and clip range linearly over training.
    pub dynamic_schedule: bool,
    /// Transitions per iteration, summed over workers.
    pub n_steps: usize,
    pub batch_size: usize,
    pub n_epochs: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub ent_coef: f64,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
    /// Stop an update once the mean approximate KL of a minibatch exceeds
    /// this. Non-positive disables the check.
    pub target_kl: f64,
    pub total_iterations: usize,
    pub seed: u64,
    /// Iterations between periodic checkpoints; 0 keeps only the final one.
    pub checkpoint_every: usize,
}

impl PpoConfig {
    pub fn fixed_gain() -> Self {
        PpoConfig {
            learning_rate: 3e-4,
            learning_rate_final: 3e-5,
            clip_range: 0.2,
            clip_range_final: 0.05,
            dynamic_schedule: false,
            n_steps: 4800,
            batch_size: 64,
            n_epochs: 10,
            gamma: 0.99,
            gae_lambda: 0.95,
            ent_coef: 0.0,
            vf_coef: 0.5,
            max_grad_norm: 0.5,
            target_kl: 0.02,
            total_iterations: 50,
            seed: 0,
            checkpoint_every: 10,
        }
    }

    pub fn adaptive_gain() -> Self {
        PpoConfig {
            dynamic_schedule: true,
            n_steps: 1024,
            total_iterations: 100,
            ..Self::fixed_gain()
        }
    }

    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::FixedGain => Self::fixed_gain(),
            Variant::AdaptiveGain => Self::adaptive_gain(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_steps == 0 || self.batch_size == 0 || !self.n_steps.is_multiple_of(self.batch_size) {
            return bad(format!(
                "ppo.batch_size {} must divide ppo.n_steps {}",
                self.batch_size, self.n_steps
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("ppo.gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!("ppo.gae_lambda must lie in [0, 1], got {}", self.gae_lambda));
        }
        for (name, v) in [("clip_range", self.clip_range), ("clip_range_final", self.clip_range_final)] {
            if !(v > 0.0) {
                return bad(format!("ppo.{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("learning_rate_final", self.learning_rate_final),
            ("ent_coef", self.ent_coef),
            ("vf_coef", self.vf_coef),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("ppo.{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.max_grad_norm > 0.0) {
            return bad(format!("ppo.max_grad_norm must be positive, got {}", self.max_grad_norm));
        }
        if self.n_epochs == 0 || self.total_iterations == 0 {
            return bad("ppo.n_epochs and ppo.total_iterations must be at least 1".into());
        }
        Ok(())
    }
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self::fixed_gain()
    }
}

/// Learning rate and clip range at `progress` in `[0, 1]`.
pub fn schedule(progress: f64, cfg: &PpoConfig) -> (f64, f64) {
    if !cfg.dynamic_schedule {
        return (cfg.learning_rate, cfg.clip_range);
    }
    let p = progress.clamp(0.0, 1.0);
    (
        cfg.learning_rate + (cfg.learning_rate_final - cfg.learning_rate) * p,
        cfg.clip_range + (cfg.clip_range_final - cfg.clip_range) * p,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dynamic_schedule_endpoints() {
        let c = PpoConfig::adaptive_gain();
        assert_eq!(schedule(0.0, &c), (3e-4, 0.2));
        let (lr, clip) = schedule(1.0, &c);
        assert!((lr - 3e-5).abs() < 1e-18 && (clip - 0.05).abs() < 1e-15);
        let (lr, clip) = schedule(0.5, &c);
        assert!((lr - 1.65e-4).abs() < 1e-15 && (clip - 0.125).abs() < 1e-15);
    }

    #[test]
    fn fixed_schedule_is_constant() {
        let c = PpoConfig::fixed_gain();
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(schedule(p, &c), (3e-4, 0.2));
        }
    }

    #[test]
    fn batch_must_divide_steps() {
        let c = PpoConfig {
            n_steps: 100,
            ..PpoConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(PpoConfig::fixed_gain().validate().is_ok());
        assert!(PpoConfig::adaptive_gain().validate().is_ok());
    }
}
