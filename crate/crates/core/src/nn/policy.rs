use rand::Rng;

use super::dense::{Activation, DenseNet};
use super::gaussian::{entropy, scale_to_bounds, tanh_log_det, GaussianHead};
use super::pi_actor::PiActor;
use crate::env::{EnvConfig, Variant};
use crate::error::{Error, Result};
use crate::sim::{PiGains, PlantParams};

/// Initial log standard deviation of the fixed-gain action noise (pu).
pub const FIXED_LOG_STD_INIT: f64 = -1.0;
/// Initial log standard deviation of the adaptive pre-squash noise.
pub const ADAPTIVE_LOG_STD_INIT: f64 = 0.0;
const HIDDEN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Actor {
    Pi(PiActor),
    Mlp(DenseNet),
}

impl Actor {
    fn param_count(&self) -> usize {
        match self {
            Actor::Pi(_) => 2,
            Actor::Mlp(net) => net.param_count(),
        }
    }
}

/// One action drawn from the policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSample {
    /// Sample of the Gaussian head; this is what the buffer stores.
    pub raw: Vec<f64>,
    /// Action handed to the environment.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
}

/// Training-time evaluation of one stored transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub log_prob: f64,
    pub entropy: f64,
    pub value: f64,
}

/// Actor, Gaussian head and critic of one agent variant. Parameters flatten
/// as `[actor, log_std, critic]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorCritic {
    pub variant: Variant,
    pub actor: Actor,
    pub log_std: Vec<f64>,
    pub critic: DenseNet,
    /// Box the adaptive action is squashed into. Unused by the fixed-gain
    /// variant, whose mean is passed through and clamped by the environment.
    pub action_bounds: Vec<[f64; 2]>,
}

impl ActorCritic {
    /// PI actor starting at `gains`, critic 8-64-64-1 with ReLU.
    pub fn fixed_gain<R: Rng + ?Sized>(gains: PiGains, omega_l: f64, rng: &mut R) -> Self {
        ActorCritic {
            variant: Variant::FixedGain,
            actor: Actor::Pi(PiActor::new(gains, omega_l)),
            log_std: vec![FIXED_LOG_STD_INIT; 2],
            critic: DenseNet::mlp(&[8, HIDDEN, HIDDEN, 1], Activation::Relu, 1.0, rng),
            action_bounds: vec![[-2.0, 2.0]; 2],
        }
    }

    /// Tanh MLP actor and critic, 4-64-64-{2,1}, actions squashed into
    /// `bounds`.
    pub fn adaptive_gain<R: Rng + ?Sized>(bounds: Vec<[f64; 2]>, rng: &mut R) -> Self {
        let actor = DenseNet::mlp(&[4, HIDDEN, HIDDEN, 2], Activation::Tanh, 0.01, rng);
        let critic = DenseNet::mlp(&[4, HIDDEN, HIDDEN, 1], Activation::Tanh, 1.0, rng);
        ActorCritic {
            variant: Variant::AdaptiveGain,
            actor: Actor::Mlp(actor),
            log_std: vec![ADAPTIVE_LOG_STD_INIT; 2],
            critic,
            action_bounds: bounds,
        }
    }

    /// Fresh policy matching an environment configuration.
    pub fn for_env<R: Rng + ?Sized>(plant: &PlantParams, env: &EnvConfig, rng: &mut R) -> Self {
        match env.variant {
            Variant::FixedGain => {
                let mut p = Self::fixed_gain(PiGains::INITIAL, plant.gfl_omega_l(), rng);
                p.action_bounds = env.action_bounds.clone();
                p
            }
            Variant::AdaptiveGain => Self::adaptive_gain(env.action_bounds.clone(), rng),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.critic.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.log_std.len()
    }

    /// Gains of a fixed-gain policy, `None` for the adaptive variant.
    pub fn pi_gains(&self) -> Option<PiGains> {
        match &self.actor {
            Actor::Pi(a) => Some(a.gains()),
            Actor::Mlp(_) => None,
        }
    }

    pub fn check_obs(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim() {
            return Err(Error::Usage(format!(
                "{} policy expects {} observations, got {}",
                self.variant,
                self.obs_dim(),
                obs.len()
            )));
        }
        Ok(())
    }

    /// Mean of the Gaussian head.
    pub fn mean(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.check_obs(obs)?;
        match &self.actor {
            Actor::Pi(a) => Ok(a.forward(obs).to_vec()),
            Actor::Mlp(net) => net.predict(obs),
        }
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        self.check_obs(obs)?;
        Ok(self.critic.predict(obs)?[0])
    }

    /// Environment action for a raw head sample.
    pub fn env_action(&self, raw: &[f64]) -> Vec<f64> {
        match self.variant {
            Variant::FixedGain => raw.to_vec(),
            Variant::AdaptiveGain => scale_to_bounds(raw, &self.action_bounds),
        }
    }

    fn log_prob_of(&self, mean: Vec<f64>, raw: &[f64]) -> f64 {
        let head = GaussianHead::new(mean, self.log_std.clone());
        let lp = head.log_prob(raw);
        match self.variant {
            Variant::FixedGain => lp,
            Variant::AdaptiveGain => lp - tanh_log_det(raw, &self.action_bounds),
        }
    }

    /// Log-density of the environment action produced by `raw`.
    pub fn log_prob(&self, obs: &[f64], raw: &[f64]) -> Result<f64> {
        Ok(self.log_prob_of(self.mean(obs)?, raw))
    }

    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<ActionSample> {
        let mean = self.mean(obs)?;
        let raw = GaussianHead::new(mean.clone(), self.log_std.clone()).sample(rng);
        Ok(ActionSample {
            action: self.env_action(&raw),
            log_prob: self.log_prob_of(mean, &raw),
            value: self.value(obs)?,
            raw,
        })
    }

    /// Environment action at the distribution mean.
    pub fn act_deterministic(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.env_action(&self.mean(obs)?))
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.log_std)
    }

    pub fn param_count(&self) -> usize {
        self.actor.param_count() + self.log_std.len() + self.critic.param_count()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        match &self.actor {
            Actor::Pi(a) => out.extend_from_slice(&[a.kp_raw, a.ki_raw]),
            Actor::Mlp(net) => out.extend(net.params()),
        }
        out.extend_from_slice(&self.log_std);
        out.extend(self.critic.params());
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Usage(format!(
                "expected {} policy parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let na = self.actor.param_count();
        match &mut self.actor {
            Actor::Pi(a) => {
                a.kp_raw = flat[0];
                a.ki_raw = flat[1];
            }
            Actor::Mlp(net) => net.set_params(&flat[..na])?,
        }
        let nl = self.log_std.len();
        self.log_std.copy_from_slice(&flat[na..na + nl]);
        self.critic.set_params(&flat[na + nl..])
    }

    /// Evaluates a stored `(obs, raw)` pair, caching what
    /// [`ActorCritic::backward`] needs.
    pub fn evaluate(&mut self, obs: &[f64], raw: &[f64]) -> Result<Evaluation> {
        self.check_obs(obs)?;
        let mean = match &mut self.actor {
            Actor::Pi(a) => a.forward(obs).to_vec(),
            Actor::Mlp(net) => net.forward(obs)?,
        };
        let value = self.critic.forward(obs)?[0];
        Ok(Evaluation {
            log_prob: self.log_prob_of(mean, raw),
            entropy: self.entropy(),
            value,
        })
    }

    /// Accumulates into `grads` the gradient of
    /// `d_log_prob * log_prob + d_entropy * entropy + d_value * value`
    /// for the pair passed to the preceding [`ActorCritic::evaluate`].
    pub fn backward(
        &mut self,
        obs: &[f64],
        raw: &[f64],
        d_log_prob: f64,
        d_entropy: f64,
        d_value: f64,
        grads: &mut [f64],
    ) -> Result<()> {
        if grads.len() != self.param_count() {
            return Err(Error::Usage("gradient buffer has the wrong length".into()));
        }
        let na = self.actor.param_count();
        let nl = self.log_std.len();
        let mean = match &self.actor {
            Actor::Pi(a) => a.forward(obs).to_vec(),
            Actor::Mlp(net) => net.predict(obs)?,
        };
        let head = GaussianHead::new(mean, self.log_std.clone());
        let (d_mean, d_ls) = head.log_prob_grad(raw);
        let g_mean: Vec<f64> = d_mean.iter().map(|g| g * d_log_prob).collect();
        match &mut self.actor {
            Actor::Pi(a) => {
                let g = a.backward(obs, [g_mean[0], g_mean[1]]);
                grads[0] += g[0];
                grads[1] += g[1];
            }
            Actor::Mlp(net) => {
                net.backward_into(&g_mean, &mut grads[..na])?;
            }
        }
        for i in 0..nl {
            grads[na + i] += d_log_prob * d_ls[i] + d_entropy;
        }
        self.critic.backward_into(&[d_value], &mut grads[na + nl..])?;
        Ok(())
    }
}
