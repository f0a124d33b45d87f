use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::{adam_step, AdamState};
use super::buffer::RolloutBuffer;
use super::config::PpoConfig;
use super::loss::{approx_kl, clip_grad_norm, clipped_surrogate, clipped_surrogate_grad, normalize_advantages};
use crate::error::{Error, Result};
use crate::nn::ActorCritic;

/// Averages over the minibatches that were applied.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub minibatches: usize,
    pub epochs_completed: usize,
    /// The KL check ended the update early.
    pub early_stopped: bool,
    /// Largest `|ratio - 1|` seen on the first minibatch, before any step.
    pub first_ratio_dev: f64,
}

/// Losses and gradient of one minibatch at the current parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MinibatchGrad {
    pub grads: Vec<f64>,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub max_ratio_dev: f64,
}

/// Gradient of `L = -L_clip + vf_coef * L_vf - ent_coef * S` over the
/// transitions `idx`, with advantages standardised within the minibatch.
pub fn minibatch_gradient(
    policy: &mut ActorCritic,
    buffer: &RolloutBuffer,
    idx: &[usize],
    clip: f64,
    cfg: &PpoConfig,
) -> Result<MinibatchGrad> {
    let n = idx.len() as f64;
    let mut adv: Vec<f64> = idx.iter().map(|&i| buffer.advantages[i]).collect();
    normalize_advantages(&mut adv);
    let mut out = MinibatchGrad {
        grads: vec![0.0; policy.param_count()],
        policy_loss: 0.0,
        value_loss: 0.0,
        entropy: 0.0,
        approx_kl: 0.0,
        clip_frac: 0.0,
        max_ratio_dev: 0.0,
    };
    for (k, &i) in idx.iter().enumerate() {
        let obs = buffer.obs_at(i);
        let raw = buffer.action_at(i);
        let ev = policy.evaluate(obs, raw)?;
        let log_ratio = ev.log_prob - buffer.log_probs[i];
        let ratio = log_ratio.exp();
        let a = adv[k];
        let ret = buffer.returns[i];
        out.policy_loss -= clipped_surrogate(ratio, a, clip) / n;
        out.value_loss += (ev.value - ret).powi(2) / n;
        out.entropy += ev.entropy / n;
        out.approx_kl += approx_kl(log_ratio) / n;
        if (ratio - 1.0).abs() > clip {
            out.clip_frac += 1.0 / n;
        }
        out.max_ratio_dev = out.max_ratio_dev.max((ratio - 1.0).abs());
        // d(-surrogate)/d(log_prob) = -dS/dratio * ratio
        let d_log_prob = -clipped_surrogate_grad(ratio, a, clip) * ratio / n;
        let d_value = cfg.vf_coef * 2.0 * (ev.value - ret) / n;
        let d_entropy = -cfg.ent_coef / n;
        policy.backward(obs, raw, d_log_prob, d_entropy, d_value, &mut out.grads)?;
    }
    Ok(out)
}

/// Runs `n_epochs` passes of shuffled minibatch updates over `buffer`.
/// Stops as soon as a minibatch's approximate KL exceeds `target_kl`,
/// without applying that minibatch.
pub fn ppo_update<R: Rng + ?Sized>(
    policy: &mut ActorCritic,
    adam: &mut AdamState,
    buffer: &RolloutBuffer,
    cfg: &PpoConfig,
    lr: f64,
    clip: f64,
    rng: &mut R,
) -> Result<UpdateStats> {
    if buffer.advantages.len() != buffer.len() || buffer.is_empty() {
        return Err(Error::Usage("compute advantages before updating".into()));
    }
    let mut stats = UpdateStats::default();
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut params = policy.params();
    'epochs: for _ in 0..cfg.n_epochs {
        order.shuffle(rng);
        for idx in order.chunks(cfg.batch_size) {
            let mut mb = minibatch_gradient(policy, buffer, idx, clip, cfg)?;
            if stats.minibatches == 0 {
                stats.first_ratio_dev = mb.max_ratio_dev;
            }
            let loss = mb.policy_loss + cfg.vf_coef * mb.value_loss - cfg.ent_coef * mb.entropy;
            if !loss.is_finite() || mb.grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Training(format!(
                    "non-finite loss {loss} (policy {}, value {})",
                    mb.policy_loss, mb.value_loss
                )));
            }
            if cfg.target_kl > 0.0 && mb.approx_kl > cfg.target_kl {
                stats.early_stopped = true;
                break 'epochs;
            }
            clip_grad_norm(&mut mb.grads, cfg.max_grad_norm);
            adam_step(&mut params, &mb.grads, adam, lr)?;
            policy.set_params(&params)?;
            stats.minibatches += 1;
            stats.policy_loss += mb.policy_loss;
            stats.value_loss += mb.value_loss;
            stats.entropy += mb.entropy;
            stats.approx_kl += mb.approx_kl;
            stats.clip_frac += mb.clip_frac;
        }
        stats.epochs_completed += 1;
    }
    if stats.minibatches > 0 {
        let m = stats.minibatches as f64;
        stats.policy_loss /= m;
        stats.value_loss /= m;
        stats.entropy /= m;
        stats.approx_kl /= m;
        stats.clip_frac /= m;
    }
    Ok(stats)
}
