//! Deterministic evaluation of a trained policy.

use std::path::Path;

use crate::env::{compute_metrics, trace_row, EnvConfig, GainEnv, Metrics, TraceWriter, Variant};
use crate::error::{Error, Result};
use crate::nn::ActorCritic;
use crate::sim::PlantParams;

/// Length of the post-connection window summarised as the transient (s).
pub const TRANSIENT_WINDOW: f64 = 0.05;

/// How one gain evolved over an evaluation episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainProfile {
    /// Mean over the whole episode.
    pub mean: f64,
    /// Smallest value within [`TRANSIENT_WINDOW`] after connection.
    pub transient_min: f64,
    pub min: f64,
    pub max: f64,
}

impl GainProfile {
    fn from_samples(all: &[f64], transient: &[f64]) -> Option<Self> {
        if all.is_empty() {
            return None;
        }
        let min = all.iter().copied().fold(f64::INFINITY, f64::min);
        let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(GainProfile {
            mean: all.iter().sum::<f64>() / all.len() as f64,
            transient_min: transient.iter().copied().fold(f64::INFINITY, f64::min),
            min,
            max,
        })
    }

    /// Transient minimum relative to the episode mean.
    pub fn transient_ratio(&self) -> f64 {
        self.transient_min / self.mean
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalEpisode {
    pub episode: usize,
    pub seed: u64,
    pub reward: f64,
    pub length: u64,
    pub terminated: bool,
    /// P response after connection; `None` if the episode ended first.
    pub metrics: Option<Metrics>,
    pub kp: Option<GainProfile>,
    pub ki: Option<GainProfile>,
}

/// Runs `episodes` episodes with the mean action, reset seeds
/// `seed, seed + 1, ...`. With `trace_dir`, episode `k` is written to
/// `trace_dir/episode_<k>.csv`.
pub fn evaluate_policy(
    policy: &ActorCritic,
    plant: &PlantParams,
    env_cfg: &EnvConfig,
    episodes: usize,
    seed: u64,
    trace_dir: Option<&Path>,
) -> Result<Vec<EvalEpisode>> {
    if policy.variant != env_cfg.variant {
        return Err(Error::Config(format!(
            "a {} policy cannot drive a {} environment",
            policy.variant, env_cfg.variant
        )));
    }
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io_path(dir, e))?;
    }
    let mut env = GainEnv::new(plant.clone(), env_cfg.clone())?;
    let fixed = policy.pi_gains();
    let connect = plant.connect_time;
    let mut out = Vec::with_capacity(episodes);

    for episode in 0..episodes {
        let ep_seed = seed + episode as u64;
        let mut writer = match trace_dir {
            Some(dir) => Some(TraceWriter::create(&dir.join(format!("episode_{episode:03}.csv")))?),
            None => None,
        };
        let mut obs = env.reset(ep_seed)?;
        let (mut reward, mut length) = (0.0, 0u64);
        let mut p_after = Vec::new();
        let (mut kp, mut ki, mut kp_tr, mut ki_tr) = (vec![], vec![], vec![], vec![]);
        let terminated = loop {
            let action = policy.act_deterministic(&obs)?;
            let r = match env_cfg.variant {
                Variant::FixedGain => env.step_fixed([action[0], action[1]])?,
                Variant::AdaptiveGain => env.step_adaptive([action[0], action[1]])?,
            };
            reward += r.reward;
            length += 1;
            let t = r.info.t;
            if t > connect + 1e-12 {
                p_after.push(r.info.meas.p);
            }
            if let Some(g) = r.info.gains.or(fixed) {
                kp.push(g.kp);
                ki.push(g.ki);
                if t > connect && t <= connect + TRANSIENT_WINDOW {
                    kp_tr.push(g.kp);
                    ki_tr.push(g.ki);
                }
            }
            if let Some(w) = writer.as_mut() {
                w.write(&trace_row(&r, fixed))?;
            }
            if r.terminated || r.truncated {
                break r.terminated;
            }
            obs = r.obs;
        };
        if let Some(w) = writer {
            w.finish()?;
        }
        let metrics = if p_after.is_empty() {
            None
        } else {
            Some(compute_metrics(&p_after, env.agent_dt(), env_cfg.pref)?)
        };
        out.push(EvalEpisode {
            episode,
            seed: ep_seed,
            reward,
            length,
            terminated,
            metrics,
            kp: GainProfile::from_samples(&kp, &kp_tr),
            ki: GainProfile::from_samples(&ki, &ki_tr),
        });
    }
    Ok(out)
}
