use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::buffer::RolloutBuffer;
use crate::env::Environment;
use crate::error::Result;
use crate::nn::ActorCritic;

/// Summary of one finished episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// Sum of environment rewards, penalties included.
    pub reward: f64,
    pub length: u64,
}

/// A completed batch of transitions together with the episodes that ended
/// inside it.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub buffer: RolloutBuffer,
    pub episodes: Vec<EpisodeRecord>,
}

/// An environment with its own sampling stream. Episodes carry over from one
/// collection call to the next.
pub struct RolloutWorker<E> {
    env: E,
    rng: ChaCha8Rng,
    seed: u64,
    obs: Option<Vec<f64>>,
    episodes_started: u64,
    ep_reward: f64,
    ep_len: u64,
}

impl<E: Environment> RolloutWorker<E> {
    pub fn new(env: E, seed: u64) -> Self {
        RolloutWorker {
            env,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            obs: None,
            episodes_started: 0,
            ep_reward: 0.0,
            ep_len: 0,
        }
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    fn current_obs(&mut self) -> Result<Vec<f64>> {
        if let Some(o) = &self.obs {
            return Ok(o.clone());
        }
        let o = self.env.reset(self.seed.wrapping_add(self.episodes_started))?;
        self.episodes_started += 1;
        self.ep_reward = 0.0;
        self.ep_len = 0;
        self.obs = Some(o.clone());
        Ok(o)
    }

    /// Collects exactly `n_steps` transitions as one buffer segment.
    /// Episodes that end are reset in place. A time-limit truncation adds
    /// `gamma * V(final obs)` to the stored reward; a limit violation does
    /// not.
    pub fn collect(&mut self, policy: &ActorCritic, n_steps: usize, gamma: f64) -> Result<Rollout> {
        let mut buffer = RolloutBuffer::new(self.env.obs_dim(), self.env.act_dim());
        let mut episodes = Vec::new();
        for _ in 0..n_steps {
            let obs = self.current_obs()?;
            let sample = policy.act(&obs, &mut self.rng)?;
            let step = self.env.step(&sample.action)?;
            self.ep_reward += step.reward;
            self.ep_len += 1;
            let mut reward = step.reward;
            if step.truncated && !step.terminated {
                reward += gamma * policy.value(&step.obs)?;
            }
            let done = step.terminated || step.truncated;
            buffer.push(&obs, &sample.raw, reward, step.reward, sample.value, sample.log_prob, done);
            if done {
                episodes.push(EpisodeRecord {
                    reward: self.ep_reward,
                    length: self.ep_len,
                });
                self.obs = None;
            } else {
                self.obs = Some(step.obs);
            }
        }
        let next = self.current_obs()?;
        buffer.close_segment(policy.value(&next)?);
        Ok(Rollout { buffer, episodes })
    }
}

/// Single-worker collection of `n_steps` transitions.
pub fn collect_rollout<E: Environment>(
    worker: &mut RolloutWorker<E>,
    policy: &ActorCritic,
    n_steps: usize,
    gamma: f64,
) -> Result<Rollout> {
    worker.collect(policy, n_steps, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvConfig, GainEnv};
    use crate::sim::PlantParams;

    fn worker(seed: u64) -> (RolloutWorker<GainEnv>, ActorCritic) {
        let cfg = EnvConfig {
            episode_length: 0.05,
            ..EnvConfig::adaptive_gain()
        };
        let env = GainEnv::new(PlantParams::default(), cfg.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let policy = ActorCritic::for_env(&PlantParams::default(), &cfg, &mut rng);
        (RolloutWorker::new(env, seed), policy)
    }

    #[test]
    fn collects_exact_count_across_episode_boundaries() {
        let (mut w, p) = worker(1);
        let r = w.collect(&p, 130, 0.99).unwrap();
        assert_eq!(r.buffer.len(), 130);
        // 50 agent steps per episode
        assert_eq!(r.episodes.len(), 2);
        assert!(r.buffer.dones[49] && r.buffer.dones[99]);
        assert_eq!(r.buffer.segments.len(), 1);
    }

    #[test]
    fn same_seed_same_buffer() {
        let (mut a, p) = worker(3);
        let (mut b, _) = worker(3);
        assert_eq!(a.collect(&p, 64, 0.99).unwrap(), b.collect(&p, 64, 0.99).unwrap());
        let (mut c, _) = worker(4);
        assert_ne!(a.collect(&p, 64, 0.99).unwrap(), c.collect(&p, 64, 0.99).unwrap());
    }

    #[test]
    fn truncation_bootstraps_reward() {
        let (mut w, mut p) = worker(1);
        // give the critic a constant output of 1
        let mut flat = p.params();
        *flat.last_mut().unwrap() = 1.0;
        p.set_params(&flat).unwrap();
        let r = w.collect(&p, 50, 0.99).unwrap();
        let last = 49;
        assert!(r.buffer.dones[last]);
        let bonus = r.buffer.rewards[last] - r.buffer.env_rewards[last];
        assert!(bonus.abs() > 0.5, "bootstrap {bonus}");
        assert_eq!(r.buffer.rewards[0], r.buffer.env_rewards[0]);
    }
}
