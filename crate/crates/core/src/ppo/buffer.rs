use crate::error::{Error, Result};

/// Contiguous run of transitions collected by one worker. GAE never looks
/// across segment boundaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// Value of the observation that follows the segment's last step.
    pub last_value: f64,
}

/// On-policy transition store. `rewards` include the time-limit bootstrap;
/// `env_rewards` are what the environment returned.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RolloutBuffer {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub env_rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub dones: Vec<bool>,
    pub segments: Vec<Segment>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        RolloutBuffer {
            obs_dim,
            act_dim,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, obs: &[f64], action: &[f64], reward: f64, env_reward: f64, value: f64, log_prob: f64, done: bool) {
        debug_assert_eq!(obs.len(), self.obs_dim);
        debug_assert_eq!(action.len(), self.act_dim);
        self.obs.extend_from_slice(obs);
        self.actions.extend_from_slice(action);
        self.rewards.push(reward);
        self.env_rewards.push(env_reward);
        self.values.push(value);
        self.log_probs.push(log_prob);
        self.dones.push(done);
    }

    /// Marks everything pushed since the previous segment as one segment.
    pub fn close_segment(&mut self, last_value: f64) {
        let start = self.segments.last().map_or(0, |s| s.end);
        self.segments.push(Segment {
            start,
            end: self.len(),
            last_value,
        });
    }

    pub fn obs_at(&self, i: usize) -> &[f64] {
        &self.obs[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    pub fn action_at(&self, i: usize) -> &[f64] {
        &self.actions[i * self.act_dim..(i + 1) * self.act_dim]
    }

    /// Appends `other` after this buffer, keeping its segments separate.
    pub fn append(&mut self, other: RolloutBuffer) -> Result<()> {
        if other.obs_dim != self.obs_dim || other.act_dim != self.act_dim {
            return Err(Error::Usage("cannot merge buffers of different shapes".into()));
        }
        let off = self.len();
        self.obs.extend(other.obs);
        self.actions.extend(other.actions);
        self.rewards.extend(other.rewards);
        self.env_rewards.extend(other.env_rewards);
        self.values.extend(other.values);
        self.log_probs.extend(other.log_probs);
        self.dones.extend(other.dones);
        self.segments.extend(other.segments.into_iter().map(|s| Segment {
            start: s.start + off,
            end: s.end + off,
            last_value: s.last_value,
        }));
        self.advantages.clear();
        self.returns.clear();
        Ok(())
    }

    pub fn clear(&mut self) {
        *self = RolloutBuffer::new(self.obs_dim, self.act_dim);
    }
}

/// Generalised advantage estimates and returns, segment by segment:
///
/// ```text
/// delta_t = r_t + gamma * V(s_t+1) * (1 - done_t) - V(s_t)
/// A_t     = delta_t + gamma * lambda * (1 - done_t) * A_t+1
/// R_t     = A_t + V(s_t)
/// ```
pub fn compute_gae(buffer: &mut RolloutBuffer, gamma: f64, lambda: f64) -> Result<()> {
    let n = buffer.len();
    if buffer.values.len() != n || buffer.dones.len() != n {
        return Err(Error::Usage("buffer arrays have mismatched lengths".into()));
    }
    let covered: usize = buffer.segments.iter().map(|s| s.end - s.start).sum();
    if covered != n {
        return Err(Error::Usage(format!("segments cover {covered} of {n} transitions")));
    }
    let mut adv = vec![0.0; n];
    for seg in &buffer.segments {
        let mut next_adv = 0.0;
        let mut next_value = seg.last_value;
        for t in (seg.start..seg.end).rev() {
            let live = if buffer.dones[t] { 0.0 } else { 1.0 };
            let delta = buffer.rewards[t] + gamma * next_value * live - buffer.values[t];
            next_adv = delta + gamma * lambda * live * next_adv;
            adv[t] = next_adv;
            next_value = buffer.values[t];
        }
    }
    buffer.returns = adv.iter().zip(&buffer.values).map(|(a, v)| a + v).collect();
    buffer.advantages = adv;
    Ok(())
}
