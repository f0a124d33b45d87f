use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use crate::env::Variant;
use crate::error::{Error, Result};
use crate::nn::{Actor, ActorCritic, DenseNet, Layer, PiActor};
use crate::sim::PiGains;

pub const CHECKPOINT_FORMAT: &str = "ibr-tune-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActorRecord {
    Pi(PiActor),
    Mlp { layers: Vec<Layer> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Progress {
    /// Iterations completed.
    pub iteration: u64,
    pub total_iterations: u64,
    pub env_steps: u64,
    pub episodes: u64,
}

/// Everything needed to rebuild a policy and continue optimising it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub variant: Variant,
    pub actor: ActorRecord,
    pub log_std: Vec<f64>,
    pub critic: Vec<Layer>,
    pub action_bounds: Vec<[f64; 2]>,
    pub optimizer: Option<AdamState>,
    pub progress: Progress,
}

impl Checkpoint {
    pub fn from_policy(policy: &ActorCritic, optimizer: Option<&AdamState>, progress: Progress) -> Self {
        let actor = match &policy.actor {
            Actor::Pi(a) => ActorRecord::Pi(*a),
            Actor::Mlp(net) => ActorRecord::Mlp {
                layers: net.layers().to_vec(),
            },
        };
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            variant: policy.variant,
            actor,
            log_std: policy.log_std.clone(),
            critic: policy.critic.layers().to_vec(),
            action_bounds: policy.action_bounds.clone(),
            optimizer: optimizer.cloned(),
            progress,
        }
    }

    pub fn policy(&self) -> Result<ActorCritic> {
        let bad = |m: String| Error::Checkpoint(m);
        let actor = match (&self.actor, self.variant) {
            (ActorRecord::Pi(a), Variant::FixedGain) => Actor::Pi(*a),
            (ActorRecord::Mlp { layers }, Variant::AdaptiveGain) => {
                Actor::Mlp(DenseNet::new(layers.clone()).map_err(|e| bad(e.to_string()))?)
            }
            _ => return Err(bad(format!("actor kind does not match variant {}", self.variant))),
        };
        let critic = DenseNet::new(self.critic.clone()).map_err(|e| bad(e.to_string()))?;
        let policy = ActorCritic {
            variant: self.variant,
            actor,
            log_std: self.log_std.clone(),
            critic,
            action_bounds: self.action_bounds.clone(),
        };
        if policy.obs_dim() != self.variant.obs_dim() || policy.act_dim() != self.variant.act_dim() {
            return Err(bad(format!("network shapes do not fit the {} variant", self.variant)));
        }
        if let Some(opt) = &self.optimizer {
            let n = policy.param_count();
            if opt.m.len() != n || opt.v.len() != n {
                return Err(bad(format!("optimizer moments have {} entries, policy has {n}", opt.m.len())));
            }
        }
        Ok(policy)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("not a checkpoint (format `{}`)", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        ck.policy()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io_path(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_path(path, e))?;
        Self::from_json(&text)
    }
}

/// Gains of a fixed-gain checkpoint, ready for the classical controller.
pub fn export_gains(ck: &Checkpoint) -> Result<PiGains> {
    match &ck.actor {
        ActorRecord::Pi(a) if ck.variant == Variant::FixedGain => Ok(a.gains()),
        _ => Err(Error::Usage(format!(
            "gains can only be exported from a fixed_gain checkpoint, this one is {}",
            ck.variant
        ))),
    }
}
