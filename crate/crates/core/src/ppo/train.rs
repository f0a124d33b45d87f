use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::adam::AdamState;
use super::buffer::compute_gae;
use super::checkpoint::{Checkpoint, Progress};
use super::config::{schedule, PpoConfig};
use super::update::ppo_update;
use crate::env::{EnvConfig, GainEnv};
use crate::error::{Error, Result};
use crate::nn::ActorCritic;
use crate::parallel::{BoxedEnv, WorkerPool, WorkerPoolConfig};
use crate::sim::PlantParams;

/// One row of `stats.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationStats {
    pub iter: u64,
    pub steps: u64,
    /// Mean over the last (up to) 100 finished episodes; empty until the
    /// first episode ends.
    pub ep_reward_mean: Option<f64>,
    pub step_reward_mean: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
    pub lr: f64,
    pub clip_range: f64,
    pub seconds: f64,
}

/// One row of `episodes.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeRow {
    pub episode: u64,
    pub iter: u64,
    pub reward: f64,
    pub length: u64,
    pub step_reward_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSetup {
    pub plant: PlantParams,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub workers: WorkerPoolConfig,
}

impl TrainSetup {
    pub fn new(plant: PlantParams, env: EnvConfig, ppo: PpoConfig) -> Self {
        TrainSetup {
            plant,
            env,
            ppo,
            workers: WorkerPoolConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate(&self.plant)?;
        self.ppo.validate()?;
        self.workers.per_worker_steps(self.ppo.n_steps)?;
        Ok(())
    }

    pub fn base_seed(&self) -> u64 {
        self.workers.base_seed.unwrap_or(self.ppo.seed)
    }
}

pub struct TrainOutcome {
    pub policy: ActorCritic,
    pub stats: Vec<IterationStats>,
    pub final_checkpoint: PathBuf,
}

pub const STATS_FILE: &str = "stats.csv";
pub const EPISODES_FILE: &str = "episodes.csv";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const DIVERGED_CHECKPOINT: &str = "diverged.ckpt";

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| Error::io_path(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn write_row<T: Serialize>(w: &mut csv::Writer<File>, row: &T, what: &str) -> Result<()> {
    w.serialize(row)
        .map_err(|e| Error::io(format!("write {what}"), std::io::Error::other(e)))?;
    w.flush().map_err(|e| Error::io(format!("flush {what}"), e))
}

/// Trains with in-process environments.
pub fn train(setup: &TrainSetup, out_dir: &Path) -> Result<TrainOutcome> {
    let plant = setup.plant.clone();
    let env = setup.env.clone();
    train_with(
        setup,
        out_dir,
        move |_| Ok(Box::new(GainEnv::new(plant.clone(), env.clone())?) as BoxedEnv),
        |_| {},
    )
}

/// Full PPO loop. `make_env` builds the environment of each worker and
/// `on_iteration` sees every stats row as it is written.
pub fn train_with(
    setup: &TrainSetup,
    out_dir: &Path,
    make_env: impl FnMut(usize) -> Result<BoxedEnv>,
    mut on_iteration: impl FnMut(&IterationStats),
) -> Result<TrainOutcome> {
    setup.validate()?;
    let cfg = &setup.ppo;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io_path(out_dir, e))?;
    let ckpt_dir = out_dir.join("checkpoints");
    if cfg.checkpoint_every > 0 {
        std::fs::create_dir_all(&ckpt_dir).map_err(|e| Error::io_path(&ckpt_dir, e))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut policy = ActorCritic::for_env(&setup.plant, &setup.env, &mut rng);
    let mut adam = AdamState::new(policy.param_count());
    let mut pool = WorkerPool::new(setup.workers.n_workers, setup.base_seed(), make_env)?;
    if pool_dims_mismatch(&policy, &pool) {
        return Err(Error::Config("environment dimensions do not match the policy".into()));
    }

    let mut stats_csv = csv_writer(&out_dir.join(STATS_FILE))?;
    let mut episodes_csv = csv_writer(&out_dir.join(EPISODES_FILE))?;
    let mut stats = Vec::with_capacity(cfg.total_iterations);
    let mut recent: std::collections::VecDeque<f64> = Default::default();
    let mut progress = Progress {
        total_iterations: cfg.total_iterations as u64,
        ..Progress::default()
    };
    let start = Instant::now();

    for it in 0..cfg.total_iterations {
        let (lr, clip) = schedule(it as f64 / cfg.total_iterations as f64, cfg);
        let mut rollout = pool.collect(&policy, cfg.n_steps, cfg.gamma)?;
        compute_gae(&mut rollout.buffer, cfg.gamma, cfg.gae_lambda)?;
        let upd = match ppo_update(&mut policy, &mut adam, &rollout.buffer, cfg, lr, clip, &mut rng) {
            Ok(u) => u,
            Err(e @ Error::Training(_)) => {
                Checkpoint::from_policy(&policy, Some(&adam), progress).save(&out_dir.join(DIVERGED_CHECKPOINT))?;
                return Err(e);
            }
            Err(e) => return Err(e),
        };

        let iter = it as u64 + 1;
        progress.iteration = iter;
        progress.env_steps += rollout.buffer.len() as u64;
        for ep in &rollout.episodes {
            progress.episodes += 1;
            recent.push_back(ep.reward);
            if recent.len() > 100 {
                recent.pop_front();
            }
            write_row(
                &mut episodes_csv,
                &EpisodeRow {
                    episode: progress.episodes,
                    iter,
                    reward: ep.reward,
                    length: ep.length,
                    step_reward_mean: ep.reward / ep.length as f64,
                },
                "episode row",
            )?;
        }
        let env_rewards = &rollout.buffer.env_rewards;
        let row = IterationStats {
            iter,
            steps: progress.env_steps,
            ep_reward_mean: (!recent.is_empty()).then(|| recent.iter().sum::<f64>() / recent.len() as f64),
            step_reward_mean: env_rewards.iter().sum::<f64>() / env_rewards.len() as f64,
            policy_loss: upd.policy_loss,
            value_loss: upd.value_loss,
            entropy: upd.entropy,
            approx_kl: upd.approx_kl,
            clip_frac: upd.clip_frac,
            lr,
            clip_range: clip,
            seconds: start.elapsed().as_secs_f64(),
        };
        write_row(&mut stats_csv, &row, "stats row")?;
        on_iteration(&row);
        stats.push(row);

        if cfg.checkpoint_every > 0 && iter.is_multiple_of(cfg.checkpoint_every as u64) {
            Checkpoint::from_policy(&policy, Some(&adam), progress)
                .save(&ckpt_dir.join(format!("iter_{iter:05}.ckpt")))?;
        }
    }

    let final_checkpoint = out_dir.join(FINAL_CHECKPOINT);
    Checkpoint::from_policy(&policy, Some(&adam), progress).save(&final_checkpoint)?;
    Ok(TrainOutcome {
        policy,
        stats,
        final_checkpoint,
    })
}

fn pool_dims_mismatch(policy: &ActorCritic, pool: &WorkerPool) -> bool {
    pool.dims().iter().any(|&(o, a)| o != policy.obs_dim() || a != policy.act_dim())
}
