//! Data-parallel rollout collection. Each worker owns an environment and a
//! sampling stream seeded `base_seed + index`; segments are concatenated in
//! worker order so the result does not depend on thread scheduling.

mod bench;

pub use bench::{bench_throughput, write_bench_csv, BenchRow};

use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::nn::ActorCritic;
use crate::ppo::{Rollout, RolloutBuffer, RolloutWorker};

/// Environment that can be handed to a worker thread.
pub type BoxedEnv = Box<dyn Environment + Send>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorkerPoolConfig {
    pub n_workers: usize,
    /// Seed of worker 0; defaults to the training seed when absent.
    pub base_seed: Option<u64>,
}

impl Default for WorkerPoolConfig {
    fn default() -> Self {
        WorkerPoolConfig {
            n_workers: 1,
            base_seed: None,
        }
    }
}

impl WorkerPoolConfig {
    /// Steps each worker collects per iteration.
    pub fn per_worker_steps(&self, n_steps: usize) -> Result<usize> {
        if self.n_workers == 0 {
            return Err(Error::Config("workers.n_workers must be at least 1".into()));
        }
        if !n_steps.is_multiple_of(self.n_workers) {
            return Err(Error::Config(format!(
                "workers.n_workers {} must divide ppo.n_steps {n_steps}",
                self.n_workers
            )));
        }
        Ok(n_steps / self.n_workers)
    }
}

pub struct WorkerPool {
    workers: Vec<RolloutWorker<BoxedEnv>>,
}

impl WorkerPool {
    /// Builds `n_workers` workers, asking `make_env` for each worker's
    /// environment.
    pub fn new(n_workers: usize, base_seed: u64, mut make_env: impl FnMut(usize) -> Result<BoxedEnv>) -> Result<Self> {
        if n_workers == 0 {
            return Err(Error::Config("a worker pool needs at least one worker".into()));
        }
        let workers = (0..n_workers)
            .map(|i| {
                let env = make_env(i).map_err(|e| Error::Worker {
                    worker: i,
                    source: Box::new(e),
                })?;
                Ok(RolloutWorker::new(env, base_seed.wrapping_add(i as u64)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WorkerPool { workers })
    }

    pub fn n_workers(&self) -> usize {
        self.workers.len()
    }

    /// `(obs_dim, act_dim)` of every worker's environment.
    pub fn dims(&self) -> Vec<(usize, usize)> {
        self.workers.iter().map(|w| (w.env().obs_dim(), w.env().act_dim())).collect()
    }

    /// Collects `n_steps` transitions split evenly over the workers.
    pub fn collect(&mut self, policy: &ActorCritic, n_steps: usize, gamma: f64) -> Result<Rollout> {
        let per_worker = WorkerPoolConfig {
            n_workers: self.workers.len(),
            base_seed: None,
        }
        .per_worker_steps(n_steps)?;
        let results: Vec<Result<Rollout>> = if self.workers.len() == 1 {
            vec![self.workers[0].collect(policy, per_worker, gamma)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = self
                    .workers
                    .iter_mut()
                    .map(|w| s.spawn(move || w.collect(policy, per_worker, gamma)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join()
                            .unwrap_or_else(|_| Err(Error::Training("rollout worker panicked".into())))
                    })
                    .collect()
            })
        };
        let mut merged: Option<Rollout> = None;
        for (i, r) in results.into_iter().enumerate() {
            let r = r.map_err(|e| Error::Worker {
                worker: i,
                source: Box::new(e),
            })?;
            match &mut merged {
                None => merged = Some(r),
                Some(m) => {
                    m.buffer.append(r.buffer)?;
                    m.episodes.extend(r.episodes);
                }
            }
        }
        Ok(merged.unwrap_or(Rollout {
            buffer: RolloutBuffer::new(policy.obs_dim(), policy.act_dim()),
            episodes: Vec::new(),
        }))
    }
}

/// Collects one iteration of transitions from every worker in `pool`.
pub fn collect_parallel(pool: &mut WorkerPool, policy: &ActorCritic, n_steps: usize, gamma: f64) -> Result<Rollout> {
    pool.collect(policy, n_steps, gamma)
}
