use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{BoxedEnv, WorkerPool};
use crate::env::{EnvConfig, GainEnv};
use crate::error::{Error, Result};
use crate::nn::ActorCritic;
use crate::sim::PlantParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub workers: usize,
    pub steps_per_second: f64,
}

/// Rollout throughput in agent steps per second for each worker count.
/// Every run collects `total_steps` transitions (rounded up to a multiple
/// of the worker count) after one warm-up iteration.
pub fn bench_throughput(
    plant: &PlantParams,
    env: &EnvConfig,
    workers_list: &[usize],
    total_steps: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let policy = ActorCritic::for_env(plant, env, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut rows = Vec::with_capacity(workers_list.len());
    for &n in workers_list {
        if n == 0 {
            return Err(Error::Usage("worker counts must be at least 1".into()));
        }
        let steps = total_steps.div_ceil(n) * n;
        let mut pool = WorkerPool::new(n, seed, |_| Ok(Box::new(GainEnv::new(plant.clone(), env.clone())?) as BoxedEnv))?;
        pool.collect(&policy, n, 0.99)?;
        let start = Instant::now();
        pool.collect(&policy, steps, 0.99)?;
        let secs = start.elapsed().as_secs_f64().max(1e-9);
        rows.push(BenchRow {
            workers: n,
            steps_per_second: steps as f64 / secs,
        });
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r).map_err(|e| Error::io("write benchmark row", std::io::Error::other(e)))?;
    }
    w.flush().map_err(|e| Error::io("flush benchmark", e))
}
