//! Rollout collection with several workers: the merged buffer is identical
//! however the threads are scheduled, and throughput is reported per worker
//! count.

use ibr_tune::env::{EnvConfig, GainEnv};
use ibr_tune::nn::ActorCritic;
use ibr_tune::parallel::{bench_throughput, collect_parallel, BoxedEnv, WorkerPool};
use ibr_tune::sim::PlantParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool(n: usize, plant: &PlantParams, env: &EnvConfig) -> ibr_tune::Result<WorkerPool> {
    WorkerPool::new(n, 7, |_| Ok(Box::new(GainEnv::new(plant.clone(), env.clone())?) as BoxedEnv))
}

fn main() -> ibr_tune::Result<()> {
    let plant = PlantParams::default();
    let env = EnvConfig::adaptive_gain();
    let policy = ActorCritic::for_env(&plant, &env, &mut ChaCha8Rng::seed_from_u64(0));

    let a = collect_parallel(&mut pool(4, &plant, &env)?, &policy, 4096, 0.99)?;
    let b = collect_parallel(&mut pool(4, &plant, &env)?, &policy, 4096, 0.99)?;
    println!(
        "4 workers, 4096 steps: {} episodes finished, repeat identical: {}",
        a.episodes.len(),
        a.buffer.rewards == b.buffer.rewards && a.buffer.obs == b.buffer.obs
    );

    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!("available cores: {cores}");
    let rows = bench_throughput(&plant, &EnvConfig::fixed_gain(), &[1, 2, 4], 40_000, 0)?;
    for r in rows {
        println!("{} worker(s): {:.0} steps/s", r.workers, r.steps_per_second);
    }
    Ok(())
}
