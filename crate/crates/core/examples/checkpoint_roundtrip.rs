//! Saves the initial fixed-gain checkpoint, reloads it, saves it again and
//! compares the bytes; then exports its PI gains.

use ibr_tune::env::EnvConfig;
use ibr_tune::nn::ActorCritic;
use ibr_tune::ppo::{export_gains, AdamState, Checkpoint, Progress};
use ibr_tune::sim::PlantParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ibr_tune::Result<()> {
    let plant = PlantParams::default();
    let policy = ActorCritic::for_env(&plant, &EnvConfig::fixed_gain(), &mut ChaCha8Rng::seed_from_u64(0));
    let adam = AdamState::new(policy.param_count());
    let ck = Checkpoint::from_policy(&policy, Some(&adam), Progress::default());

    let dir = std::env::temp_dir();
    let first = dir.join("ibrtune-initial.ckpt");
    let second = dir.join("ibrtune-initial-resaved.ckpt");
    ck.save(&first)?;
    Checkpoint::load(&first)?.save(&second)?;
    let a = std::fs::read(&first).map_err(|e| ibr_tune::Error::io_path(&first, e))?;
    let b = std::fs::read(&second).map_err(|e| ibr_tune::Error::io_path(&second, e))?;
    println!("{} bytes, byte-identical after reload: {}", a.len(), a == b);

    let g = export_gains(&Checkpoint::load(&first)?)?;
    println!("kp={}, ki={}", g.kp, g.ki);
    Ok(())
}
