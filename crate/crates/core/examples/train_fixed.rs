//! Fixed-gain training at desk scale, then a comparison of the exported
//! gains against the initial ones in the connection scenario.
//!
//!     cargo run --release --example train_fixed -- [iterations] [seed]

use ibr_tune::env::{run_pi_scenario, EnvConfig, Variant};
use ibr_tune::ppo::{export_gains, train, Checkpoint, PpoConfig, TrainSetup};
use ibr_tune::sim::{PiGains, PlantParams};

fn main() -> ibr_tune::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(50, |s| s.parse().expect("iterations"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));

    let plant = PlantParams::default();
    let env = EnvConfig::for_variant(Variant::FixedGain);
    let mut ppo = PpoConfig::for_variant(Variant::FixedGain);
    ppo.total_iterations = iterations;
    ppo.seed = seed;
    let out = std::env::temp_dir().join(format!("ibrtune-fixed-seed{seed}"));
    let outcome = train(&TrainSetup::new(plant.clone(), env.clone(), ppo), &out)?;

    for s in outcome.stats.iter().step_by(5) {
        println!("iter {:3}  step reward {:+.4}", s.iter, s.step_reward_mean);
    }
    let gains = export_gains(&Checkpoint::load(&outcome.final_checkpoint)?)?;
    println!("exported kp={:.4} ki={:.4}", gains.kp, gains.ki);

    let before = run_pi_scenario(&plant, &env, PiGains::INITIAL, 0)?.metrics;
    let after = run_pi_scenario(&plant, &env, gains, 0)?.metrics;
    println!("             overshoot %   ITAE");
    println!("initial      {:10.4}   {:.4e}", before.overshoot_pct, before.itae);
    println!("trained      {:10.4}   {:.4e}", after.overshoot_pct, after.itae);
    println!("run directory {}", out.display());
    Ok(())
}
