//! Adaptive-gain training followed by a deterministic evaluation episode
//! whose trace carries the time-varying (kp, ki) chosen by the agent.
//!
//!     cargo run --release --example train_adaptive -- [iterations] [seed]

use ibr_tune::env::{EnvConfig, Variant};
use ibr_tune::ppo::{evaluate_policy, train, PpoConfig, TrainSetup};
use ibr_tune::sim::PlantParams;

fn main() -> ibr_tune::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(100, |s| s.parse().expect("iterations"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));

    let plant = PlantParams::default();
    let env = EnvConfig::for_variant(Variant::AdaptiveGain);
    let mut ppo = PpoConfig::for_variant(Variant::AdaptiveGain);
    ppo.total_iterations = iterations;
    ppo.seed = seed;
    let out = std::env::temp_dir().join(format!("ibrtune-adaptive-seed{seed}"));
    let outcome = train(&TrainSetup::new(plant.clone(), env.clone(), ppo), &out)?;
    let first = &outcome.stats[0];
    let last = outcome.stats.last().expect("at least one iteration");
    println!(
        "step reward {:+.5} (iter {}) -> {:+.5} (iter {})",
        first.step_reward_mean, first.iter, last.step_reward_mean, last.iter
    );

    let traces = out.join("eval");
    let ep = &evaluate_policy(&outcome.policy, &plant, &env, 1, 0, Some(&traces))?[0];
    println!("evaluation reward {:.4}", ep.reward);
    for (name, g) in [("kp", ep.kp), ("ki", ep.ki)] {
        let g = g.expect("gains are reported");
        println!(
            "{name}: mean {:.4}, range [{:.4}, {:.4}], transient min {:.4} ({:.0} % of mean)",
            g.mean,
            g.min,
            g.max,
            g.transient_min,
            100.0 * g.transient_ratio()
        );
    }
    println!("trace {}", traces.join("episode_000.csv").display());
    Ok(())
}
