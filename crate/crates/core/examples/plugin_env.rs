//! Builds the reference plugin, loads it through the C interface and checks
//! that it reproduces the in-process environment step for step.

use std::path::Path;

use ibr_tune::config::RunConfig;
use ibr_tune::env::{Environment, GainEnv, Variant};
use ibr_tune::plugin::{build_reference_plugin, load_plugin};

fn main() -> ibr_tune::Result<()> {
    let workspace = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let target = std::env::temp_dir().join("ibrtune-plugin-build");
    println!("building reference plugin (first run takes a while)...");
    let lib = build_reference_plugin(&workspace, &target)?;
    println!("plugin: {}", lib.display());

    let cfg = RunConfig::defaults(Variant::FixedGain);
    let mut plugin = load_plugin(&lib, &cfg.to_toml()?)?;
    let mut local = GainEnv::new(cfg.plant, cfg.env)?;
    println!("obs_dim {} act_dim {}", plugin.obs_dim(), plugin.act_dim());

    let mut obs_l = Environment::reset(&mut local, 3)?;
    let mut worst = max_diff(&plugin.reset(3)?, &obs_l);
    for k in 0..10_000 {
        let a = [obs_l[4] + 0.5 * obs_l[0], obs_l[5] + 0.01 * (k % 5) as f64];
        let p = plugin.step(&a)?;
        let l = Environment::step(&mut local, &a)?;
        assert_eq!((p.terminated, p.truncated), (l.terminated, l.truncated));
        worst = worst.max((p.reward - l.reward).abs()).max(max_diff(&p.obs, &l.obs));
        obs_l = l.obs;
        if l.terminated || l.truncated {
            obs_l = Environment::reset(&mut local, 3)?;
            worst = worst.max(max_diff(&plugin.reset(3)?, &obs_l));
        }
    }
    println!("10000 steps, max deviation plugin vs in-process: {worst:.3e}");
    Ok(())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
