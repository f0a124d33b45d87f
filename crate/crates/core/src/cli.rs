//! Command-line front end of the `ibrtune` binary.
//!
//! Settings precedence: variant defaults, then `--config` file, then flags.
//! Exit codes: 0 success, 1 usage, 2 configuration, 3 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, RESOLVED_CONFIG_FILE};
use crate::env::{run_pi_scenario, TraceWriter, Variant};
use crate::error::{Error, Result};
use crate::parallel::{bench_throughput, write_bench_csv, BoxedEnv};
use crate::plugin::PluginLibrary;
use crate::ppo::{evaluate_policy, export_gains, train_with, Checkpoint};
use crate::sim::PiGains;

#[derive(Debug, Parser)]
#[command(name = "ibrtune", version, about = "Tune GFL current-controller gains with PPO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a fixed-gain or adaptive-gain agent.
    Train(TrainArgs),
    /// Simulate the connection scenario under fixed PI gains.
    Sim(SimArgs),
    /// Run deterministic episodes of a trained checkpoint.
    Eval(EvalArgs),
    /// Measure rollout throughput for several worker counts.
    Bench(BenchArgs),
    /// Print the PI gains of a fixed-gain checkpoint.
    ExportGains(ExportArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// fixed or adaptive. Overrides the config file.
    #[arg(long)]
    pub model: Option<Variant>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Run directory. Defaults to `$IBR_TUNE_OUT/<model>-seed<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Suppress the per-iteration progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimArgs {
    #[arg(long)]
    pub kp: f64,
    #[arg(long)]
    pub ki: f64,
    /// Write the per-step trace CSV here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Simulated duration (s).
    #[arg(long)]
    pub episode_length: Option<f64>,
    /// Plant and environment settings; the model must be fixed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub episodes: usize,
    /// Directory for one trace CSV per episode.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    /// Config of the run; defaults to the `config.toml` of the checkpoint's
    /// run directory, then to the built-in defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated worker counts.
    #[arg(long, default_value = "1,2,4,8")]
    pub workers_list: String,
    /// Transitions collected per measurement.
    #[arg(long, default_value_t = 40_000)]
    pub steps: usize,
    #[arg(long)]
    pub model: Option<Variant>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write the CSV to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Sim(a) => cmd_sim(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::ExportGains(a) => cmd_export_gains(a),
    }
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::load(a.config.as_deref(), a.model)?;
    if let Some(seed) = a.seed {
        cfg.ppo.seed = seed;
    }
    if let Some(n) = a.workers {
        cfg.workers.n_workers = n;
    }
    if let Some(n) = a.iterations {
        cfg.ppo.total_iterations = n;
    }
    if let Some(out) = a.out {
        cfg.output_dir = Some(out);
    }
    let dir = cfg.run_dir();
    cfg.output_dir = Some(dir.clone());
    cfg.validate()?;
    cfg.write_resolved(&dir)?;

    let setup = cfg.train_setup();
    let total = cfg.ppo.total_iterations;
    let quiet = a.quiet;
    let progress = |s: &crate::ppo::IterationStats| {
        if !quiet {
            println!(
                "iter {}/{total} steps={} step_reward={:.5} kl={:.4} clip_frac={:.3}",
                s.iter, s.steps, s.step_reward_mean, s.approx_kl, s.clip_frac
            );
        }
    };
    let outcome = match &cfg.plugin {
        Some(path) => {
            let lib = PluginLibrary::load(path)?;
            let text = cfg.to_toml()?;
            train_with(&setup, &dir, move |_| Ok(Box::new(lib.create(&text)?) as BoxedEnv), progress)?
        }
        None => {
            let (plant, env) = (cfg.plant.clone(), cfg.env.clone());
            train_with(
                &setup,
                &dir,
                move |_| Ok(Box::new(crate::env::GainEnv::new(plant.clone(), env.clone())?) as BoxedEnv),
                progress,
            )?
        }
    };
    if let Some(g) = outcome.policy.pi_gains() {
        println!("kp={}, ki={}", g.kp, g.ki);
    }
    println!("final checkpoint: {}", outcome.final_checkpoint.display());
    Ok(())
}

fn cmd_sim(a: SimArgs) -> Result<()> {
    let mut cfg = RunConfig::load(a.config.as_deref(), None)?;
    if cfg.model != Variant::FixedGain {
        return Err(Error::Config("sim needs a fixed-gain config".into()));
    }
    if let Some(len) = a.episode_length {
        cfg.env.episode_length = len;
    }
    let gains = PiGains { kp: a.kp, ki: a.ki };
    let run = run_pi_scenario(&cfg.plant, &cfg.env, gains, a.seed)?;
    if let Some(path) = &a.trace {
        let mut w = TraceWriter::create(path)?;
        for row in &run.rows {
            w.write(row)?;
        }
        w.finish()?;
    }
    let m = run.metrics;
    println!(
        "overshoot_pct={:.6} settling_time={:.6} settled={} itae={:.6e}",
        m.overshoot_pct, m.settling_time, m.settled, m.itae
    );
    println!(
        "final_p={:.6} bus_v_min={:.6} bus_v_max={:.6} limit_violation={}",
        run.final_p, run.bus_voltage.0, run.bus_voltage.1, run.limit_violation
    );
    Ok(())
}

/// Config stored with a checkpoint: next to it or one level up.
fn config_near(checkpoint: &Path) -> Option<PathBuf> {
    checkpoint
        .ancestors()
        .skip(1)
        .take(2)
        .map(|d| d.join(RESOLVED_CONFIG_FILE))
        .find(|p| p.is_file())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let cfg_path = a.config.clone().or_else(|| config_near(&a.checkpoint));
    let cfg = match &cfg_path {
        Some(p) => RunConfig::load(Some(p), None)?,
        None => RunConfig::defaults(ck.variant),
    };
    if cfg.model != ck.variant {
        return Err(Error::Config(format!(
            "checkpoint is {} but the config describes {}",
            ck.variant, cfg.model
        )));
    }
    let policy = ck.policy()?;
    let eps = evaluate_policy(&policy, &cfg.plant, &cfg.env, a.episodes, a.seed, a.trace_dir.as_deref())?;
    for e in &eps {
        let mut line = format!(
            "episode={} reward={:.6} length={} terminated={}",
            e.episode, e.reward, e.length, e.terminated
        );
        if let Some(m) = e.metrics {
            line += &format!(" overshoot_pct={:.4} settling_time={:.5} itae={:.4e}", m.overshoot_pct, m.settling_time, m.itae);
        }
        if let (Some(kp), Some(ki)) = (e.kp, e.ki) {
            line += &format!(
                " kp_mean={:.4} kp_transient_min={:.4} ki_mean={:.4} ki_transient_min={:.4}",
                kp.mean, kp.transient_min, ki.mean, ki.transient_min
            );
        }
        println!("{line}");
    }
    let mean = eps.iter().map(|e| e.reward).sum::<f64>() / eps.len().max(1) as f64;
    println!("mean_reward={mean:.6}");
    Ok(())
}

/// Parses a comma-separated list of positive worker counts.
pub fn parse_workers_list(text: &str) -> Result<Vec<usize>> {
    let list: Vec<usize> = text
        .split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Usage(format!("malformed worker list {text:?}"))),
        })
        .collect::<Result<_>>()?;
    Ok(list)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let workers = parse_workers_list(&a.workers_list)?;
    let cfg = RunConfig::load(a.config.as_deref(), a.model)?;
    let rows = bench_throughput(&cfg.plant, &cfg.env, &workers, a.steps, cfg.ppo.seed)?;
    if let Some(path) = &a.out {
        let f = std::fs::File::create(path).map_err(|e| Error::io_path(path, e))?;
        write_bench_csv(&rows, f)?;
    }
    let mut out = std::io::stdout().lock();
    write_bench_csv(&rows, &mut out)?;
    out.flush().map_err(|e| Error::io("stdout", e))
}

fn cmd_export_gains(a: ExportArgs) -> Result<()> {
    let g = export_gains(&Checkpoint::load(&a.checkpoint)?)?;
    println!("kp={}, ki={}", g.kp, g.ki);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workers_list_parsing() {
        assert_eq!(parse_workers_list("1,2, 4").unwrap(), vec![1, 2, 4]);
        for bad in ["", "1,,2", "0", "a,b", "-1"] {
            assert!(matches!(parse_workers_list(bad), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn parse_failures_are_usage_errors() {
        assert_eq!(run(["ibrtune", "frobnicate"]), 1);
        assert_eq!(run(["ibrtune", "sim", "--kp", "1"]), 1);
    }

    #[test]
    fn negative_gain_is_usage_error() {
        assert_eq!(run(["ibrtune", "sim", "--kp", "-1", "--ki", "5"]), 1);
    }

    #[test]
    fn missing_checkpoint_is_runtime_error() {
        assert_eq!(run(["ibrtune", "export-gains", "--checkpoint", "/nonexistent.ckpt"]), 3);
    }
}
