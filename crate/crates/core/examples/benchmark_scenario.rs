//! GFL connection scenario under the initial and the reference trained PI
//! gains. Writes one trace CSV per gain pair into the directory given as
//! the first argument (default: the system temp dir).
//!
//!     cargo run --example benchmark_scenario -- /tmp/traces

use std::path::PathBuf;

use ibr_tune::env::{run_pi_scenario, EnvConfig, TraceWriter};
use ibr_tune::sim::{PiGains, PlantParams};

fn main() -> ibr_tune::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir).map_err(|e| ibr_tune::Error::io_path(&dir, e))?;
    let plant = PlantParams::default();
    let env = EnvConfig::fixed_gain();

    for gains in [PiGains::INITIAL, PiGains { kp: 1.4406, ki: 12.7927 }] {
        let run = run_pi_scenario(&plant, &env, gains, 0)?;
        let path = dir.join(format!("sim_kp{}_ki{}.csv", gains.kp, gains.ki));
        let mut w = TraceWriter::create(&path)?;
        for row in &run.rows {
            w.write(row)?;
        }
        w.finish()?;

        let m = run.metrics;
        println!("kp={} ki={}", gains.kp, gains.ki);
        println!("  overshoot   {:.4} %", m.overshoot_pct);
        println!("  settling    {:.2} ms", m.settling_time * 1e3);
        println!("  ITAE        {:.4e}", m.itae);
        println!("  final P     {:.5} pu", run.final_p);
        println!("  bus |V|     [{:.4}, {:.4}] pu", run.bus_voltage.0, run.bus_voltage.1);
        println!("  trace       {}", path.display());
    }
    Ok(())
}
