//! A reduced sweep written as a CSV bundle, with the significance table.
//!
//! ```text
//! cargo run --release --example sweep_bundle -- [out-dir] [runs] [days]
//! ```

use std::path::PathBuf;

use slot_exchange::bundle::write_bundle;
use slot_exchange::{compare_social_capital, run_sweep, SimConfig, SweepGrid};

fn main() {
    let mut args = std::env::args().skip(1);
    let out: PathBuf = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| "sweep-out".into());
    let runs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let days: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let grid = SweepGrid {
        runs_per_cell: runs,
        ..SweepGrid::default()
    };
    let base = SimConfig {
        num_days: days,
        ..SimConfig::default()
    };
    let dataset = run_sweep(&grid, &base, 0, false).expect("valid grid");
    let tests = compare_social_capital(&dataset);

    println!("exchanges learning  p-value   significant");
    for t in &tests {
        match &t.result {
            Some(r) => println!(
                "{:>9} {:>7.0}%  {:.2e}  {}",
                t.exchange_rounds,
                t.learning_rate * 100.0,
                r.p_value,
                r.significant_at_01
            ),
            None => println!(
                "{:>9} {:>7.0}%  -",
                t.exchange_rounds,
                t.learning_rate * 100.0
            ),
        }
    }
    let echo = format!("days = {days}\nruns = {runs}\n");
    let bundle = write_bundle(&dataset, &tests, &echo, &out).expect("writable output directory");
    println!("bundle written to {}", bundle.dir.display());
}
