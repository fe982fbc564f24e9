//! One run of a mixed population with favour tracking and 50% learning,
//! printing mean satisfaction per strategy against the daily optimum.
//!
//! ```text
//! cargo run --release --example typical_run -- [exchanges] [days] [seed]
//! ```

use slot_exchange::{Scenario, SimConfig, Simulation};

fn main() {
    let mut args = std::env::args().skip(1);
    let exchange_rounds: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let days: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let cfg = SimConfig {
        num_days: days,
        exchange_rounds,
        learning_rate: 0.5,
        social_capital: true,
        initial_social_fraction: Scenario::Mixed.initial_social_fraction(),
        seed,
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(cfg, 0).expect("valid configuration");
    println!("day  mean   social selfish optimum  social-agents rounds");
    for _ in 0..days {
        let d = sim.run_day();
        if d.day <= 10 || d.day.is_multiple_of(25) {
            println!(
                "{:>3}  {:.3}  {}  {}  {:.3}    {:>3}          {:>3}",
                d.day,
                d.mean_satisfaction,
                fmt(d.mean_sat_social),
                fmt(d.mean_sat_selfish),
                d.optimum,
                d.social_count,
                d.rounds_run
            );
        }
    }
    let totals = sim.ledger_totals();
    println!(
        "favours recorded {}, repaid {}, outstanding {}",
        totals.recorded, totals.repaid, totals.outstanding
    );
}

fn fmt(value: Option<f64>) -> String {
    value.map_or_else(|| "  -  ".to_string(), |v| format!("{v:.3}"))
}
