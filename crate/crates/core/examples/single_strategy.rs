//! Single-strategy populations: selfish, social without favour tracking and
//! social with favour tracking, with no learning.
//!
//! Prints mean satisfaction on a few days for each exchange budget next to
//! the mean optimum.
//!
//! ```text
//! cargo run --release --example single_strategy -- [runs] [days]
//! ```

use std::time::Instant;

use slot_exchange::experiments::{run_cell, CellKey};
use slot_exchange::{Scenario, SimConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let days: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let base = SimConfig {
        num_days: days,
        ..SimConfig::default()
    };
    let probe_days: Vec<usize> = [1, 10, 50, 100, 200, 500]
        .into_iter()
        .filter(|&d| d <= days)
        .collect();

    let arms = [
        ("selfish", Scenario::PureSelfish, false),
        ("social -SC", Scenario::PureSocial, false),
        ("social +SC", Scenario::PureSocial, true),
    ];
    for (label, scenario, social_capital) in arms {
        println!("{label}");
        for exchange_rounds in [1, 50, 100, 150, 200] {
            let key = CellKey {
                scenario,
                exchange_rounds,
                learning_rate: 0.0,
                social_capital,
            };
            let started = Instant::now();
            let cell = run_cell(key, &base, runs, 2024, false).expect("valid configuration");
            let summary = &cell.summary;
            let optimum =
                summary.days.iter().map(|d| d.optimum).sum::<f64>() / summary.days.len() as f64;
            let cols: Vec<String> = probe_days
                .iter()
                .map(|&d| format!("d{d}={:.3}", summary.days[d - 1].mean_satisfaction))
                .collect();
            println!(
                "  exchanges {exchange_rounds:>3}: {}  optimum={optimum:.3}  ({:.1?})",
                cols.join(" "),
                started.elapsed()
            );
        }
    }
}
