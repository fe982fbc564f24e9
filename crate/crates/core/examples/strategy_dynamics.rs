//! Mixed populations under payoff-biased learning: how the share of social
//! agents evolves with and without favour tracking.
//!
//! ```text
//! cargo run --release --example strategy_dynamics -- [runs] [days] [exchanges,...]
//! ```

use slot_exchange::experiments::{run_cell, CellKey};
use slot_exchange::{Scenario, SimConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let days: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let exchanges: Vec<usize> = args
        .next()
        .map(|a| a.split(',').filter_map(|x| x.parse().ok()).collect())
        .unwrap_or_else(|| vec![1, 50, 100, 150, 200]);
    let base = SimConfig {
        num_days: days,
        ..SimConfig::default()
    };
    let probe: Vec<usize> = [1, 50, 100, 250, 500]
        .into_iter()
        .filter(|&d| d <= days)
        .collect();

    for social_capital in [true, false] {
        for learning_rate in [0.0, 0.5, 1.0] {
            println!(
                "{} favour tracking, learning {:.0}%",
                if social_capital { "with" } else { "without" },
                learning_rate * 100.0
            );
            for &exchange_rounds in &exchanges {
                let key = CellKey {
                    scenario: Scenario::Mixed,
                    exchange_rounds,
                    learning_rate,
                    social_capital,
                };
                let cell = run_cell(key, &base, runs, 7, false).expect("valid configuration");
                let d = &cell.summary.days;
                let share: Vec<String> = probe
                    .iter()
                    .map(|&day| format!("{:.2}", d[day - 1].social_proportion))
                    .collect();
                let last = &d[days - 1];
                println!(
                    "  exchanges {exchange_rounds:>3}: social share {}  last-day satisfaction {:.3} (social {} selfish {})",
                    share.join(" "),
                    last.mean_satisfaction,
                    fmt(last.mean_sat_social),
                    fmt(last.mean_sat_selfish),
                );
            }
        }
    }
}

fn fmt(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}
