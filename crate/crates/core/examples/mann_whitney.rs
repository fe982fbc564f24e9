//! The rank-sum test on small hand-made samples and on two simulated arms.
//!
//! ```text
//! cargo run --release --example mann_whitney
//! ```

use slot_exchange::experiments::{run_cell, CellKey};
use slot_exchange::stats::{mann_whitney_exact, mann_whitney_normal};
use slot_exchange::{mann_whitney_u, Scenario, SimConfig};

fn main() {
    let a = [1.0, 2.0, 3.0, 3.0, 7.0];
    let b = [3.0, 4.0, 5.0, 6.0, 8.0, 9.0];
    let exact = mann_whitney_exact(&a, &b).unwrap();
    let normal = mann_whitney_normal(&a, &b).unwrap();
    println!("a={a:?} b={b:?}");
    println!("  exact  U={} p={:.4}", exact.u_statistic, exact.p_value);
    println!("  normal U={} p={:.4}", normal.u_statistic, normal.p_value);

    let base = SimConfig {
        num_days: 50,
        ..SimConfig::default()
    };
    let mut finals = Vec::new();
    for social_capital in [true, false] {
        let key = CellKey {
            scenario: Scenario::Mixed,
            exchange_rounds: 100,
            learning_rate: 0.5,
            social_capital,
        };
        let cell = run_cell(key, &base, 20, 11, false).expect("valid configuration");
        finals.push(cell.summary.final_day_sample);
    }
    let r = mann_whitney_u(&finals[0], &finals[1]).unwrap();
    println!(
        "day-50 satisfaction with vs without favour tracking (20 runs each): U={} p={:.2e} significant={}",
        r.u_statistic, r.p_value, r.significant_at_01
    );
}
