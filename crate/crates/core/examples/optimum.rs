//! Best achievable mean satisfaction for random preference profiles.
//!
//! ```text
//! cargo run --release --example optimum -- [profiles] [seed]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slot_exchange::model::{generate_preferences, optimum_satisfaction};
use slot_exchange::SimConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let profiles: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let cfg = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let values: Vec<f64> = (0..profiles)
        .map(|_| optimum_satisfaction(&generate_preferences(&mut rng, &cfg), &cfg))
        .collect();
    let mean = values.iter().sum::<f64>() / profiles as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("{profiles} profiles: mean optimum {mean:.4}, range [{min:.4}, {max:.4}]");
}
