mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_optimum, enumerated_p, InvariantChecker};
use slot_exchange::experiments::summarize_cell;
use slot_exchange::model::{generate_preferences, initial_allocation, optimum_units, slots};
use slot_exchange::stats::{mann_whitney_exact, mann_whitney_normal};
use slot_exchange::{
    mann_whitney_u, run_simulation, CellKey, PreferenceSet, Scenario, SimConfig, Simulation,
    Strategy as AgentStrategy,
};

fn small_config() -> impl Strategy<Value = SimConfig> {
    (2usize..=7, 2usize..=6)
        .prop_flat_map(|(n, s)| (Just(n), Just(s), 1usize..=s.min(3)))
        .prop_flat_map(|(n, s, k)| {
            let min_cap = (n * k).div_ceil(s);
            (Just(n), Just(s), Just(k), min_cap..=n)
        })
        .prop_map(|(n, s, k, c)| SimConfig {
            population_size: n,
            slots_per_day: s,
            slots_per_agent: k,
            slot_capacity: c,
            ..SimConfig::default()
        })
}

fn sample(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..6).prop_map(f64::from), 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_matches_exhaustive_assignment(cfg in small_config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prefs = generate_preferences(&mut rng, &cfg);
        prop_assert_eq!(
            optimum_units(&prefs, &cfg),
            brute_force_optimum(&prefs, cfg.slots_per_day, cfg.slot_capacity)
        );
    }

    #[test]
    fn handmade_profiles_match_exhaustive_assignment(
        raw in prop::collection::vec(prop::collection::btree_set(0usize..5, 2), 1..=6),
        capacity in 2usize..=6,
    ) {
        let cfg = SimConfig {
            population_size: raw.len(),
            slots_per_day: 5,
            slots_per_agent: 2,
            slot_capacity: capacity,
            ..SimConfig::default()
        };
        let prefs: Vec<PreferenceSet> = raw.iter().map(|s| PreferenceSet::new(slots(s.iter().copied()))).collect();
        prop_assert_eq!(optimum_units(&prefs, &cfg), brute_force_optimum(&prefs, 5, capacity));
    }

    #[test]
    fn allocation_is_feasible(cfg in small_config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = initial_allocation(&mut rng, &cfg);
        prop_assert!(state.check(cfg.slots_per_agent, cfg.slot_capacity).is_ok());
    }

    #[test]
    fn mann_whitney_is_symmetric(a in sample(10), b in sample(10)) {
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!((ab.u_statistic + ba.u_statistic - (a.len() * b.len()) as f64).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert_eq!(ab.significant_at_01, ab.p_value < 0.01);
    }

    #[test]
    fn exact_test_matches_enumeration(a in sample(6), b in sample(6)) {
        let (u, p) = enumerated_p(&a, &b);
        let r = mann_whitney_exact(&a, &b).unwrap();
        prop_assert_eq!(r.u_statistic, u);
        prop_assert!((r.p_value - p).abs() < 1e-9, "{} vs {}", r.p_value, p);
    }

    #[test]
    fn normal_approximation_tracks_exact_for_moderate_samples(
        a in prop::collection::vec(0.0f64..1.0, 10..=14),
        b in prop::collection::vec(0.0f64..1.0, 10..=14),
    ) {
        let exact = mann_whitney_exact(&a, &b).unwrap();
        let normal = mann_whitney_normal(&a, &b).unwrap();
        prop_assert!((exact.p_value - normal.p_value).abs() < 0.02, "{} vs {}", exact.p_value, normal.p_value);
    }

    #[test]
    fn aggregation_ignores_run_order(seed in any::<u64>(), rotate in 0usize..4) {
        let cfg = SimConfig { num_days: 3, exchange_rounds: 5, runs: 4, seed, ..SimConfig::default() };
        let mut runs: Vec<_> = (0..4).map(|r| run_simulation(&cfg, r).unwrap()).collect();
        let key = CellKey { scenario: Scenario::Mixed, exchange_rounds: 5, learning_rate: 0.5, social_capital: true };
        let first = summarize_cell(key, &runs);
        runs.rotate_left(rotate);
        runs.swap(0, 3);
        let second = summarize_cell(key, &runs);
        prop_assert_eq!(first.days, second.days);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulated_days_keep_invariants(
        seed in any::<u64>(),
        social_capital in any::<bool>(),
        learning in prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]),
        exchanges in 1usize..40,
    ) {
        let cfg = SimConfig { exchange_rounds: exchanges, learning_rate: learning, social_capital, seed, ..SimConfig::default() };
        let mut checker = InvariantChecker::new(cfg.slot_capacity, social_capital, cfg.learners_per_day());
        let mut sim = Simulation::new(cfg, 0).unwrap();
        for _ in 0..4 {
            let d = sim.run_day_with(&mut checker);
            prop_assert_eq!(d.social_count + d.selfish_count, 96);
            prop_assert!((0.0..=1.0).contains(&d.mean_satisfaction));
            prop_assert!(d.mean_satisfaction <= d.optimum + 1e-12);
        }
        prop_assert!(checker.violations.is_empty(), "{:?}", checker.violations);
    }

    #[test]
    fn selfish_populations_never_give_favours(seed in any::<u64>(), social_capital in any::<bool>()) {
        let cfg = SimConfig {
            exchange_rounds: 30,
            initial_social_fraction: 0.0,
            social_capital,
            seed,
            ..SimConfig::default()
        };
        let mut checker = InvariantChecker::new(16, social_capital, cfg.learners_per_day());
        let mut sim = Simulation::new(cfg, 0).unwrap().with_event_log(true);
        for _ in 0..3 {
            let d = sim.run_day_with(&mut checker);
            prop_assert_eq!(d.favours_repaid, 0);
            prop_assert_eq!(d.social_count, 0);
        }
        prop_assert_eq!(checker.repays, 0);
        prop_assert_eq!(checker.swaps, checker.beneficial);
        prop_assert!(checker.violations.is_empty(), "{:?}", checker.violations);
    }

    #[test]
    fn extinct_strategies_stay_extinct(seed in any::<u64>(), social in any::<bool>()) {
        let cfg = SimConfig {
            exchange_rounds: 10,
            learning_rate: 1.0,
            initial_social_fraction: if social { 1.0 } else { 0.0 },
            seed,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg, 0).unwrap();
        let only = if social { AgentStrategy::Social } else { AgentStrategy::Selfish };
        for _ in 0..5 {
            sim.run_day();
            prop_assert!(sim.strategies().iter().all(|&s| s == only));
        }
    }
}
