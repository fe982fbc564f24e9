//! Days and runs.
//!
//! Each run owns one ChaCha8 stream: the master seed picks the key and the
//! run index picks the stream, so replicates are decorrelated and any run
//! can be reproduced on its own. Within a run the stream is consumed in a
//! fixed order: initial strategies once, then per day preferences,
//! allocation, each round's visiting order and request draws, and finally
//! learning.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ConfigError, SimConfig};
use crate::learning::{learning_step, LearningEvent};
use crate::ledger::FavourLedger;
use crate::model::{
    generate_preferences, initial_allocation, optimum_units, satisfaction, AgentId,
    AllocationState, PreferenceSet, Satisfaction, Strategy,
};
use crate::protocol::{run_exchange_round, RoundEvent, RoundInputs, RoundScratch, RoundStats};

pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Summary of one simulated day, measured after the last exchange round
/// and before learning.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    /// 1-based.
    pub day: usize,
    pub mean_satisfaction: f64,
    /// `None` when no agent used the strategy that day.
    pub mean_sat_social: Option<f64>,
    pub mean_sat_selfish: Option<f64>,
    pub social_count: usize,
    pub selfish_count: usize,
    pub optimum: f64,
    pub requests: u64,
    pub exchanges_accepted: u64,
    pub favours_recorded: u64,
    pub favours_repaid: u64,
    /// Rounds actually executed; the rest of the day is skipped once a
    /// round produces no request, since the board can no longer change.
    pub rounds_run: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LedgerTotals {
    pub outstanding: u64,
    pub recorded: u64,
    pub repaid: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimEvent {
    Round {
        day: usize,
        round: usize,
        event: RoundEvent,
    },
    Learning {
        day: usize,
        event: LearningEvent,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: u64,
    pub seed: u64,
    pub config: SimConfig,
    pub days: Vec<DayRecord>,
    pub ledgers: LedgerTotals,
    /// Empty unless event logging was requested.
    pub events: Vec<SimEvent>,
}

/// Hooks into the inside of a day.
pub trait DayObserver {
    fn on_allocation(&mut self, _state: &AllocationState, _prefs: &[PreferenceSet]) {}

    fn after_round(
        &mut self,
        _round: usize,
        _state: &AllocationState,
        _ledgers: &[FavourLedger],
        _stats: &RoundStats,
        _events: &[RoundEvent],
    ) {
    }

    fn after_learning(&mut self, _events: &[LearningEvent], _strategies: &[Strategy]) {}
}

impl DayObserver for () {}

/// Cross-day state of one run: strategies, ledgers and the random stream.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    run_index: u64,
    rng: ChaCha8Rng,
    strategies: Vec<Strategy>,
    ledgers: Vec<FavourLedger>,
    day: usize,
    scratch: RoundScratch,
    totals: LedgerTotals,
    log_events: bool,
    events: Vec<SimEvent>,
}

impl Simulation {
    pub fn new(cfg: SimConfig, run_index: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let mut rng = run_rng(cfg.seed, run_index);
        let n = cfg.population_size;
        let mut strategies = vec![Strategy::Selfish; n];
        for agent in index::sample(&mut rng, n, cfg.initial_social_count()).iter() {
            strategies[agent] = Strategy::Social;
        }
        Ok(Self {
            ledgers: (0..n)
                .map(|a| FavourLedger::new(AgentId::from(a)))
                .collect(),
            scratch: RoundScratch::new(cfg.slots_per_day, n),
            cfg,
            run_index,
            rng,
            strategies,
            day: 0,
            totals: LedgerTotals::default(),
            log_events: false,
            events: Vec::new(),
        })
    }

    pub fn with_event_log(mut self, enabled: bool) -> Self {
        self.log_events = enabled;
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn ledgers(&self) -> &[FavourLedger] {
        &self.ledgers
    }

    pub fn ledger_totals(&self) -> LedgerTotals {
        self.totals
    }

    pub fn take_events(&mut self) -> Vec<SimEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn run_day(&mut self) -> DayRecord {
        self.run_day_with(&mut ())
    }

    pub fn run_day_with<O: DayObserver + ?Sized>(&mut self, observer: &mut O) -> DayRecord {
        self.day += 1;
        let day = self.day;
        let cfg = &self.cfg;
        let prefs = generate_preferences(&mut self.rng, cfg);
        let mut state = initial_allocation(&mut self.rng, cfg);
        observer.on_allocation(&state, &prefs);

        let inputs = RoundInputs {
            prefs: &prefs,
            strategies: &self.strategies,
            social_capital: cfg.social_capital,
        };
        let mut day_stats = RoundStats::default();
        let mut round_events = Vec::new();
        let mut rounds_run = 0;
        for round in 1..=cfg.exchange_rounds {
            round_events.clear();
            let stats = run_exchange_round(
                &mut state,
                &inputs,
                &mut self.ledgers,
                &mut self.rng,
                &mut self.scratch,
                Some(&mut round_events),
            );
            rounds_run = round;
            day_stats.add(&stats);
            observer.after_round(round, &state, &self.ledgers, &stats, &round_events);
            if self.log_events {
                self.events
                    .extend(round_events.iter().map(|&event| SimEvent::Round {
                        day,
                        round,
                        event,
                    }));
            }
            if stats.requests == 0 {
                break;
            }
        }

        let sats: Vec<Satisfaction> = prefs
            .iter()
            .enumerate()
            .map(|(agent, &pref)| satisfaction(state.holdings(AgentId::from(agent)), pref))
            .collect();
        let record = self.summarize(day, &prefs, &sats, &day_stats, rounds_run);

        let learned = learning_step(
            &mut self.strategies,
            &sats,
            self.cfg.learners_per_day(),
            &mut self.rng,
        );
        observer.after_learning(&learned, &self.strategies);
        if self.log_events {
            self.events.extend(
                learned
                    .into_iter()
                    .map(|event| SimEvent::Learning { day, event }),
            );
        }

        self.totals.recorded += day_stats.favours_recorded as u64;
        self.totals.repaid += day_stats.favours_repaid as u64;
        self.totals.outstanding = self.ledgers.iter().map(FavourLedger::total_owed).sum();
        record
    }

    fn summarize(
        &self,
        day: usize,
        prefs: &[PreferenceSet],
        sats: &[Satisfaction],
        stats: &RoundStats,
        rounds_run: usize,
    ) -> DayRecord {
        let k = self.cfg.slots_per_agent as f64;
        let mut units = [0u64; 2];
        let mut counts = [0usize; 2];
        for (sat, strategy) in sats.iter().zip(&self.strategies) {
            let slot = (*strategy == Strategy::Social) as usize;
            units[slot] += sat.matched as u64;
            counts[slot] += 1;
        }
        let mean_of = |i: usize| (counts[i] > 0).then(|| units[i] as f64 / (counts[i] as f64 * k));
        let n = sats.len() as f64;
        DayRecord {
            day,
            mean_satisfaction: (units[0] + units[1]) as f64 / (n * k),
            mean_sat_social: mean_of(1),
            mean_sat_selfish: mean_of(0),
            social_count: counts[1],
            selfish_count: counts[0],
            optimum: optimum_units(prefs, &self.cfg) as f64 / (n * k),
            requests: stats.requests as u64,
            exchanges_accepted: stats.accepted() as u64,
            favours_recorded: stats.favours_recorded as u64,
            favours_repaid: stats.favours_repaid as u64,
            rounds_run,
        }
    }

    pub fn into_record(self, days: Vec<DayRecord>) -> RunRecord {
        RunRecord {
            run_index: self.run_index,
            seed: self.cfg.seed,
            ledgers: self.totals,
            config: self.cfg,
            days,
            events: self.events,
        }
    }
}

/// One run of `cfg.num_days` days on stream `run_index`.
pub fn run_simulation(cfg: &SimConfig, run_index: u64) -> Result<RunRecord, ConfigError> {
    run_simulation_logged(cfg, run_index, false)
}

pub fn run_simulation_logged(
    cfg: &SimConfig,
    run_index: u64,
    log_events: bool,
) -> Result<RunRecord, ConfigError> {
    let mut sim = Simulation::new(cfg.clone(), run_index)?.with_event_log(log_events);
    let days = (0..cfg.num_days).map(|_| sim.run_day()).collect();
    Ok(sim.into_record(days))
}

/// `cfg.runs` independent runs, in run-index order.
pub fn run_replicates(cfg: &SimConfig, log_events: bool) -> Result<Vec<RunRecord>, ConfigError> {
    cfg.validate()?;
    (0..cfg.runs as u64)
        .into_par_iter()
        .map(|run| run_simulation_logged(cfg, run, log_events))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            num_days: 5,
            exchange_rounds: 20,
            runs: 3,
            seed: 11,
            ..SimConfig::default()
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = small();
        assert_eq!(
            run_simulation(&cfg, 0).unwrap(),
            run_simulation(&cfg, 0).unwrap()
        );
        assert_ne!(
            run_simulation(&cfg, 0).unwrap().days,
            run_simulation(&cfg, 1).unwrap().days
        );
    }

    #[test]
    fn record_shape() {
        let cfg = small();
        let record = run_simulation(&cfg, 2).unwrap();
        assert_eq!(record.days.len(), 5);
        for (i, day) in record.days.iter().enumerate() {
            assert_eq!(day.day, i + 1);
            assert_eq!(day.social_count + day.selfish_count, 96);
            assert!(day.mean_satisfaction <= day.optimum + 1e-12);
            assert!((0.0..=1.0).contains(&day.mean_satisfaction));
        }
    }

    #[test]
    fn closed_social_population_stays_social() {
        let cfg = SimConfig {
            initial_social_fraction: 1.0,
            learning_rate: 0.0,
            ..small()
        };
        let record = run_simulation(&cfg, 0).unwrap();
        assert!(record
            .days
            .iter()
            .all(|d| d.selfish_count == 0 && d.mean_sat_selfish.is_none()));
    }

    #[test]
    fn infeasible_config_is_rejected() {
        let cfg = SimConfig {
            slot_capacity: 1,
            ..small()
        };
        assert!(Simulation::new(cfg, 0).is_err());
    }

    #[test]
    fn everyone_satisfied_when_k_equals_slots() {
        let cfg = SimConfig {
            population_size: 4,
            slots_per_day: 3,
            slots_per_agent: 3,
            slot_capacity: 4,
            ..small()
        };
        let record = run_simulation(&cfg, 0).unwrap();
        for day in &record.days {
            assert_eq!(day.mean_satisfaction, 1.0);
            assert_eq!(day.requests, 0);
            assert_eq!(day.rounds_run, 1);
        }
    }

    #[test]
    fn replicates_match_individual_runs() {
        let cfg = small();
        let all = run_replicates(&cfg, false).unwrap();
        assert_eq!(all.len(), 3);
        for (i, record) in all.iter().enumerate() {
            assert_eq!(record.run_index, i as u64);
            assert_eq!(record, &run_simulation(&cfg, i as u64).unwrap());
        }
    }

    #[test]
    fn social_capital_records_favours_early() {
        let cfg = SimConfig {
            initial_social_fraction: 1.0,
            learning_rate: 0.0,
            exchange_rounds: 50,
            num_days: 1,
            ..small()
        };
        let record = run_simulation(&cfg, 0).unwrap();
        assert!(record.days[0].favours_recorded >= 1);
        assert_eq!(
            record.ledgers.outstanding,
            record.ledgers.recorded - record.ledgers.repaid
        );
    }
}
