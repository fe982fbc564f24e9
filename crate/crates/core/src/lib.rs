//! Seedable simulation of a decentralized time-slot exchange.
//!
//! Households (agents) each want a few hour-long slots a day, start from a
//! random capacity-limited allocation and then trade slots pairwise through
//! an anonymous advertising board. Selfish agents only accept trades that
//! hand them a slot they want; social agents also accept neutral trades,
//! either to repay recorded favours or, when favours are not tracked,
//! unconditionally. At the end of each day some agents imitate better
//! satisfied peers.
//!
//! The crate is organised bottom-up: [`model`] and [`ledger`] hold the
//! domain types, [`protocol`] one exchange round, [`learning`] the
//! imitation step, [`engine`] days and runs, [`experiments`] sweeps and
//! comparisons, [`stats`] the Mann-Whitney test, and [`bundle`] / [`cli`]
//! the CSV output and command-line front end.

pub mod bundle;
pub mod cli;
pub mod config;
pub mod engine;
pub mod experiments;
pub mod learning;
pub mod ledger;
pub mod model;
pub mod protocol;
pub mod stats;

pub use config::{ConfigError, SimConfig};
pub use engine::{run_replicates, run_simulation, DayRecord, RunRecord, Simulation};
pub use experiments::{
    compare_social_capital, run_sweep, satisfaction_difference, CellKey, CellSummary, Dataset,
    Scenario, SweepGrid,
};
pub use ledger::FavourLedger;
pub use model::{AgentId, AllocationState, PreferenceSet, Satisfaction, SlotId, SlotSet, Strategy};
pub use stats::{mann_whitney_u, TestResult};
