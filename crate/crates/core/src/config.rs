//! Simulation parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of daily time-slots supported by the bitset representation.
pub const MAX_SLOTS_PER_DAY: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    /// `key` uses the command-line spelling of the offending parameter.
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

impl ConfigError {
    pub fn key(&self) -> &'static str {
        match self {
            ConfigError::Invalid { key, .. } => key,
        }
    }

    fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key,
            reason: reason.into(),
        }
    }
}

/// Parameters of one simulated population.
///
/// Defaults follow the constant parameter table: 96 agents, 500 days,
/// 24 slots a day, 4 slots per agent, at most 16 agents per slot and
/// 50 runs. The swept parameters (`exchange_rounds`, `learning_rate`,
/// `social_capital`) default to the illustrative run: 100 rounds,
/// 50% learning, favour tracking on, starting from a 50:50 population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub population_size: usize,
    pub num_days: usize,
    pub slots_per_day: usize,
    pub slots_per_agent: usize,
    pub slot_capacity: usize,
    pub exchange_rounds: usize,
    pub learning_rate: f64,
    pub social_capital: bool,
    pub initial_social_fraction: f64,
    pub runs: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            population_size: 96,
            num_days: 500,
            slots_per_day: 24,
            slots_per_agent: 4,
            slot_capacity: 16,
            exchange_rounds: 100,
            learning_rate: 0.5,
            social_capital: true,
            initial_social_fraction: 0.5,
            runs: 50,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts: [(&'static str, usize); 7] = [
            ("population", self.population_size),
            ("days", self.num_days),
            ("slots", self.slots_per_day),
            ("slots-per-agent", self.slots_per_agent),
            ("capacity", self.slot_capacity),
            ("exchanges", self.exchange_rounds),
            ("runs", self.runs),
        ];
        for (key, value) in counts {
            if value == 0 {
                return Err(ConfigError::invalid(key, "must be at least 1"));
            }
        }
        if self.slots_per_day > MAX_SLOTS_PER_DAY {
            return Err(ConfigError::invalid(
                "slots",
                format!("at most {MAX_SLOTS_PER_DAY} slots per day are supported"),
            ));
        }
        if self.slots_per_agent > self.slots_per_day {
            return Err(ConfigError::invalid(
                "slots-per-agent",
                format!(
                    "{} exceeds the {} slots available per day",
                    self.slots_per_agent, self.slots_per_day
                ),
            ));
        }
        let demand = self.population_size as u128 * self.slots_per_agent as u128;
        let supply = self.slots_per_day as u128 * self.slot_capacity as u128;
        if demand > supply {
            return Err(ConfigError::invalid(
                "capacity",
                format!(
                    "{} agents x {} slots need {demand} allocations but only {supply} exist",
                    self.population_size, self.slots_per_agent
                ),
            ));
        }
        for (key, value) in [
            ("learning", self.learning_rate),
            ("initial-social-fraction", self.initial_social_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::invalid(
                    key,
                    format!("{value} is outside [0, 1]"),
                ));
            }
        }
        Ok(())
    }

    /// Agents relearning at the end of each day.
    pub fn learners_per_day(&self) -> usize {
        floor_fraction(self.learning_rate, self.population_size)
    }

    /// Agents starting a run with the social strategy.
    pub fn initial_social_count(&self) -> usize {
        floor_fraction(self.initial_social_fraction, self.population_size)
    }
}

/// `floor(fraction * n)`, robust to fractions like 0.29 that are not
/// exactly representable.
pub(crate) fn floor_fraction(fraction: f64, n: usize) -> usize {
    let scaled = fraction * n as f64;
    let rounded = scaled.round();
    let value = if (scaled - rounded).abs() < 1e-9 {
        rounded
    } else {
        scaled.floor()
    };
    (value.max(0.0) as usize).min(n)
}
