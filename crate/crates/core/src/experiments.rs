//! Parameter sweeps, per-cell aggregation and the with/without favour
//! tracking comparison.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, SimConfig};
use crate::engine::{run_replicates, RunRecord};
use crate::stats::{mann_whitney_u, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PureSelfish,
    PureSocial,
    /// Starts from an even split of strategies.
    Mixed,
}

impl Scenario {
    pub fn initial_social_fraction(self) -> f64 {
        match self {
            Scenario::PureSelfish => 0.0,
            Scenario::PureSocial => 1.0,
            Scenario::Mixed => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PureSelfish => "pure-selfish",
            Scenario::PureSocial => "pure-social",
            Scenario::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pure-selfish" => Some(Scenario::PureSelfish),
            "pure-social" => Some(Scenario::PureSocial),
            "mixed" => Some(Scenario::Mixed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub exchange_rounds: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub social_capital: Vec<bool>,
    pub scenario: Scenario,
    pub runs_per_cell: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            exchange_rounds: vec![1, 50, 100, 150, 200],
            learning_rates: vec![0.0, 0.5, 1.0],
            social_capital: vec![true, false],
            scenario: Scenario::Mixed,
            runs_per_cell: 50,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let empty = |key: &'static str| ConfigError::Invalid {
            key,
            reason: "list must not be empty".into(),
        };
        if self.exchange_rounds.is_empty() {
            return Err(empty("exchanges"));
        }
        if self.learning_rates.is_empty() {
            return Err(empty("learning"));
        }
        if self.social_capital.is_empty() {
            return Err(empty("social-capital"));
        }
        if self.runs_per_cell == 0 {
            return Err(ConfigError::Invalid {
                key: "runs",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Cross product, ordered by favour tracking, then exchanges, then learning.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &social_capital in &self.social_capital {
            for &exchange_rounds in &self.exchange_rounds {
                for &learning_rate in &self.learning_rates {
                    cells.push(CellKey {
                        scenario: self.scenario,
                        exchange_rounds,
                        learning_rate,
                        social_capital,
                    });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub scenario: Scenario,
    pub exchange_rounds: usize,
    pub learning_rate: f64,
    pub social_capital: bool,
}

impl CellKey {
    /// Seed for the cell's runs, derived from the master seed and the cell
    /// coordinates, so the same cell gets the same runs whatever else is
    /// in the grid.
    pub fn seed(&self, master_seed: u64) -> u64 {
        let coords = [
            self.scenario as u64,
            self.exchange_rounds as u64,
            self.learning_rate.to_bits(),
            self.social_capital as u64,
        ];
        coords
            .iter()
            .fold(splitmix64(master_seed), |acc, &c| splitmix64(acc ^ c))
    }

    pub fn config(&self, base: &SimConfig, runs: usize, master_seed: u64) -> SimConfig {
        SimConfig {
            exchange_rounds: self.exchange_rounds,
            learning_rate: self.learning_rate,
            social_capital: self.social_capital,
            initial_social_fraction: self.scenario.initial_social_fraction(),
            runs,
            seed: self.seed(master_seed),
            ..base.clone()
        }
    }

    fn same_arm(&self, other: &CellKey) -> bool {
        self.scenario == other.scenario
            && self.exchange_rounds == other.exchange_rounds
            && self.learning_rate == other.learning_rate
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaySummary {
    pub day: usize,
    pub mean_satisfaction: f64,
    /// Averaged over the runs in which the strategy was present.
    pub mean_sat_social: Option<f64>,
    pub mean_sat_selfish: Option<f64>,
    pub social_proportion: f64,
    pub optimum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub key: CellKey,
    pub runs: usize,
    pub days: Vec<DaySummary>,
    /// Each run's population mean satisfaction on the last simulated day.
    pub final_day_sample: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub summary: CellSummary,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub cells: Vec<CellResult>,
}

impl Dataset {
    pub fn cell(&self, key: &CellKey) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.summary.key == *key)
    }
}

/// Order-independent mean: values are summed in sorted order.
fn mean(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn summarize_cell(key: CellKey, runs: &[RunRecord]) -> CellSummary {
    let num_days = runs.iter().map(|r| r.days.len()).min().unwrap_or(0);
    let mut days = Vec::with_capacity(num_days);
    let mut buf = Vec::with_capacity(runs.len());
    let mut column = |pick: &dyn Fn(&RunRecord) -> Option<f64>| {
        buf.clear();
        buf.extend(runs.iter().filter_map(pick));
        mean(&mut buf)
    };
    for d in 0..num_days {
        let population = |r: &RunRecord| (r.days[d].social_count + r.days[d].selfish_count) as f64;
        days.push(DaySummary {
            day: d + 1,
            mean_satisfaction: column(&|r| Some(r.days[d].mean_satisfaction)).unwrap_or(0.0),
            mean_sat_social: column(&|r| r.days[d].mean_sat_social),
            mean_sat_selfish: column(&|r| r.days[d].mean_sat_selfish),
            social_proportion: column(&|r| Some(r.days[d].social_count as f64 / population(r)))
                .unwrap_or(0.0),
            optimum: column(&|r| Some(r.days[d].optimum)).unwrap_or(0.0),
        });
    }
    CellSummary {
        key,
        runs: runs.len(),
        days,
        final_day_sample: runs
            .iter()
            .filter_map(|r| r.days.last().map(|d| d.mean_satisfaction))
            .collect(),
    }
}

pub fn run_cell(
    key: CellKey,
    base: &SimConfig,
    runs: usize,
    master_seed: u64,
    log_events: bool,
) -> Result<CellResult, ConfigError> {
    let cfg = key.config(base, runs, master_seed);
    let records = run_replicates(&cfg, log_events)?;
    Ok(CellResult {
        summary: summarize_cell(key, &records),
        runs: records,
    })
}

/// Every cell of `grid`, each with `grid.runs_per_cell` runs. Parameters
/// other than the swept ones come from `base`.
pub fn run_sweep(
    grid: &SweepGrid,
    base: &SimConfig,
    master_seed: u64,
    log_events: bool,
) -> Result<Dataset, ConfigError> {
    grid.validate()?;
    let cells = grid
        .cells()
        .into_par_iter()
        .map(|key| run_cell(key, base, grid.runs_per_cell, master_seed, log_events))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset { cells })
}

fn arm_pairs(dataset: &Dataset) -> Vec<(CellKey, Option<&CellResult>, Option<&CellResult>)> {
    let mut arms: Vec<(CellKey, Option<&CellResult>, Option<&CellResult>)> = Vec::new();
    for cell in &dataset.cells {
        let key = cell.summary.key;
        let slot = match arms.iter_mut().find(|(k, _, _)| k.same_arm(&key)) {
            Some(entry) => entry,
            None => {
                arms.push((key, None, None));
                arms.last_mut().expect("just pushed")
            }
        };
        if key.social_capital {
            slot.1 = Some(cell);
        } else {
            slot.2 = Some(cell);
        }
    }
    arms.sort_by(|(a, _, _), (b, _, _)| {
        (a.scenario as u8, a.exchange_rounds)
            .cmp(&(b.scenario as u8, b.exchange_rounds))
            .then(
                a.learning_rate
                    .partial_cmp(&b.learning_rate)
                    .unwrap_or(Ordering::Equal),
            )
    });
    arms
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scenario: Scenario,
    pub exchange_rounds: usize,
    pub learning_rate: f64,
    /// `None` when one of the two arms is missing from the dataset.
    pub result: Option<TestResult>,
}

/// Mann-Whitney test of last-day per-run means, with versus without
/// favour tracking, for every (exchanges, learning) pair in the dataset.
pub fn compare_social_capital(dataset: &Dataset) -> Vec<Comparison> {
    arm_pairs(dataset)
        .into_iter()
        .map(|(key, with, without)| Comparison {
            scenario: key.scenario,
            exchange_rounds: key.exchange_rounds,
            learning_rate: key.learning_rate,
            result: match (with, without) {
                (Some(w), Some(wo)) => {
                    mann_whitney_u(&w.summary.final_day_sample, &wo.summary.final_day_sample).ok()
                }
                _ => None,
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDifference {
    pub scenario: Scenario,
    pub exchange_rounds: usize,
    pub learning_rate: f64,
    /// Per day, mean satisfaction with favour tracking minus without.
    pub per_day: Vec<f64>,
}

/// Signed per-day differences for every pair present in both arms.
pub fn satisfaction_difference(dataset: &Dataset) -> Vec<CellDifference> {
    arm_pairs(dataset)
        .into_iter()
        .filter_map(|(key, with, without)| {
            let (with, without) = (with?, without?);
            Some(CellDifference {
                scenario: key.scenario,
                exchange_rounds: key.exchange_rounds,
                learning_rate: key.learning_rate,
                per_day: with
                    .summary
                    .days
                    .iter()
                    .zip(&without.summary.days)
                    .map(|(w, wo)| w.mean_satisfaction - wo.mean_satisfaction)
                    .collect(),
            })
        })
        .collect()
}
