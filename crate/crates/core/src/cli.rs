//! Command-line front end.
//!
//! Values resolve in three layers: built-in defaults, then an optional TOML
//! config file, then flags. The resolved configuration is echoed into the
//! output bundle as a TOML file that `--config` accepts unchanged.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{write_bundle, OutputBundle};
use crate::config::{ConfigError, SimConfig};
use crate::experiments::{compare_social_capital, run_cell, Dataset, Scenario, SweepGrid};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag, bad value or infeasible configuration.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError::Usage(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SocialCapitalMode {
    On,
    Off,
    Both,
}

impl SocialCapitalMode {
    fn arms(self) -> Vec<bool> {
        match self {
            SocialCapitalMode::On => vec![true],
            SocialCapitalMode::Off => vec![false],
            SocialCapitalMode::Both => vec![true, false],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Mixed,
    PureSocial,
    PureSelfish,
}

impl From<ScenarioArg> for Scenario {
    fn from(arg: ScenarioArg) -> Self {
        match arg {
            ScenarioArg::Mixed => Scenario::Mixed,
            ScenarioArg::PureSocial => Scenario::PureSocial,
            ScenarioArg::PureSelfish => Scenario::PureSelfish,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "slot-exchange",
    version,
    about = "Run a time-slot exchange experiment grid and write a CSV bundle",
    args_override_self = true
)]
struct Flags {
    /// TOML file with any of the settings below (kebab-case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exchange rounds per day, comma separated.
    #[arg(long, value_delimiter = ',')]
    exchanges: Option<Vec<usize>>,
    /// Learning rates in [0, 1], comma separated.
    #[arg(long, value_delimiter = ',')]
    learning: Option<Vec<f64>>,
    #[arg(long)]
    days: Option<usize>,
    /// Runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    social_capital: Option<SocialCapitalMode>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long)]
    population: Option<usize>,
    /// Time-slots per day.
    #[arg(long)]
    slots: Option<usize>,
    /// Maximum agents per time-slot.
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    slots_per_agent: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write events.log with every request, decision, swap, ledger change
    /// and learning event.
    #[arg(long, value_enum)]
    events: Option<Toggle>,
}

/// Settings as they appear in a config file; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub scenario: Option<Scenario>,
    pub exchanges: Option<Vec<usize>>,
    pub learning: Option<Vec<f64>>,
    pub social_capital: Option<SocialCapitalMode>,
    pub days: Option<usize>,
    pub runs: Option<usize>,
    pub population: Option<usize>,
    pub slots: Option<usize>,
    pub capacity: Option<usize>,
    pub slots_per_agent: Option<usize>,
    pub events: Option<Toggle>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().replace('\n', " "))
    }

    /// `other` takes precedence.
    fn overlay(self, other: FileConfig) -> FileConfig {
        FileConfig {
            seed: other.seed.or(self.seed),
            scenario: other.scenario.or(self.scenario),
            exchanges: other.exchanges.or(self.exchanges),
            learning: other.learning.or(self.learning),
            social_capital: other.social_capital.or(self.social_capital),
            days: other.days.or(self.days),
            runs: other.runs.or(self.runs),
            population: other.population.or(self.population),
            slots: other.slots.or(self.slots),
            capacity: other.capacity.or(self.capacity),
            slots_per_agent: other.slots_per_agent.or(self.slots_per_agent),
            events: other.events.or(self.events),
            out_dir: other.out_dir.or(self.out_dir),
        }
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub grid: SweepGrid,
    /// Non-swept parameters; `seed` is the master seed.
    pub base: SimConfig,
    pub out_dir: PathBuf,
    pub events: bool,
}

impl Invocation {
    pub fn master_seed(&self) -> u64 {
        self.base.seed
    }

    fn social_capital_mode(&self) -> SocialCapitalMode {
        match self.grid.social_capital.as_slice() {
            [true] => SocialCapitalMode::On,
            [false] => SocialCapitalMode::Off,
            _ => SocialCapitalMode::Both,
        }
    }

    /// The echo written into the bundle. The output directory is left out
    /// so that identical experiments produce identical bundles wherever they
    /// are written.
    pub fn echo(&self) -> String {
        let file = FileConfig {
            seed: Some(self.base.seed),
            scenario: Some(self.grid.scenario),
            exchanges: Some(self.grid.exchange_rounds.clone()),
            learning: Some(self.grid.learning_rates.clone()),
            social_capital: Some(self.social_capital_mode()),
            days: Some(self.base.num_days),
            runs: Some(self.grid.runs_per_cell),
            population: Some(self.base.population_size),
            slots: Some(self.base.slots_per_day),
            capacity: Some(self.base.slot_capacity),
            slots_per_agent: Some(self.base.slots_per_agent),
            events: Some(if self.events { Toggle::On } else { Toggle::Off }),
            out_dir: None,
        };
        toml::to_string(&file).expect("config serializes")
    }
}

pub const DEFAULT_OUT_DIR: &str = "out";

fn resolve(file: FileConfig) -> Result<Invocation, CliError> {
    let defaults = SimConfig::default();
    let grid_defaults = SweepGrid::default();
    let grid = SweepGrid {
        exchange_rounds: file.exchanges.unwrap_or(grid_defaults.exchange_rounds),
        learning_rates: file.learning.unwrap_or(grid_defaults.learning_rates),
        social_capital: file
            .social_capital
            .unwrap_or(SocialCapitalMode::Both)
            .arms(),
        scenario: file.scenario.unwrap_or(grid_defaults.scenario),
        runs_per_cell: file.runs.unwrap_or(grid_defaults.runs_per_cell),
    };
    let base = SimConfig {
        population_size: file.population.unwrap_or(defaults.population_size),
        num_days: file.days.unwrap_or(defaults.num_days),
        slots_per_day: file.slots.unwrap_or(defaults.slots_per_day),
        slots_per_agent: file.slots_per_agent.unwrap_or(defaults.slots_per_agent),
        slot_capacity: file.capacity.unwrap_or(defaults.slot_capacity),
        runs: grid.runs_per_cell,
        seed: file.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    grid.validate()?;
    for key in grid.cells() {
        key.config(&base, grid.runs_per_cell, base.seed)
            .validate()?;
    }
    Ok(Invocation {
        grid,
        base,
        out_dir: file
            .out_dir
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        events: file.events == Some(Toggle::On),
    })
}

/// Outcome of argument parsing: either a run to perform or text (help,
/// version) to print.
#[derive(Debug)]
pub enum Parsed {
    Run(Invocation),
    Print(String),
}

pub fn parse_invocation<I, T>(args: I) -> Result<Parsed, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match Flags::try_parse_from(args) {
        Ok(flags) => flags,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(Parsed::Print(err.to_string()))
                }
                _ => {
                    let rendered = err.to_string();
                    let line = rendered.lines().next().unwrap_or("invalid arguments");
                    Err(CliError::Usage(
                        line.trim_start_matches("error: ").to_string(),
                    ))
                }
            };
        }
    };
    let from_file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            FileConfig::parse(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let from_flags = FileConfig {
        seed: flags.seed,
        scenario: flags.scenario.map(Scenario::from),
        exchanges: flags.exchanges,
        learning: flags.learning,
        social_capital: flags.social_capital,
        days: flags.days,
        runs: flags.runs,
        population: flags.population,
        slots: flags.slots,
        capacity: flags.capacity,
        slots_per_agent: flags.slots_per_agent,
        events: flags.events,
        out_dir: flags.out_dir,
    };
    resolve(from_file.overlay(from_flags)).map(Parsed::Run)
}

/// Simulates every cell of the invocation, in grid order.
pub fn simulate(
    inv: &Invocation,
    mut progress: impl FnMut(usize, usize),
) -> Result<Dataset, CliError> {
    let cells = inv.grid.cells();
    let mut results = Vec::with_capacity(cells.len());
    for (i, key) in cells.iter().enumerate() {
        progress(i, cells.len());
        results.push(run_cell(
            *key,
            &inv.base,
            inv.grid.runs_per_cell,
            inv.master_seed(),
            inv.events,
        )?);
    }
    Ok(Dataset { cells: results })
}

pub fn execute(
    inv: &Invocation,
    progress: impl FnMut(usize, usize),
) -> Result<OutputBundle, CliError> {
    let dataset = simulate(inv, progress)?;
    let tests = compare_social_capital(&dataset);
    write_bundle(&dataset, &tests, &inv.echo(), &inv.out_dir).map_err(|e| {
        CliError::Io(format!(
            "cannot write bundle to {}: {e}",
            inv.out_dir.display()
        ))
    })
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse_invocation(args) {
        Ok(Parsed::Run(inv)) => inv,
        Ok(Parsed::Print(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(err) => return fail(&err),
    };
    let quiet = std::env::var_os("SLOT_EXCHANGE_QUIET").is_some();
    let progress = |i: usize, n: usize| {
        if !quiet {
            eprintln!("cell {}/{}", i + 1, n);
        }
    };
    match execute(&inv, progress) {
        Ok(bundle) => {
            println!("{}", bundle.dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => fail(&err),
    }
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code())
}

/// Reads back an echoed config.
pub fn load_echo(path: &Path) -> Result<Invocation, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(e.to_string()))?;
    let file = FileConfig::parse(&text).map_err(CliError::Usage)?;
    resolve(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Invocation, CliError> {
        let argv = std::iter::once("slot-exchange").chain(args.iter().copied());
        match parse_invocation(argv)? {
            Parsed::Run(inv) => Ok(inv),
            Parsed::Print(_) => panic!("unexpected help"),
        }
    }

    #[test]
    fn no_arguments_give_defaults() {
        let inv = run(&[]).unwrap();
        assert_eq!(inv.grid, SweepGrid::default());
        assert_eq!(inv.base.population_size, 96);
        assert_eq!(inv.base.num_days, 500);
        assert_eq!(inv.base.slots_per_day, 24);
        assert_eq!(inv.base.slots_per_agent, 4);
        assert_eq!(inv.base.slot_capacity, 16);
        assert_eq!(inv.grid.runs_per_cell, 50);
        assert_eq!(inv.grid.cells().len(), 30);
        assert!(!inv.events);
    }

    #[test]
    fn flags_are_parsed() {
        let inv = run(&[
            "--exchanges",
            "1,50",
            "--learning",
            "0,0.5",
            "--days",
            "3",
            "--runs",
            "2",
            "--seed",
            "7",
            "--social-capital",
            "on",
            "--scenario",
            "pure-social",
            "--events",
            "on",
            "--out-dir",
            "x",
        ])
        .unwrap();
        assert_eq!(inv.grid.exchange_rounds, vec![1, 50]);
        assert_eq!(inv.grid.learning_rates, vec![0.0, 0.5]);
        assert_eq!(inv.grid.social_capital, vec![true]);
        assert_eq!(inv.grid.scenario, Scenario::PureSocial);
        assert_eq!(inv.base.num_days, 3);
        assert_eq!(inv.base.seed, 7);
        assert!(inv.events);
        assert_eq!(inv.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn infeasible_slots_per_agent_names_key() {
        let err = run(&["--slots-per-agent", "30"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("slots-per-agent"), "{err}");
        assert!(!err.to_string().contains('\n'));
    }

    #[test]
    fn unknown_and_unparsable_flags() {
        let err = run(&["--bogus", "1"]).unwrap_err();
        assert!(err.to_string().contains("--bogus"), "{err}");
        assert!(!err.to_string().contains('\n'));
        let err = run(&["--days", "many"]).unwrap_err();
        assert!(err.to_string().contains("--days"), "{err}");
        let err = run(&["--learning", "1.5"]).unwrap_err();
        assert!(err.to_string().contains("learning"), "{err}");
    }

    #[test]
    fn file_values_sit_between_defaults_and_flags() {
        let file = FileConfig::parse("days = 9\nruns = 4\nexchanges = [10]\n").unwrap();
        let flags = FileConfig {
            days: Some(2),
            ..FileConfig::default()
        };
        let inv = resolve(file.overlay(flags)).unwrap();
        assert_eq!(inv.base.num_days, 2);
        assert_eq!(inv.grid.runs_per_cell, 4);
        assert_eq!(inv.grid.exchange_rounds, vec![10]);
        assert!(FileConfig::parse("colour = 3")
            .unwrap_err()
            .contains("colour"));
    }

    #[test]
    fn echo_round_trips() {
        let inv = run(&[
            "--learning",
            "0.25,0.75",
            "--social-capital",
            "off",
            "--seed",
            "99",
        ])
        .unwrap();
        let again = resolve(FileConfig::parse(&inv.echo()).unwrap()).unwrap();
        assert_eq!(again.grid, inv.grid);
        assert_eq!(again.base, inv.base);
        assert_eq!(again.events, inv.events);
    }
}
