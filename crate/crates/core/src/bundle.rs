//! CSV output bundle.
//!
//! All files are UTF-8 with LF line endings and a header row. Fractions are
//! written with six decimals using `.` whatever the locale; a strategy
//! absent from a population yields an empty field, never `0`. Each file is
//! written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::engine::SimEvent;
use crate::experiments::{CellKey, Comparison, Dataset};
use crate::protocol::{LedgerChange, RoundEvent};

pub const CONFIG_FILE: &str = "config.toml";
pub const DAYS_FILE: &str = "days.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TESTS_FILE: &str = "tests.csv";
pub const EVENTS_FILE: &str = "events.log";

pub const DAYS_HEADER: &str = "run,day,scenario,exchanges,learning,social_capital,mean_satisfaction,\
mean_sat_social,mean_sat_selfish,social_count,optimum,exchanges_accepted,favours_recorded,favours_repaid";
pub const SUMMARY_HEADER: &str =
    "scenario,exchanges,learning,social_capital,day,runs,mean_satisfaction,\
mean_sat_social,mean_sat_selfish,social_proportion,optimum";
pub const TESTS_HEADER: &str = "exchanges,learning,u_statistic,p_value,significant";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputBundle {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub days: PathBuf,
    pub summary: PathBuf,
    pub tests: PathBuf,
    pub events: Option<PathBuf>,
}

fn fraction(value: f64) -> String {
    format!("{value:.6}")
}

fn optional(value: Option<f64>) -> String {
    value.map(fraction).unwrap_or_default()
}

fn cell_columns(key: &CellKey) -> String {
    format!(
        "{},{},{},{}",
        key.scenario.as_str(),
        key.exchange_rounds,
        fraction(key.learning_rate),
        key.social_capital
    )
}

pub fn render_days(dataset: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(DAYS_HEADER);
    out.push('\n');
    for cell in &dataset.cells {
        let key = cell_columns(&cell.summary.key);
        for run in &cell.runs {
            for d in &run.days {
                let _ = writeln!(
                    out,
                    "{},{},{key},{},{},{},{},{},{},{},{}",
                    run.run_index,
                    d.day,
                    fraction(d.mean_satisfaction),
                    optional(d.mean_sat_social),
                    optional(d.mean_sat_selfish),
                    d.social_count,
                    fraction(d.optimum),
                    d.exchanges_accepted,
                    d.favours_recorded,
                    d.favours_repaid,
                );
            }
        }
    }
    out
}

pub fn render_summary(dataset: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for cell in &dataset.cells {
        let key = cell_columns(&cell.summary.key);
        for d in &cell.summary.days {
            let _ = writeln!(
                out,
                "{key},{},{},{},{},{},{},{}",
                d.day,
                cell.summary.runs,
                fraction(d.mean_satisfaction),
                optional(d.mean_sat_social),
                optional(d.mean_sat_selfish),
                fraction(d.social_proportion),
                fraction(d.optimum),
            );
        }
    }
    out
}

/// Missing comparisons keep their coordinates with empty result fields.
pub fn render_tests(tests: &[Comparison]) -> String {
    let mut out = String::new();
    out.push_str(TESTS_HEADER);
    out.push('\n');
    for t in tests {
        let _ = match &t.result {
            Some(r) => writeln!(
                out,
                "{},{},{},{},{}",
                t.exchange_rounds,
                fraction(t.learning_rate),
                fraction(r.u_statistic),
                fraction(r.p_value),
                r.significant_at_01
            ),
            None => writeln!(
                out,
                "{},{},,,",
                t.exchange_rounds,
                fraction(t.learning_rate)
            ),
        };
    }
    out
}

fn event_line(out: &mut String, prefix: &str, event: &SimEvent) {
    let _ = match event {
        SimEvent::Round { day, round, event } => {
            let _ = write!(out, "{prefix} day={day} round={round} ");
            match event {
                RoundEvent::Request(r) => writeln!(
                    out,
                    "request requester={} receiver={} requested={} offered={}",
                    r.requester, r.receiver, r.requested_slot, r.offered_slot
                ),
                RoundEvent::Decision { request, decision } => writeln!(
                    out,
                    "decision receiver={} requester={} outcome={}",
                    request.receiver,
                    request.requester,
                    decision.as_str()
                ),
                RoundEvent::Swap(r) => writeln!(
                    out,
                    "swap requester={} receiver={} requested={} offered={}",
                    r.requester, r.receiver, r.requested_slot, r.offered_slot
                ),
                RoundEvent::SwapFailed(r) => writeln!(
                    out,
                    "swap-failed requester={} receiver={} requested={} offered={}",
                    r.requester, r.receiver, r.requested_slot, r.offered_slot
                ),
                RoundEvent::Ledger {
                    owner,
                    counterpart,
                    change,
                } => writeln!(
                    out,
                    "ledger owner={owner} counterpart={counterpart} delta={}",
                    match change {
                        LedgerChange::Recorded => "+1",
                        LedgerChange::Repaid => "-1",
                    }
                ),
            }
        }
        SimEvent::Learning { day, event } => writeln!(
            out,
            "{prefix} day={day} learning learner={} observed={} learner_sat={} observed_sat={} copied={}",
            event.learner,
            event.observed,
            fraction(event.learner_sat.value()),
            fraction(event.observed_sat.value()),
            event.copied
        ),
    };
}

pub fn render_events(dataset: &Dataset) -> Option<String> {
    if dataset
        .cells
        .iter()
        .all(|c| c.runs.iter().all(|r| r.events.is_empty()))
    {
        return None;
    }
    let mut out = String::new();
    for cell in &dataset.cells {
        let k = &cell.summary.key;
        for run in &cell.runs {
            let prefix = format!(
                "scenario={} exchanges={} learning={} social_capital={} run={}",
                k.scenario.as_str(),
                k.exchange_rounds,
                fraction(k.learning_rate),
                k.social_capital,
                run.run_index
            );
            for event in &run.events {
                event_line(&mut out, &prefix, event);
            }
        }
    }
    Some(out)
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the bundle into `dir`, creating it if needed.
pub fn write_bundle(
    dataset: &Dataset,
    tests: &[Comparison],
    config_echo: &str,
    dir: &Path,
) -> io::Result<OutputBundle> {
    fs::create_dir_all(dir)?;
    let bundle = OutputBundle {
        dir: dir.to_path_buf(),
        config: dir.join(CONFIG_FILE),
        days: dir.join(DAYS_FILE),
        summary: dir.join(SUMMARY_FILE),
        tests: dir.join(TESTS_FILE),
        events: None,
    };
    write_atomic(&bundle.config, config_echo)?;
    write_atomic(&bundle.days, &render_days(dataset))?;
    write_atomic(&bundle.summary, &render_summary(dataset))?;
    write_atomic(&bundle.tests, &render_tests(tests))?;
    let events = match render_events(dataset) {
        Some(text) => {
            let path = dir.join(EVENTS_FILE);
            write_atomic(&path, &text)?;
            Some(path)
        }
        None => None,
    };
    Ok(OutputBundle { events, ..bundle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Scenario;
    use crate::stats::{Method, TestResult};

    #[test]
    fn fractions_have_six_digits() {
        assert_eq!(fraction(0.5), "0.500000");
        assert_eq!(fraction(1.0 / 3.0), "0.333333");
        assert_eq!(optional(None), "");
    }

    #[test]
    fn tests_rows() {
        let rows = [
            Comparison {
                scenario: Scenario::Mixed,
                exchange_rounds: 100,
                learning_rate: 0.5,
                result: Some(TestResult {
                    u_statistic: 1800.0,
                    p_value: 0.0001234,
                    significant_at_01: true,
                    method: Method::Normal,
                }),
            },
            Comparison {
                scenario: Scenario::Mixed,
                exchange_rounds: 1,
                learning_rate: 0.0,
                result: None,
            },
        ];
        assert_eq!(
            render_tests(&rows),
            format!("{TESTS_HEADER}\n100,0.500000,1800.000000,0.000123,true\n1,0.000000,,,\n")
        );
    }
}
