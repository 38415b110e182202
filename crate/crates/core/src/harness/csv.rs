use std::path::Path;

use crate::error::{Error, Result};
use crate::throughput::ThroughputReport;

use super::run::RunRecord;
use super::sweep::SweepRow;

/// A type written as CSV rows under a fixed header.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn row(&self) -> Vec<String>;
}

/// Nine significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes a header row and one line per record.
pub fn emit_csv<R: CsvRecord>(records: &[R], path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::invalid("no records to write"));
    }
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    w.write_record(R::header())?;
    for r in records {
        w.write_record(r.row())?;
    }
    w.flush().map_err(|e| Error::from(e).context(path.display().to_string()))?;
    Ok(())
}

/// One episode of a scheduling run.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRow {
    pub seed: u64,
    pub episode: usize,
    pub reward: f64,
}

impl CsvRecord for EpisodeRow {
    fn header() -> &'static [&'static str] {
        &["seed", "episode", "reward"]
    }

    fn row(&self) -> Vec<String> {
        vec![self.seed.to_string(), self.episode.to_string(), fmt_float(self.reward)]
    }
}

pub fn episode_rows(record: &RunRecord) -> Vec<EpisodeRow> {
    record
        .reward_trace
        .iter()
        .enumerate()
        .map(|(episode, &reward)| EpisodeRow {
            seed: record.seed,
            episode,
            reward,
        })
        .collect()
}

fn schedule_list(s: &[crate::scheduler::ScheduleMatrix]) -> String {
    s.iter().map(ToString::to_string).collect::<Vec<_>>().join(" | ")
}

impl CsvRecord for RunRecord {
    fn header() -> &'static [&'static str] {
        &["seed", "objective", "best_objective", "episodes", "schedules", "best_schedules", "config_hash", "run_hash"]
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            fmt_float(self.objective),
            fmt_float(self.best_objective),
            self.reward_trace.len().to_string(),
            schedule_list(&self.schedules),
            schedule_list(&self.best_schedules),
            self.config_hash.clone(),
            self.hash(),
        ]
    }
}

impl CsvRecord for SweepRow {
    fn header() -> &'static [&'static str] {
        &["elements", "rows", "cols", "ssim", "min_ssim", "psnr"]
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.elements.to_string(),
            self.rows.to_string(),
            self.cols.to_string(),
            fmt_float(self.ssim),
            fmt_float(self.min_ssim),
            fmt_float(self.psnr),
        ]
    }
}

/// One demand pair of one scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineRow {
    pub seed: u64,
    pub scheme: String,
    pub transmitter: usize,
    pub receiver: usize,
    pub served: usize,
    pub similarity: f64,
    pub sinr: f64,
    pub throughput: f64,
    pub gain: f64,
    pub parameters: usize,
}

/// Rows of a report, users numbered from 1.
pub fn baseline_rows(seed: u64, report: &ThroughputReport) -> Vec<BaselineRow> {
    report
        .pairs
        .iter()
        .map(|p| BaselineRow {
            seed,
            scheme: report.scheme.clone(),
            transmitter: p.pair.0 + 1,
            receiver: p.pair.1 + 1,
            served: p.served,
            similarity: p.similarity,
            sinr: p.sinr,
            throughput: p.throughput,
            gain: p.gain,
            parameters: report.parameter_count,
        })
        .collect()
}

impl CsvRecord for BaselineRow {
    fn header() -> &'static [&'static str] {
        &["seed", "scheme", "transmitter", "receiver", "served", "similarity", "sinr", "throughput", "gain", "parameters"]
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.scheme.clone(),
            self.transmitter.to_string(),
            self.receiver.to_string(),
            self.served.to_string(),
            fmt_float(self.similarity),
            fmt_float(self.sinr),
            fmt_float(self.throughput),
            fmt_float(self.gain),
            self.parameters.to_string(),
        ]
    }
}

/// Mean training loss of one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct LossRow {
    pub seed: u64,
    pub epoch: usize,
    pub loss: f64,
}

impl CsvRecord for LossRow {
    fn header() -> &'static [&'static str] {
        &["seed", "epoch", "loss"]
    }

    fn row(&self) -> Vec<String> {
        vec![self.seed.to_string(), self.epoch.to_string(), fmt_float(self.loss)]
    }
}
