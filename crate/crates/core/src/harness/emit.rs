use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::experiments::PhaseRow;
use super::metrics::{MetricsRow, RunLog};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> EmitError + '_ {
    move |source| EmitError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_metrics_csv(log: &RunLog, path: &Path) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in log.rows() {
        w.serialize(row).map_err(csv_err(path))?;
    }
    // a log with no rows still gets its header
    if log.records.is_empty() {
        w.write_record(super::metrics::CSV_HEADER.split(',')).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>, EmitError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

/// One JSON object per step.
pub fn write_jsonl(log: &RunLog, path: &Path) -> Result<(), EmitError> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(io(path))?);
    for rec in &log.records {
        serde_json::to_writer(&mut w, rec).map_err(|source| EmitError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        w.write_all(b"\n").map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

/// Writes `metrics.csv` and `steps.jsonl` under `dir`.
pub fn write_run(log: &RunLog, dir: &Path) -> Result<(), EmitError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    write_metrics_csv(log, &dir.join("metrics.csv"))?;
    write_jsonl(log, &dir.join("steps.jsonl"))
}

pub fn write_phase_table(rows: &[PhaseRow], path: &Path) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::metrics::StepRecord;

    fn row(step: u64, gap: Option<f64>) -> MetricsRow {
        MetricsRow {
            step,
            grounded_acc: gap.map(|g| 0.5 - g / 2.0),
            intrinsic_mean: gap.map(|g| 0.5 + g / 2.0),
            gap,
            eligibility: gap.map(|_| 0.875),
            pool_size: 24 + step as usize,
            proposer_reward: gap.map(|_| 1.0 / 3.0),
            holdout_acc: (step == 0).then_some(0.42),
            epsilon: 0.05,
        }
    }

    #[test]
    fn csv_header_and_round_trip() {
        let log = RunLog {
            label: "II+off".into(),
            records: [row(0, None), row(1, Some(0.1)), row(2, Some(-0.3))]
                .into_iter()
                .map(|metrics| StepRecord {
                    label: "II+off".into(),
                    metrics,
                    switched_from: None,
                    proposals: Vec::new(),
                    batch: Vec::new(),
                    rollouts: None,
                    proposer_update: None,
                    solver_update: None,
                })
                .collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_run(&log, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        assert_eq!(text.lines().next().unwrap(), crate::harness::CSV_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "0,,,,,24,,0.42,0.05");
        let back = read_metrics_csv(&dir.path().join("metrics.csv")).unwrap();
        assert_eq!(back, log.rows().cloned().collect::<Vec<_>>());
        let jsonl = fs::read_to_string(dir.path().join("steps.jsonl")).unwrap();
        assert_eq!(jsonl.lines().count(), 3);
        let first: StepRecord = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
        assert_eq!(first, log.records[0]);
    }
}
