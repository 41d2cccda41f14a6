//! File writers. Step CSVs carry only deterministic columns; wall-clock
//! goes to a sidecar so reruns produce byte-identical step files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::runner::RunOutcome;

/// Step CSV header, in column order.
pub const STEP_COLUMNS: [&str; 8] = [
    "step",
    "epoch",
    "candidate_index",
    "reward",
    "instantaneous_regret",
    "cumulative_regret",
    "q_t",
    "h_t",
];

pub const TIMING_COLUMNS: [&str; 2] = ["step", "elapsed_seconds"];

#[derive(Serialize)]
struct StepRow {
    step: usize,
    epoch: usize,
    candidate_index: usize,
    reward: f64,
    instantaneous_regret: f64,
    cumulative_regret: f64,
    q_t: usize,
    h_t: usize,
}

#[derive(Serialize)]
struct TimingRow {
    step: usize,
    elapsed_seconds: f64,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_step_csv(path: &Path, run: &RunOutcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let r = &run.result;
    for t in 0..r.len() {
        w.serialize(StepRow {
            step: t + 1,
            epoch: r.epoch_counts[t],
            candidate_index: r.choices[t],
            reward: r.rewards[t],
            instantaneous_regret: run.regret.instantaneous[t],
            cumulative_regret: run.regret.cumulative[t],
            q_t: r.unique_counts[t],
            h_t: r.epoch_counts[t],
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_timing_csv(path: &Path, run: &RunOutcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for (t, &s) in run.result.elapsed.iter().enumerate() {
        w.serialize(TimingRow {
            step: t + 1,
            elapsed_seconds: s,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// `runs/<combination>/seed-<seed>.csv` and its timing sidecar.
pub fn run_paths(root: &Path, combination_id: &str, seed: u64) -> (PathBuf, PathBuf) {
    let dir = root.join("runs").join(combination_id);
    (dir.join(format!("seed-{seed}.csv")), dir.join(format!("seed-{seed}.timing.csv")))
}
