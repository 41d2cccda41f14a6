//! Per-combination summary documents (the JSON files next to the CSVs).

use std::path::Path;

use mini_gp::metrics::{RunSeries, Z95};
use mini_gp::summarize;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::runner::{BoundCheck, RunOutcome};
use crate::sweep::Combination;

pub const SUMMARY_VERSION: u32 = 1;

/// Mean curve with its 95% half-width; the width is absent for a single seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub mean: Vec<f64>,
    pub half_width: Option<Vec<f64>>,
}

impl Curve {
    pub fn last(&self) -> Point {
        Point {
            mean: self.mean.last().copied().unwrap_or(f64::NAN),
            half_width: self.half_width.as_ref().and_then(|h| h.last().copied()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub mean: f64,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub normalized_regret: Curve,
    pub unique_candidates: Curve,
    pub switches: Curve,
    pub elapsed_seconds: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub method: String,
    pub z: f64,
}

impl Default for Interval {
    fn default() -> Self {
        Interval {
            method: "normal approximation over seeds: z * sample_sd / sqrt(n)".into(),
            z: Z95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDigest {
    pub seed: u64,
    pub final_normalized_regret: f64,
    pub final_average_regret: f64,
    pub unique_candidates: usize,
    pub switches: usize,
    pub elapsed_seconds: f64,
    pub switch_bound: Option<BoundCheck>,
}

impl RunDigest {
    pub fn new(o: &RunOutcome) -> Self {
        RunDigest {
            seed: o.seed,
            final_normalized_regret: o.regret.final_normalized(),
            final_average_regret: o.regret.final_average(),
            unique_candidates: o.result.final_unique(),
            switches: o.result.switches(),
            elapsed_seconds: o.elapsed(),
            switch_bound: o.bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub version: u32,
    pub experiment: String,
    pub combination: CombinationInfo,
    pub lambda: f64,
    pub noise_std: f64,
    pub steps: usize,
    pub interval: Interval,
    pub runs: Vec<RunDigest>,
    pub curves: Curves,
}

/// Serialized view of a [`Combination`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationInfo {
    pub index: usize,
    pub id: String,
    pub objective: String,
    pub algorithm: String,
    pub params: serde_json::Value,
}

impl CombinationInfo {
    pub fn new(c: &Combination) -> Self {
        CombinationInfo {
            index: c.index,
            id: c.id.clone(),
            objective: c.objective.name().to_string(),
            algorithm: c.algorithm.name().to_string(),
            params: serde_json::to_value(c.params).expect("params serialize"),
        }
    }
}

impl SummaryDoc {
    pub fn build(experiment: &str, combo: &Combination, lambda: f64, noise_std: f64, runs: &[RunOutcome]) -> Result<Self> {
        let series: Vec<RunSeries> = runs.iter().map(RunOutcome::series).collect();
        let steps = series.first().map_or(0, |s| s.normalized_regret.len());
        let curves = if series.len() >= 2 {
            let s = summarize(&series)?;
            let c = |b: mini_gp::metrics::Band| Curve {
                mean: b.mean,
                half_width: Some(b.half_width),
            };
            Curves {
                normalized_regret: c(s.normalized_regret),
                unique_candidates: c(s.unique),
                switches: c(s.switches),
                elapsed_seconds: c(s.elapsed),
            }
        } else {
            let s = &series[0];
            let c = |v: &Vec<f64>| Curve {
                mean: v.clone(),
                half_width: None,
            };
            Curves {
                normalized_regret: c(&s.normalized_regret),
                unique_candidates: c(&s.unique),
                switches: c(&s.switches),
                elapsed_seconds: c(&s.elapsed),
            }
        };
        Ok(SummaryDoc {
            version: SUMMARY_VERSION,
            experiment: experiment.to_string(),
            combination: CombinationInfo::new(combo),
            lambda,
            noise_std,
            steps,
            interval: Interval::default(),
            runs: runs.iter().map(RunDigest::new).collect(),
            curves,
        })
    }

    pub fn final_regret(&self) -> Point {
        self.curves.normalized_regret.last()
    }

    pub fn mean_of(&self, f: impl Fn(&RunDigest) -> f64) -> f64 {
        self.runs.iter().map(f).sum::<f64>() / self.runs.len() as f64
    }

    pub fn bound_violations(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.switch_bound.is_some_and(|b| !b.holds))
            .count()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let doc: SummaryDoc = serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if doc.version != SUMMARY_VERSION {
            return Err(HarnessError::Config(format!(
                "{}: summary version {} is not supported (expected {SUMMARY_VERSION})",
                path.display(),
                doc.version
            )));
        }
        Ok(doc)
    }
}
