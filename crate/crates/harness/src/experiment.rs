//! Sweeps, output layout, manifest and best-combination report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{ensure_dir, run_paths, write_json, write_step_csv, write_text, write_timing_csv};
use crate::plot;
use crate::runner::{execute, RunOutcome, Testbed};
use crate::summary::SummaryDoc;
use crate::sweep::{combinations, Combination, SweepMode};

pub const SELECTION_RULE: &str = "lowest mean final normalized average regret R_T/T over seeds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub combination: String,
    pub combination_index: usize,
    pub seed: u64,
    pub step_csv: String,
    pub timing_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub experiment: String,
    pub runs: Vec<ManifestEntry>,
    pub summaries: Vec<String>,
    pub report: String,
    pub plots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub objective: String,
    pub algorithm: String,
    pub combination: String,
    pub params: serde_json::Value,
    pub final_normalized_regret: f64,
    pub half_width: Option<f64>,
    pub unique_candidates: f64,
    pub switches: f64,
    pub elapsed_seconds: f64,
    pub switch_bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub experiment: String,
    pub selection: String,
    pub best: Vec<ReportRow>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub root: PathBuf,
    pub combinations: Vec<Combination>,
    pub summaries: Vec<SummaryDoc>,
    pub manifest: Manifest,
    pub report: Report,
}

impl ExperimentOutput {
    pub fn summary(&self, id: &str) -> Option<&SummaryDoc> {
        self.summaries.iter().find(|s| s.combination.id == id)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub mode: SweepMode,
    /// Print one line per finished combination to stderr.
    pub progress: bool,
}

fn rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let root = cfg.output_dir.clone();
    ensure_dir(&root)?;
    ensure_dir(&root.join("summaries"))?;

    let combos = combinations(cfg, opts.mode);
    let seeds = cfg.resolved_seeds();
    let mut beds = BTreeMap::new();
    for &family in &cfg.environment.objectives {
        beds.insert(family.name(), Testbed::build(cfg, family)?);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;

    let mut manifest = Manifest {
        version: 1,
        experiment: cfg.name.clone(),
        runs: Vec::with_capacity(combos.len() * seeds.len()),
        summaries: Vec::with_capacity(combos.len()),
        report: String::new(),
        plots: Vec::new(),
    };
    let mut summaries = Vec::with_capacity(combos.len());

    // enough combinations per batch to keep every worker busy, few enough to
    // bound the per-step series held in memory
    let per_batch = cfg.workers.div_ceil(seeds.len()).max(1);
    for batch in combos.chunks(per_batch) {
        let tasks: Vec<(&Combination, u64)> = batch.iter().flat_map(|c| seeds.iter().map(move |&s| (c, s))).collect();
        let outcomes: Vec<RunOutcome> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(c, s)| execute(cfg, &beds[c.objective.name()], c, s))
                .collect::<Result<Vec<_>>>()
        })?;
        // single writer, in (combination, seed) order
        for (combo, runs) in batch.iter().zip(outcomes.chunks(seeds.len())) {
            let bed = &beds[combo.objective.name()];
            for run in runs {
                let (csv, timing) = run_paths(&root, &combo.id, run.seed);
                ensure_dir(csv.parent().expect("run path has a parent"))?;
                write_step_csv(&csv, run)?;
                write_timing_csv(&timing, run)?;
                manifest.runs.push(ManifestEntry {
                    combination: combo.id.clone(),
                    combination_index: combo.index,
                    seed: run.seed,
                    step_csv: rel(&root, &csv),
                    timing_csv: rel(&root, &timing),
                });
            }
            let doc = SummaryDoc::build(&cfg.name, combo, bed.lambda, bed.noise_std(), runs)?;
            let path = root.join("summaries").join(format!("{}.json", combo.id));
            write_json(&path, &doc)?;
            manifest.summaries.push(rel(&root, &path));
            if opts.progress {
                let f = doc.final_regret();
                eprintln!(
                    "[{}/{}] {}: R_T/T {:.4} q_T {:.1} h {:.1} {:.2}s{}",
                    combo.index + 1,
                    combos.len(),
                    combo.id,
                    f.mean,
                    doc.mean_of(|r| r.unique_candidates as f64),
                    doc.mean_of(|r| r.switches as f64),
                    doc.mean_of(|r| r.elapsed_seconds),
                    match doc.bound_violations() {
                        0 => String::new(),
                        n => format!(" WARNING: switch bound exceeded in {n} runs"),
                    }
                );
            }
            summaries.push(doc);
        }
    }

    let report = best_report(&cfg.name, &summaries);
    let report_path = root.join("report.json");
    write_json(&report_path, &report)?;
    write_text(&root.join("report.md"), &report_markdown(&report))?;
    manifest.report = rel(&root, &report_path);

    if cfg.plots {
        let dir = root.join("plots");
        ensure_dir(&dir)?;
        for &family in &cfg.environment.objectives {
            let best: Vec<&SummaryDoc> = report
                .best
                .iter()
                .filter(|r| r.objective == family.name())
                .filter_map(|r| summaries.iter().find(|s| s.combination.id == r.combination))
                .collect();
            for p in plot::write_panels(&best, &dir, family.name())? {
                manifest.plots.push(rel(&root, &p));
            }
        }
    }
    write_json(&root.join("manifest.json"), &manifest)?;

    Ok(ExperimentOutput {
        root,
        combinations: combos,
        summaries,
        manifest,
        report,
    })
}

/// Best combination per (objective, algorithm); ties go to the earlier one.
pub fn best_report(experiment: &str, summaries: &[SummaryDoc]) -> Report {
    let mut best: Vec<&SummaryDoc> = Vec::new();
    for s in summaries {
        let c = &s.combination;
        match best
            .iter_mut()
            .find(|b| b.combination.objective == c.objective && b.combination.algorithm == c.algorithm)
        {
            Some(b) => {
                if s.final_regret().mean < b.final_regret().mean {
                    *b = s;
                }
            }
            None => best.push(s),
        }
    }
    Report {
        version: 1,
        experiment: experiment.to_string(),
        selection: SELECTION_RULE.to_string(),
        best: best
            .into_iter()
            .map(|s| {
                let f = s.final_regret();
                ReportRow {
                    objective: s.combination.objective.clone(),
                    algorithm: s.combination.algorithm.clone(),
                    combination: s.combination.id.clone(),
                    params: s.combination.params.clone(),
                    final_normalized_regret: f.mean,
                    half_width: f.half_width,
                    unique_candidates: s.mean_of(|r| r.unique_candidates as f64),
                    switches: s.mean_of(|r| r.switches as f64),
                    elapsed_seconds: s.mean_of(|r| r.elapsed_seconds),
                    switch_bound_violations: s.bound_violations(),
                }
            })
            .collect(),
    }
}

pub fn report_markdown(r: &Report) -> String {
    let mut out = format!(
        "# {}\n\nBest hyperparameters per objective and algorithm ({}).\n\n",
        r.experiment, r.selection
    );
    out.push_str("| objective | algorithm | combination | R_T/T | ±95% | q_T | h | seconds |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for row in &r.best {
        let hw = row.half_width.map_or("n/a".to_string(), |h| format!("{h:.4}"));
        out.push_str(&format!(
            "| {} | {} | {} | {:.4} | {} | {:.1} | {:.1} | {:.3} |\n",
            row.objective,
            row.algorithm,
            row.combination,
            row.final_normalized_regret,
            hw,
            row.unique_candidates,
            row.switches,
            row.elapsed_seconds
        ));
    }
    out
}
