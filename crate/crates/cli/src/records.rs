//! Output records: one JSON file per optimization run, an RFC-4180 CSV
//! summary per sweep, and the report aggregations.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

use qudit_qaoa::constraints::ConditionalStats;
use qudit_qaoa::optimize::OptRecord;
use qudit_qaoa::qaoa::Candidate;
use qudit_qaoa::register::RNG_ALGORITHM;

use crate::config::{ConstraintMode, Method};

pub const BASIS_ORDER_NOTE: &str = "little-endian (qudit 0 fastest): index = sum_j z_j d^j";

/// Everything recorded about one optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub config_hash: String,
    pub basis_order: String,
    pub rng_algorithm: String,
    pub problem: String,
    pub constraint_mode: ConstraintMode,
    pub method: Method,
    pub p: usize,
    pub run_index: usize,
    pub optimizer: OptRecord,
    pub top_candidates: Vec<Candidate>,
    pub exact_minimum: f64,
    pub optimality_gap: f64,
    pub oracle_optima_count: usize,
    pub found_optima_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_stats: Option<ConditionalStats>,
    pub seconds: f64,
}

impl RunRecord {
    /// Re-validate before anything is written: probabilities in range and
    /// summing to at most one, non-negative gap, digits in range.
    pub fn validate(&self, register_dim: usize) -> Result<()> {
        let mut total_p = 0.0;
        for c in &self.top_candidates {
            if !(0.0..=1.0 + 1e-9).contains(&c.probability) {
                bail!("candidate probability {} out of range", c.probability);
            }
            total_p += c.probability;
            if c.assignment.digits().iter().any(|&z| z >= register_dim) {
                bail!("candidate digit out of range in {:?}", c.assignment.digits());
            }
        }
        if total_p > 1.0 + 1e-6 {
            bail!("candidate probabilities sum to {total_p} > 1");
        }
        if self.optimality_gap < -1e-9 {
            bail!("negative optimality gap {}", self.optimality_gap);
        }
        Ok(())
    }

    pub fn file_name(&self) -> String {
        format!(
            "run_p{}_{}_{:04}.json",
            self.p,
            method_tag(self.method),
            self.run_index
        )
    }

    pub fn write(&self, directory: &Path) -> Result<()> {
        let path = directory.join(self.file_name());
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn method_tag(method: Method) -> &'static str {
    match method {
        Method::CmaEs => "cma_es",
        Method::Lbfgs => "lbfgs",
    }
}

/// Fixed, versioned summary columns.
pub const SUMMARY_COLUMNS: [&str; 9] = [
    "run", "p", "method", "seed", "best_E", "gap", "n_optima_found", "evals", "seconds",
];

pub fn write_summary_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(SUMMARY_COLUMNS)?;
    for r in records {
        writer.write_record([
            r.run_index.to_string(),
            r.p.to_string(),
            method_tag(r.method).to_string(),
            r.optimizer.seed.to_string(),
            format!("{:.12e}", r.optimizer.best_value),
            format!("{:.12e}", r.optimality_gap),
            r.found_optima_count.to_string(),
            r.optimizer.evaluations_used.to_string(),
            format!("{:.3}", r.seconds),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-generation traces for every run, long format.
pub fn write_traces_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(["run", "p", "method", "generation", "best_value", "gap"])?;
    for r in records {
        for (generation, value) in r.optimizer.trace.iter().enumerate() {
            writer.write_record([
                r.run_index.to_string(),
                r.p.to_string(),
                method_tag(r.method).to_string(),
                generation.to_string(),
                format!("{:.12e}", value),
                format!("{:.12e}", value - r.exact_minimum),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn load_records(directory: &Path) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    let entries = std::fs::read_dir(directory)
        .with_context(|| format!("reading {}", directory.display()))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "json")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("run_"))
        })
        .collect();
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        let record: RunRecord = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        records.push(record);
    }
    if records.is_empty() {
        bail!("no run_*.json records in {}", directory.display());
    }
    Ok(records)
}

/// One aggregated row per (p, method).
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub p: usize,
    pub method: String,
    pub runs: usize,
    pub best_gap: f64,
    pub median_gap: f64,
    pub mean_found_optima: f64,
    pub min_found_optima: usize,
    pub max_found_optima: usize,
    pub oracle_optima: usize,
    pub mean_evaluations: f64,
}

pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, &'static str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.p, method_tag(r.method))).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((p, method), group)| {
            let mut gaps: Vec<f64> = group.iter().map(|r| r.optimality_gap).collect();
            gaps.sort_by(f64::total_cmp);
            let best_gap = gaps[0];
            let median_gap = gaps[gaps.len() / 2];
            let found: Vec<usize> = group.iter().map(|r| r.found_optima_count).collect();
            AggregateRow {
                p,
                method: method.to_string(),
                runs: group.len(),
                best_gap,
                median_gap,
                mean_found_optima: found.iter().sum::<usize>() as f64 / found.len() as f64,
                min_found_optima: *found.iter().min().expect("nonempty"),
                max_found_optima: *found.iter().max().expect("nonempty"),
                oracle_optima: group[0].oracle_optima_count,
                mean_evaluations: group
                    .iter()
                    .map(|r| r.optimizer.evaluations_used as f64)
                    .sum::<f64>()
                    / group.len() as f64,
            }
        })
        .collect()
}

pub fn write_aggregate_csv(rows: &[AggregateRow], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record([
        "p",
        "method",
        "runs",
        "best_gap",
        "median_gap",
        "mean_found_optima",
        "min_found_optima",
        "max_found_optima",
        "oracle_optima",
        "mean_evaluations",
    ])?;
    for row in rows {
        writer.write_record([
            row.p.to_string(),
            row.method.clone(),
            row.runs.to_string(),
            format!("{:.12e}", row.best_gap),
            format!("{:.12e}", row.median_gap),
            format!("{:.6}", row.mean_found_optima),
            row.min_found_optima.to_string(),
            row.max_found_optima.to_string(),
            row.oracle_optima.to_string(),
            format!("{:.1}", row.mean_evaluations),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn rng_name() -> &'static str {
    RNG_ALGORITHM
}
