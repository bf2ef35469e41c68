//! Seeded batch execution of benchmark experiments and the statistics that
//! compare their reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmark::{Benchmark, BenchmarkId, DEFAULT_DIMENSION};
use crate::error::{io_err, Error, Result};
use crate::io::{self, RunTrace};
use crate::optimizer::{baseline_pso, optimize, OptimizerConfig, RunSummary};
use crate::stats::{
    aggregate, friedman_test, rank_table, wilcoxon_signed_rank, AggregateReport, FriedmanResult,
    WilcoxonResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "almi")]
    Almi,
    #[serde(rename = "baseline-pso")]
    BaselinePso,
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::Almi => "almi",
            AlgorithmKind::BaselinePso => "baseline-pso",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    /// Label used in reports; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
    /// Optimizer settings. The experiment's budget, threshold and per-run
    /// seed always take precedence over the corresponding fields here.
    #[serde(default)]
    pub overrides: OptimizerConfig,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            name: None,
            overrides: OptimizerConfig::default(),
        }
    }

    pub fn id(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}

fn default_runs() -> usize {
    30
}

fn default_threshold() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub functions: Vec<BenchmarkId>,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Evaluations per run; `None` means `10000 * dimension`.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.functions.is_empty() {
            return invalid("at least one function is required".into());
        }
        if self.algorithms.is_empty() {
            return invalid("at least one algorithm is required".into());
        }
        if self.runs == 0 {
            return invalid("runs must be at least 1".into());
        }
        if self.jobs == Some(0) {
            return invalid("jobs must be at least 1".into());
        }
        let mut ids = BTreeSet::new();
        for a in &self.algorithms {
            if !ids.insert(a.id()) {
                return invalid(format!("duplicate algorithm id `{}`", a.id()));
            }
            let cfg = self.run_config(a, 0);
            match a.kind {
                AlgorithmKind::Almi => cfg.validate(self.dimension)?,
                AlgorithmKind::BaselinePso => cfg.validate_common(self.dimension)?,
            };
        }
        let mut fids = BTreeSet::new();
        for f in &self.functions {
            if !fids.insert(f.to_string()) {
                return invalid(format!("duplicate function id `{f}`"));
            }
        }
        Ok(())
    }

    /// Optimizer settings for one run of `algorithm`.
    pub fn run_config(&self, algorithm: &AlgorithmSpec, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            max_evaluations: self.budget.or(algorithm.overrides.max_evaluations),
            success_threshold: self.threshold,
            seed,
            ..algorithm.overrides.clone()
        }
    }

    /// Every (function, algorithm, run) triple, in canonical order.
    pub fn plan(&self) -> Vec<RunKey> {
        let mut keys = Vec::new();
        for f in &self.functions {
            for (a, spec) in self.algorithms.iter().enumerate() {
                for run in 0..self.runs {
                    keys.push(RunKey {
                        function_id: f.to_string(),
                        algorithm_id: spec.id(),
                        run_index: run,
                        function: *f,
                        algorithm: a,
                    });
                }
            }
        }
        keys
    }
}

/// Seed of one run: `base_seed` XOR the first eight bytes of
/// `SHA-256(function_id, algorithm_id, run_index)`, independent of execution order.
pub fn run_seed(base_seed: u64, function_id: &str, algorithm_id: &str, run_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(function_id.as_bytes());
    h.update([0]);
    h.update(algorithm_id.as_bytes());
    h.update([0]);
    h.update((run_index as u64).to_le_bytes());
    let digest = h.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    base_seed ^ u64::from_le_bytes(head)
}

/// Seed of the benchmark's own noise stream for a run.
pub fn noise_seed(run_seed: u64) -> u64 {
    run_seed.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunKey {
    pub function_id: String,
    pub algorithm_id: String,
    pub run_index: usize,
    function: BenchmarkId,
    algorithm: usize,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub key: RunKey,
    pub seed: u64,
    pub config: OptimizerConfig,
    pub outcome: std::result::Result<RunSummary, String>,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    /// Keyed by (function, algorithm, run), so iteration order is fixed.
    pub runs: BTreeMap<RunKey, RunRecord>,
    /// Ranked reports in configuration order of functions, then algorithms.
    pub reports: Vec<AggregateReport>,
}

impl BatchResult {
    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.values().filter(|r| r.outcome.is_err())
    }
}

fn execute_one(cfg: &ExperimentConfig, key: RunKey) -> RunRecord {
    let spec = &cfg.algorithms[key.algorithm];
    let seed = run_seed(
        cfg.base_seed,
        &key.function_id,
        &key.algorithm_id,
        key.run_index,
    );
    let config = cfg.run_config(spec, seed);
    let outcome = Benchmark::new(key.function, cfg.dimension, noise_seed(seed))
        .and_then(|mut bench| match spec.kind {
            AlgorithmKind::Almi => optimize(&mut bench, &config),
            AlgorithmKind::BaselinePso => baseline_pso(&mut bench, &config),
        })
        .map_err(|e| e.to_string());
    RunRecord {
        key,
        seed,
        config,
        outcome,
    }
}

/// Runs `keys` on a pool of `cfg.jobs` threads. The result does not depend
/// on the order of `keys` or on scheduling.
pub fn execute(cfg: &ExperimentConfig, keys: Vec<RunKey>) -> Result<BatchResult> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> =
        pool.install(|| keys.into_par_iter().map(|k| execute_one(cfg, k)).collect());
    let runs: BTreeMap<RunKey, RunRecord> =
        records.into_iter().map(|r| (r.key.clone(), r)).collect();

    let mut reports = Vec::new();
    for f in &cfg.functions {
        let fid = f.to_string();
        for a in &cfg.algorithms {
            let aid = a.id();
            let summaries: Vec<RunSummary> = runs
                .values()
                .filter(|r| r.key.function_id == fid && r.key.algorithm_id == aid)
                .filter_map(|r| r.outcome.as_ref().ok().cloned())
                .collect();
            if !summaries.is_empty() {
                reports.push(aggregate(&aid, &fid, &summaries)?);
            }
        }
    }
    rank_table(&mut reports);
    Ok(BatchResult { runs, reports })
}

pub fn run_batch(cfg: &ExperimentConfig) -> Result<BatchResult> {
    execute(cfg, cfg.plan())
}

fn file_stem(key: &RunKey) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "-_.@".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    };
    format!(
        "{}__{}__{:03}",
        clean(&key.function_id),
        clean(&key.algorithm_id),
        key.run_index
    )
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct BatchOutputs {
    pub traces: Vec<PathBuf>,
    pub curves: Vec<PathBuf>,
    pub report_csv: PathBuf,
    pub report_md: PathBuf,
}

/// Writes `traces/*.json` and `curves/*.csv` per successful run, plus
/// `report.csv` and `report.md`.
pub fn write_outputs(batch: &BatchResult, out_dir: &Path) -> Result<BatchOutputs> {
    let mut traces = Vec::new();
    let mut curves = Vec::new();
    for record in batch.runs.values() {
        let Ok(summary) = &record.outcome else {
            continue;
        };
        let stem = file_stem(&record.key);
        let trace_path = out_dir.join("traces").join(format!("{stem}.json"));
        io::write_trace_json(
            &trace_path,
            &RunTrace {
                algorithm_id: record.key.algorithm_id.clone(),
                function_id: record.key.function_id.clone(),
                run_index: record.key.run_index,
                seed: record.seed,
                config: record.config.clone(),
                summary: summary.clone(),
            },
        )?;
        let curve_path = out_dir.join("curves").join(format!("{stem}.csv"));
        io::write_trace_csv(&curve_path, &summary.fitness_trace)?;
        traces.push(trace_path);
        curves.push(curve_path);
    }
    let report_csv = out_dir.join("report.csv");
    io::write_report_csv(&report_csv, &batch.reports)?;
    let report_md = out_dir.join("report.md");
    io::write_markdown_report(&report_md, &batch.reports)?;
    Ok(BatchOutputs {
        traces,
        curves,
        report_csv,
        report_md,
    })
}

/// Function-by-algorithm FV matrix of one report, with functions and
/// algorithms in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct FvMatrix {
    pub functions: Vec<String>,
    pub algorithms: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl FvMatrix {
    pub fn from_reports(reports: &[AggregateReport]) -> Result<Self> {
        let mut cells: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
        for r in reports {
            if cells
                .entry(&r.function_id)
                .or_default()
                .insert(&r.algorithm_id, r.fv)
                .is_some()
            {
                return Err(Error::Malformed(format!(
                    "duplicate entry for {} on {}",
                    r.algorithm_id, r.function_id
                )));
            }
        }
        let algorithms: BTreeSet<&str> = cells.values().flat_map(|m| m.keys().copied()).collect();
        let algorithms: Vec<String> = algorithms.into_iter().map(String::from).collect();
        let mut functions = Vec::new();
        let mut values = Vec::new();
        for (f, row) in &cells {
            if row.len() != algorithms.len() {
                return Err(Error::Malformed(format!(
                    "function {f} lacks results for some algorithms"
                )));
            }
            functions.push(f.to_string());
            values.push(row.values().copied().collect());
        }
        Ok(Self {
            functions,
            algorithms,
            values,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReportComparison {
    pub labels: Vec<String>,
    pub algorithms: Vec<String>,
    pub friedman: Vec<FriedmanResult>,
    /// `(i, j, result)` for every pair of reports, on their mean-rank vectors.
    pub wilcoxon: Vec<(usize, usize, WilcoxonResult)>,
}

/// Friedman test on each report's FV matrix, then pairwise Wilcoxon tests
/// between the reports' per-algorithm mean ranks. All reports must cover the
/// same algorithms.
pub fn compare_reports(labelled: &[(String, Vec<AggregateReport>)]) -> Result<ReportComparison> {
    if labelled.is_empty() {
        return Err(Error::Precondition("no reports given".into()));
    }
    let matrices = labelled
        .iter()
        .map(|(_, r)| FvMatrix::from_reports(r))
        .collect::<Result<Vec<_>>>()?;
    let algorithms = matrices[0].algorithms.clone();
    for (m, (label, _)) in matrices.iter().zip(labelled) {
        if m.algorithms != algorithms {
            return Err(Error::Malformed(format!(
                "report {label} covers algorithms {:?}, expected {:?}",
                m.algorithms, algorithms
            )));
        }
    }
    let friedman = matrices
        .iter()
        .map(|m| friedman_test(&m.values))
        .collect::<Result<Vec<_>>>()?;
    let mut wilcoxon = Vec::new();
    for i in 0..friedman.len() {
        for j in i + 1..friedman.len() {
            let w = wilcoxon_signed_rank(&friedman[i].mean_ranks, &friedman[j].mean_ranks)?;
            wilcoxon.push((i, j, w));
        }
    }
    Ok(ReportComparison {
        labels: labelled.iter().map(|(l, _)| l.clone()).collect(),
        algorithms,
        friedman,
        wilcoxon,
    })
}

fn p_value(p: f64) -> String {
    if p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

impl ReportComparison {
    /// Markdown tables of the Friedman and (if any) Wilcoxon results.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| Test | Statistic | p-value |");
        let _ = writeln!(out, "|---|---|---|");
        for (label, f) in self.labels.iter().zip(&self.friedman) {
            let _ = writeln!(
                out,
                "| {label} - FV | {:.3} | {} |",
                f.statistic,
                p_value(f.p_value)
            );
        }
        if !self.wilcoxon.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "| Comparison | Statistic | p-value |");
            let _ = writeln!(out, "|---|---|---|");
            for (i, j, w) in &self.wilcoxon {
                let _ = writeln!(
                    out,
                    "| {} vs. {} | {:.1} | {} |",
                    self.labels[*i],
                    self.labels[*j],
                    w.statistic,
                    p_value(w.p_value)
                );
            }
        }
        out
    }
}
