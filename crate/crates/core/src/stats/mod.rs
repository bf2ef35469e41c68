//! Cross-run aggregation (FV, SP, SR), per-function ranking, and the
//! Friedman and Wilcoxon tests used to compare algorithms.

mod nonparametric;

pub use nonparametric::{
    average_ranks, friedman_test, wilcoxon_signed_rank, FriedmanResult, WilcoxonResult,
    WILCOXON_EXACT_MAX_N,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::optimizer::RunSummary;

/// Per (algorithm, function) statistics over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub algorithm_id: String,
    pub function_id: String,
    pub runs: usize,
    /// Mean final best fitness.
    pub fv: f64,
    /// Success performance: mean evaluations-to-success of successful runs
    /// divided by the success rate; infinite when nothing succeeded.
    pub sp: f64,
    /// Success rate in `[0, 1]`.
    pub sr: f64,
    pub rank: Option<usize>,
}

/// Aggregates runs of one algorithm on one function. Success is the flag
/// each run recorded against its configured threshold.
pub fn aggregate(
    algorithm_id: &str,
    function_id: &str,
    results: &[RunSummary],
) -> Result<AggregateReport> {
    if results.is_empty() {
        return precondition("cannot aggregate zero runs");
    }
    let runs = results.len();
    let fv = results.iter().map(|r| r.best_fitness).sum::<f64>() / runs as f64;
    let successes: Vec<usize> = results
        .iter()
        .filter(|r| r.success)
        .filter_map(|r| r.evaluations_to_success)
        .collect();
    let sr = successes.len() as f64 / runs as f64;
    let sp = if successes.is_empty() {
        f64::INFINITY
    } else {
        let mean = successes.iter().sum::<usize>() as f64 / successes.len() as f64;
        mean / sr
    };
    Ok(AggregateReport {
        algorithm_id: algorithm_id.to_string(),
        function_id: function_id.to_string(),
        runs,
        fv,
        sp,
        sr,
        rank: None,
    })
}

/// Competition ranks ("1, 1, 3") of `values`, lower is better.
pub fn competition_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|o| o.total_cmp(v).is_lt()).count())
        .collect()
}

/// Ranks reports by FV within each function, in place.
pub fn rank_table(reports: &mut [AggregateReport]) {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in reports.iter().enumerate() {
        groups.entry(r.function_id.clone()).or_default().push(i);
    }
    for members in groups.values() {
        let fvs: Vec<f64> = members.iter().map(|&i| reports[i].fv).collect();
        for (&i, rank) in members.iter().zip(competition_ranks(&fvs)) {
            reports[i].rank = Some(rank);
        }
    }
}
