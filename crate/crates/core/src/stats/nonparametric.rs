//! Friedman test and Wilcoxon signed-rank test.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{precondition, Error, Result};

/// Largest sample size for which the Wilcoxon p-value is computed exactly.
pub const WILCOXON_EXACT_MAX_N: usize = 20;

/// Ascending ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of the groups of tied values.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Mean rank of each treatment (column) across blocks.
    pub mean_ranks: Vec<f64>,
}

/// Friedman test on an `n x k` matrix: rows are blocks (functions), columns
/// are treatments (algorithms). Lower scores rank better. The chi-squared
/// statistic is tie-corrected; an all-tied matrix gives statistic 0, p 1.
pub fn friedman_test(scores: &[Vec<f64>]) -> Result<FriedmanResult> {
    let n = scores.len();
    if n < 2 {
        return precondition("Friedman test needs at least two blocks");
    }
    let k = scores[0].len();
    if k < 2 {
        return precondition("Friedman test needs at least two treatments");
    }
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in scores {
        if row.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: row.len(),
            });
        }
        if row.iter().any(|v| v.is_nan()) {
            return precondition("Friedman scores must not be NaN");
        }
        for (s, r) in rank_sums.iter_mut().zip(average_ranks(row)) {
            *s += r;
        }
        tie_term += tie_groups(row)
            .into_iter()
            .map(|t| (t * t * t - t) as f64)
            .sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let mean_ranks = rank_sums.iter().map(|s| s / nf).collect();
    let correction = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
    if correction <= 0.0 {
        return Ok(FriedmanResult {
            statistic: 0.0,
            p_value: 1.0,
            mean_ranks,
        });
    }
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>()
        - 3.0 * nf * (kf + 1.0);
    let statistic = (raw / correction).max(0.0);
    let chi2 = ChiSquared::new(kf - 1.0).expect("k >= 2 gives positive degrees of freedom");
    Ok(FriedmanResult {
        statistic,
        p_value: chi2.sf(statistic),
        mean_ranks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// Smaller of the positive and negative signed-rank sums.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub exact: bool,
    /// Every difference was zero.
    pub degenerate: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired samples `a` and `b`.
///
/// Zero differences are dropped. For up to [`WILCOXON_EXACT_MAX_N`] pairs the
/// p-value is exact, from the full null distribution of the rank sum over all
/// `2^n` sign assignments; above that a tie-corrected normal approximation
/// with continuity correction is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return precondition("Wilcoxon test needs at least one pair");
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| d.is_nan()) {
        return precondition("Wilcoxon samples must not contain NaN");
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            exact: true,
            degenerate: true,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let statistic = w_plus.min(total - w_plus);

    if n <= WILCOXON_EXACT_MAX_N {
        let p_value = exact_p_value(&ranks, statistic);
        return Ok(WilcoxonResult {
            statistic,
            p_value,
            n,
            exact: true,
            degenerate: false,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_groups(&abs)
        .into_iter()
        .map(|t| (t * t * t - t) as f64)
        .sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((statistic - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        n,
        exact: false,
        degenerate: false,
    })
}

/// `min(1, 2 P(T <= w))` under the null, where `T` is the positive rank sum.
/// Doubled ranks are integers even with average ties, so the distribution is
/// built exactly by counting subsets per doubled sum.
fn exact_p_value(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max_sum + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let at_most: u64 = counts[..=limit.min(max_sum)].iter().sum();
    let total = 2f64.powi(ranks.len() as i32);
    (2.0 * at_most as f64 / total).min(1.0)
}
