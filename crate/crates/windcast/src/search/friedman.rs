//! Friedman test: nonparametric ranked comparison of k models over n
//! problem configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    /// Mean rank per model (column); rank 1 is best (lowest score).
    pub mean_ranks: Vec<f64>,
    /// χ²_F = 12n/(k(k+1)) · [Σ R̄_j² − k(k+1)²/4].
    pub chi_square: f64,
    /// Rows dropped because they contained NaN scores.
    pub excluded_rows: Vec<usize>,
    pub rows_used: usize,
}

/// Ranks one row ascending, assigning tied entries their average rank.
fn row_ranks(row: &[f64]) -> Vec<f64> {
    let k = row.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).expect("finite scores"));
    let mut ranks = vec![0.0; k];
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j + 1 < k && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1..=j+1.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman mean ranks and chi-square statistic for a score matrix with
/// rows = configurations and columns = models (lower score is better).
/// Rows containing NaN are excluded and reported.
pub fn friedman_ranks(scores: &[Vec<f64>]) -> Result<FriedmanResult> {
    if scores.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "Friedman test needs >= 2 configurations, got {}",
            scores.len()
        )));
    }
    let k = scores[0].len();
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "Friedman test needs >= 2 models, got {k}"
        )));
    }
    if scores.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: scores.iter().map(Vec::len).find(|&l| l != k).unwrap_or(0),
            context: "friedman score matrix",
        });
    }

    let mut excluded_rows = Vec::new();
    let mut rank_sums = vec![0.0; k];
    let mut n = 0usize;
    for (idx, row) in scores.iter().enumerate() {
        if row.iter().any(|v| v.is_nan()) {
            excluded_rows.push(idx);
            continue;
        }
        for (j, r) in row_ranks(row).into_iter().enumerate() {
            rank_sums[j] += r;
        }
        n += 1;
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "only {n} usable rows after NaN exclusion"
        )));
    }

    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let kf = k as f64;
    let nf = n as f64;
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi_square = 12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0);

    Ok(FriedmanResult {
        mean_ranks,
        chi_square,
        excluded_rows,
        rows_used: n,
    })
}
