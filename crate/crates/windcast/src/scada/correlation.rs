//! Pairwise Pearson correlation over the seven telemetry features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scada::{Feature, ScadaSeries};

/// Symmetric Pearson-R matrix. Degenerate (zero-variance) features keep
/// their index but their row and column hold NaN and are listed in
/// `degenerate` for exclusion from reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub features: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub degenerate: Vec<usize>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }
}

/// Pearson R via the sum formulation:
/// (NΣxy − ΣxΣy) / (√(NΣx² − (Σx)²) · √(NΣy² − (Σy)²)).
///
/// Returns `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let var_x = n * sxx - sx * sx;
    let var_y = n * syy - sy * sy;
    if var_x <= 0.0 || var_y <= 0.0 {
        return None;
    }
    Some(((n * sxy - sx * sy) / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between every pair of telemetry features.
///
/// The diagonal is exactly 1 for well-defined features; zero-variance
/// features are flagged rather than failing the whole computation.
pub fn correlation_matrix(series: &ScadaSeries) -> Result<CorrelationMatrix> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation needs >= 2 records, got {}",
            series.len()
        )));
    }
    let columns: Vec<Vec<f64>> = Feature::ALL
        .iter()
        .map(|f| series.records().iter().map(|r| f.extract(r)).collect())
        .collect();

    let k = columns.len();
    let degenerate: Vec<usize> = columns
        .iter()
        .enumerate()
        .filter(|(_, col)| {
            let first = col[0];
            col.iter().all(|&v| v == first)
        })
        .map(|(i, _)| i)
        .collect();

    let mut values = vec![vec![f64::NAN; k]; k];
    for a in 0..k {
        if degenerate.contains(&a) {
            continue;
        }
        values[a][a] = 1.0;
        for b in (a + 1)..k {
            if degenerate.contains(&b) {
                continue;
            }
            let r = pearson(&columns[a], &columns[b]).unwrap_or(f64::NAN);
            values[a][b] = r;
            values[b][a] = r;
        }
    }

    Ok(CorrelationMatrix {
        features: Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
        values,
        degenerate,
    })
}
