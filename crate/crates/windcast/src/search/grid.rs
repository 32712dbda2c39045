//! Grid search over batch size and learning rate with everything else
//! fixed: the baseline tuner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecaster::ForecasterConfig;
use crate::search::{SearchTrace, TraceRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub config: ForecasterConfig,
    pub fitness: f64,
}

/// Evaluates the full Cartesian product of the two grids and returns every
/// result sorted ascending by fitness, plus a per-evaluation trace.
pub fn grid_search<F>(
    bs_grid: &[usize],
    lr_grid: &[f64],
    base: &ForecasterConfig,
    fitness: F,
) -> Result<(Vec<GridResult>, SearchTrace)>
where
    F: Fn(&ForecasterConfig) -> f64 + Sync,
{
    if bs_grid.is_empty() || lr_grid.is_empty() {
        return Err(Error::InvalidParameter("grid search needs non-empty grids".into()));
    }
    let mut configs = Vec::with_capacity(bs_grid.len() * lr_grid.len());
    for &bs in bs_grid {
        for &lr in lr_grid {
            let config = ForecasterConfig {
                batch_size: bs,
                learning_rate: lr,
                ..base.clone()
            };
            config.validate()?;
            configs.push((bs, lr, config));
        }
    }

    let mut results: Vec<GridResult> = configs
        .into_par_iter()
        .map(|(batch_size, learning_rate, config)| {
            let raw = fitness(&config);
            GridResult {
                batch_size,
                learning_rate,
                config,
                fitness: if raw.is_nan() { f64::INFINITY } else { raw },
            }
        })
        .collect();

    let mut trace = SearchTrace::default();
    let mut best = f64::INFINITY;
    let mut sum = 0.0;
    for (i, r) in results.iter().enumerate() {
        best = best.min(r.fitness);
        if r.fitness.is_finite() {
            sum += r.fitness;
        }
        trace.rows.push(TraceRow {
            generation: i + 1,
            best,
            mean: sum / (i + 1) as f64,
            p1: None,
            crm: None,
            evals: i + 1,
        });
    }
    trace.evaluations = results.len();

    results.sort_by(|a, b| {
        a.fitness
            .partial_cmp(&b.fitness)
            .expect("infinity replaces NaN")
            .then(a.batch_size.cmp(&b.batch_size))
            .then(a.learning_rate.partial_cmp(&b.learning_rate).expect("finite grid"))
    });
    Ok((results, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scada::ModelVariant;

    fn base() -> ForecasterConfig {
        ForecasterConfig {
            variant: ModelVariant::M1,
            ..ForecasterConfig::default()
        }
    }

    /// Deterministic stand-in fitness with a known optimum.
    fn surrogate(config: &ForecasterConfig) -> f64 {
        let bs = config.batch_size as f64;
        (bs - 512.0).abs() / 2048.0 + (config.learning_rate.log10() + 3.0).abs()
    }

    #[test]
    fn five_by_five_grid_is_25_evaluations() {
        let bs = [128, 256, 512, 1024, 2048];
        let lr = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];
        let (results, trace) = grid_search(&bs, &lr, &base(), surrogate).unwrap();
        assert_eq!(results.len(), 25);
        assert_eq!(trace.evaluations, 25);
        assert_eq!(results[0].batch_size, 512);
        assert_eq!(results[0].learning_rate, 1e-3);
    }

    #[test]
    fn single_cell_grid() {
        let (results, trace) = grid_search(&[256], &[1e-3], &base(), surrogate).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(trace.evaluations, 1);
    }

    #[test]
    fn results_are_sorted_by_an_independent_oracle() {
        let bs = [128, 300, 700, 2048];
        let lr = [1e-4, 3e-3, 5e-2];
        let (results, _) = grid_search(&bs, &lr, &base(), surrogate).unwrap();
        let mut oracle: Vec<f64> = results.iter().map(|r| r.fitness).collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got: Vec<f64> = results.iter().map(|r| r.fitness).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(grid_search(&[], &[1e-3], &base(), surrogate).is_err());
        assert!(grid_search(&[256], &[], &base(), surrogate).is_err());
    }

    #[test]
    fn out_of_bounds_grid_values_are_rejected() {
        assert!(grid_search(&[64], &[1e-3], &base(), surrogate).is_err());
        assert!(grid_search(&[256], &[1.0], &base(), surrogate).is_err());
    }
}
