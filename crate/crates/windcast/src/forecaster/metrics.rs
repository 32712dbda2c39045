//! Forecast quality metrics: MAE, RMSE, MSE, and Pearson R.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecaster::TrainedForecaster;
use crate::scada::{pearson, SupervisedSet};

/// Normalized-scale metrics for one prediction/observation pairing.
/// `r` is `None` when either side has zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r: Option<f64>,
}

/// MAE = mean |f_p - f_o|, RMSE = √(mean (f_p - f_o)²), MSE = RMSE²,
/// R = Pearson correlation.
pub fn metrics(predicted: &[f64], observed: &[f64]) -> Result<Metrics> {
    if predicted.len() != observed.len() {
        return Err(Error::DimensionMismatch {
            expected: observed.len(),
            got: predicted.len(),
            context: "metrics input",
        });
    }
    if predicted.is_empty() {
        return Err(Error::InvalidParameter("metrics on empty input".into()));
    }
    let n = predicted.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (&p, &o) in predicted.iter().zip(observed) {
        let e = p - o;
        abs_sum += e.abs();
        sq_sum += e * e;
    }
    let mse = sq_sum / n;
    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        mae: abs_sum / n,
        r: pearson(predicted, observed),
    })
}

/// Metrics for one split, normalized scale plus RMSE denormalized to kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r: Option<f64>,
    pub rmse_kw: f64,
}

/// Train- and test-split metrics of a trained forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub train: SplitMetrics,
    pub test: SplitMetrics,
}

/// Scores the model on an arbitrary sample index set.
pub fn evaluate_indices(
    model: &TrainedForecaster,
    data: &SupervisedSet,
    indices: &[usize],
) -> Result<SplitMetrics> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter("evaluate on empty split".into()));
    }
    let windows: Vec<Vec<f64>> = indices.iter().map(|&i| data.inputs[i].clone()).collect();
    let predicted = model.predict(&windows)?;
    let observed: Vec<f64> = indices.iter().map(|&i| data.targets[i]).collect();
    let m = metrics(&predicted, &observed)?;
    Ok(SplitMetrics {
        mse: m.mse,
        rmse: m.rmse,
        mae: m.mae,
        r: m.r,
        rmse_kw: m.rmse * model.norm_stats.target.span(),
    })
}

/// Scores the model on the train and test splits of `data`.
pub fn evaluate(model: &TrainedForecaster, data: &SupervisedSet) -> Result<MetricReport> {
    Ok(MetricReport {
        train: evaluate_indices(model, data, &data.split.train)?,
        test: evaluate_indices(model, data, &data.split.test)?,
    })
}
