//! Power forecaster: 1-2 LSTM layers, dropout, dense regression head.
//! Trains on a [`SupervisedSet`] with early stopping on validation RMSE.

mod checkpoint;
mod metrics;

pub use checkpoint::{load, save, CHECKPOINT_VERSION};
pub use metrics::{evaluate, evaluate_indices, metrics, MetricReport, Metrics, SplitMetrics};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{
    clip_global_norm, dropout_mask, lstm_backward, lstm_backward_seq, lstm_step, DenseParams,
    GateCache, LstmCellParams, LstmState, OptimizerKind, OptimizerState,
};
use crate::scada::{ModelVariant, NormStats, SupervisedSet};

/// Hyperparameters and training settings for one forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecasterConfig {
    pub variant: ModelVariant,
    pub horizon: usize,
    pub lookback: usize,
    /// 1 or 2 stacked LSTM layers.
    pub num_layers: usize,
    pub hidden1: usize,
    /// Ignored when `num_layers == 1`.
    pub hidden2: usize,
    /// Mini-batch size, within [128, 2048].
    pub batch_size: usize,
    /// Within [1e-5, 1e-1].
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        Self {
            variant: ModelVariant::M3,
            horizon: 1,
            lookback: 6,
            num_layers: 1,
            hidden1: 100,
            hidden2: 10,
            batch_size: 512,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            max_epochs: 100,
            early_stop_patience: 5,
            dropout_rate: 0.2,
            seed: 0,
        }
    }
}

pub const BATCH_SIZE_MIN: usize = 128;
pub const BATCH_SIZE_MAX: usize = 2048;
pub const LEARNING_RATE_MIN: f64 = 1e-5;
pub const LEARNING_RATE_MAX: f64 = 1e-1;

impl ForecasterConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.num_layers == 1 || self.num_layers == 2) {
            return fail(format!("num_layers must be 1 or 2, got {}", self.num_layers));
        }
        if self.hidden1 == 0 || (self.num_layers == 2 && self.hidden2 == 0) {
            return fail("hidden layer sizes must be >= 1".into());
        }
        if !(BATCH_SIZE_MIN..=BATCH_SIZE_MAX).contains(&self.batch_size) {
            return fail(format!(
                "batch_size must be in [{BATCH_SIZE_MIN}, {BATCH_SIZE_MAX}], got {}",
                self.batch_size
            ));
        }
        if !(LEARNING_RATE_MIN..=LEARNING_RATE_MAX).contains(&self.learning_rate) {
            return fail(format!(
                "learning_rate must be in [{LEARNING_RATE_MIN}, {LEARNING_RATE_MAX}], got {}",
                self.learning_rate
            ));
        }
        if self.lookback == 0 || self.horizon == 0 {
            return fail("lookback and horizon must be >= 1".into());
        }
        if self.max_epochs == 0 || self.early_stop_patience == 0 {
            return fail("max_epochs and early_stop_patience must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.variant.input_dim()
    }
}

/// The assembled network: stacked LSTM layers plus dense(1) head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmNetwork {
    pub layer1: LstmCellParams,
    pub layer2: Option<LstmCellParams>,
    pub head: DenseParams,
}

impl LstmNetwork {
    pub fn new(config: &ForecasterConfig, rng: &mut ChaCha8Rng) -> Self {
        let layer1 = LstmCellParams::init(config.hidden1, config.input_dim(), rng);
        let layer2 = (config.num_layers == 2)
            .then(|| LstmCellParams::init(config.hidden2, config.hidden1, rng));
        let head_in = if config.num_layers == 2 {
            config.hidden2
        } else {
            config.hidden1
        };
        let head = DenseParams::init(1, head_in, rng);
        Self {
            layer1,
            layer2,
            head,
        }
    }

    pub fn zeros(config: &ForecasterConfig) -> Self {
        let layer1 = LstmCellParams::zeros(config.hidden1, config.input_dim());
        let layer2 =
            (config.num_layers == 2).then(|| LstmCellParams::zeros(config.hidden2, config.hidden1));
        let head_in = if config.num_layers == 2 {
            config.hidden2
        } else {
            config.hidden1
        };
        Self {
            layer1,
            layer2,
            head: DenseParams::zeros(1, head_in),
        }
    }

    pub fn flat_len(&self) -> usize {
        self.layer1.flat_len()
            + self.layer2.as_ref().map_or(0, LstmCellParams::flat_len)
            + self.head.flat_len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        self.layer1.append_flat(&mut out);
        if let Some(l2) = &self.layer2 {
            l2.append_flat(&mut out);
        }
        self.head.append_flat(&mut out);
        out
    }

    pub fn read_flat(&mut self, src: &[f64]) {
        let mut pos = 0;
        self.layer1.read_flat(src, &mut pos);
        if let Some(l2) = &mut self.layer2 {
            l2.read_flat(src, &mut pos);
        }
        self.head.read_flat(src, &mut pos);
        debug_assert_eq!(pos, src.len());
    }

    /// Inference forward pass over one window (timestep-major, no dropout).
    pub fn forward(&self, window: &[f64], lookback: usize, input_dim: usize) -> Result<f64> {
        if window.len() != lookback * input_dim {
            return Err(Error::DimensionMismatch {
                expected: lookback * input_dim,
                got: window.len(),
                context: "forecast window",
            });
        }
        let mut s1 = LstmState::zeros(self.layer1.hidden_size);
        let mut s2 = self
            .layer2
            .as_ref()
            .map(|l2| LstmState::zeros(l2.hidden_size));
        for t in 0..lookback {
            let x = &window[t * input_dim..(t + 1) * input_dim];
            let (next, _) = lstm_step(&self.layer1, x, &s1)?;
            s1 = next;
            if let (Some(l2), Some(state2)) = (&self.layer2, &mut s2) {
                let (next2, _) = lstm_step(l2, &s1.h, state2)?;
                *state2 = next2;
            }
        }
        let final_h = match &s2 {
            Some(state2) => &state2.h,
            None => &s1.h,
        };
        Ok(self.head.forward(final_h)?[0])
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_rmse: f64,
}

/// A trained forecaster: best-validation-epoch weights, the normalization
/// statistics it was trained with, and its training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedForecaster {
    pub config: ForecasterConfig,
    pub network: LstmNetwork,
    pub norm_stats: NormStats,
    /// Empty for models restored from a checkpoint.
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    /// Validation RMSE at the best epoch; `None` for restored models.
    pub best_val_rmse: Option<f64>,
}

impl TrainedForecaster {
    /// Deterministic normalized predictions (dropout disabled).
    pub fn predict(&self, windows: &[Vec<f64>]) -> Result<Vec<f64>> {
        windows
            .iter()
            .map(|w| {
                self.network
                    .forward(w, self.config.lookback, self.config.input_dim())
            })
            .collect()
    }

    /// Predictions denormalized to kW via the stored statistics.
    pub fn predict_denorm(&self, windows: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self
            .predict(windows)?
            .into_iter()
            .map(|v| self.norm_stats.target.denormalize_one(v))
            .collect())
    }
}

struct SampleCaches {
    caches1: Vec<GateCache>,
    caches2: Vec<GateCache>,
    masks_between: Vec<Vec<f64>>,
    mask_final: Vec<f64>,
    masked_final: Vec<f64>,
    output: f64,
}

fn forward_train(
    net: &LstmNetwork,
    window: &[f64],
    lookback: usize,
    input_dim: usize,
    dropout_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SampleCaches> {
    let mut s1 = LstmState::zeros(net.layer1.hidden_size);
    let mut s2 = net.layer2.as_ref().map(|l| LstmState::zeros(l.hidden_size));
    let mut caches1 = Vec::with_capacity(lookback);
    let mut caches2 = Vec::with_capacity(lookback);
    let mut masks_between = Vec::with_capacity(lookback);
    for t in 0..lookback {
        let x = &window[t * input_dim..(t + 1) * input_dim];
        let (next, cache) = lstm_step(&net.layer1, x, &s1)?;
        s1 = next;
        caches1.push(cache);
        if let (Some(l2), Some(state2)) = (&net.layer2, &mut s2) {
            let mask = dropout_mask(s1.h.len(), dropout_rate, rng)?;
            let masked: Vec<f64> = s1.h.iter().zip(&mask).map(|(h, m)| h * m).collect();
            let (next2, cache2) = lstm_step(l2, &masked, state2)?;
            *state2 = next2;
            caches2.push(cache2);
            masks_between.push(mask);
        }
    }
    let final_h = match &s2 {
        Some(state2) => state2.h.clone(),
        None => s1.h.clone(),
    };
    let mask_final = dropout_mask(final_h.len(), dropout_rate, rng)?;
    let masked_final: Vec<f64> = final_h.iter().zip(&mask_final).map(|(h, m)| h * m).collect();
    let output = net.head.forward(&masked_final)?[0];
    Ok(SampleCaches {
        caches1,
        caches2,
        masks_between,
        mask_final,
        masked_final,
        output,
    })
}

struct NetGrads {
    layer1: LstmCellParams,
    layer2: Option<LstmCellParams>,
    head: DenseParams,
}

impl NetGrads {
    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.layer1.append_flat(&mut out);
        if let Some(l2) = &self.layer2 {
            l2.append_flat(&mut out);
        }
        self.head.append_flat(&mut out);
        out
    }
}

fn backward_sample(
    net: &LstmNetwork,
    sample: &SampleCaches,
    d_output: f64,
    acc: &mut NetGrads,
) -> Result<()> {
    let d_masked_final = net
        .head
        .backward(&sample.masked_final, &[d_output], &mut acc.head);
    let d_final: Vec<f64> = d_masked_final
        .iter()
        .zip(&sample.mask_final)
        .map(|(d, m)| d * m)
        .collect();

    match (&net.layer2, &mut acc.layer2) {
        (Some(l2), Some(acc2)) => {
            let (grads2, dx2) = lstm_backward(l2, &sample.caches2, &d_final)?;
            accumulate(acc2, &grads2);
            // dx2[t] is the gradient w.r.t. the masked h1; undo the mask.
            let d_h1: Vec<Vec<f64>> = dx2
                .iter()
                .zip(&sample.masks_between)
                .map(|(dx, m)| dx.iter().zip(m).map(|(d, mv)| d * mv).collect())
                .collect();
            let (grads1, _) = lstm_backward_seq(&net.layer1, &sample.caches1, &d_h1)?;
            accumulate(&mut acc.layer1, &grads1);
        }
        _ => {
            let (grads1, _) = lstm_backward(&net.layer1, &sample.caches1, &d_final)?;
            accumulate(&mut acc.layer1, &grads1);
        }
    }
    Ok(())
}

fn accumulate(acc: &mut LstmCellParams, grads: &LstmCellParams) {
    for (a, g) in [
        (&mut acc.forget, &grads.forget),
        (&mut acc.input, &grads.input),
        (&mut acc.cell, &grads.cell),
        (&mut acc.output, &grads.output),
    ] {
        for (x, y) in a.w.data.iter_mut().zip(&g.w.data) {
            *x += y;
        }
        for (x, y) in a.u.data.iter_mut().zip(&g.u.data) {
            *x += y;
        }
        for (x, y) in a.b.iter_mut().zip(&g.b) {
            *x += y;
        }
    }
}

fn validation_rmse(net: &LstmNetwork, data: &SupervisedSet, indices: &[usize]) -> Result<f64> {
    let mut sq = 0.0;
    for &i in indices {
        let y = net.forward(&data.inputs[i], data.lookback, data.input_dim)?;
        let e = y - data.targets[i];
        sq += e * e;
    }
    Ok((sq / indices.len() as f64).sqrt())
}

/// Trains a forecaster with mini-batch gradient descent and early stopping
/// on validation RMSE. Returns the weights of the best validation epoch.
pub fn train(config: &ForecasterConfig, data: &SupervisedSet) -> Result<TrainedForecaster> {
    config.validate()?;
    if config.variant != data.variant
        || config.lookback != data.lookback
        || config.horizon != data.horizon
    {
        return Err(Error::InvalidParameter(format!(
            "config ({}, L={}, H={}) does not match data ({}, L={}, H={})",
            config.variant,
            config.lookback,
            config.horizon,
            data.variant,
            data.lookback,
            data.horizon
        )));
    }
    if data.split.train.is_empty() || data.split.validation.is_empty() || data.split.test.is_empty()
    {
        return Err(Error::InsufficientData {
            needed: 10,
            available: data.num_samples(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = LstmNetwork::new(config, &mut rng);
    let mut optimizer = OptimizerState::new(
        config.optimizer,
        config.learning_rate,
        net.flat_len(),
    );

    let n_train = data.split.train.len();
    let mut order: Vec<usize> = data.split.train.clone();
    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_flat = net.to_flat();
    let mut epochs_since_best = 0usize;

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            // Forward with per-sample dropout masks.
            let mut samples = Vec::with_capacity(batch.len());
            for &idx in batch {
                samples.push(forward_train(
                    &net,
                    &data.inputs[idx],
                    data.lookback,
                    data.input_dim,
                    config.dropout_rate,
                    &mut rng,
                )?);
            }
            let mut acc = NetGrads {
                layer1: LstmCellParams::zeros(net.layer1.hidden_size, net.layer1.input_size),
                layer2: net
                    .layer2
                    .as_ref()
                    .map(|l| LstmCellParams::zeros(l.hidden_size, l.input_size)),
                head: DenseParams::zeros(1, net.head.w.cols),
            };
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for (&idx, sample) in batch.iter().zip(&samples) {
                let err = sample.output - data.targets[idx];
                batch_loss += err * err * scale;
                backward_sample(&net, sample, 2.0 * err * scale, &mut acc)?;
            }
            if !batch_loss.is_finite() {
                return Err(Error::DivergedTraining { epoch });
            }
            epoch_loss += batch_loss * batch.len() as f64;

            let mut grads = acc.to_flat();
            clip_global_norm(&mut grads, 1.0);
            let mut params = net.to_flat();
            optimizer.step(&mut params, &grads)?;
            net.read_flat(&params);
        }
        let train_loss = epoch_loss / n_train as f64;
        let val_rmse = validation_rmse(&net, data, &data.split.validation)?;
        if !val_rmse.is_finite() {
            return Err(Error::DivergedTraining { epoch });
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_rmse,
        });
        if val_rmse < best_val {
            best_val = val_rmse;
            best_epoch = epoch;
            best_flat = net.to_flat();
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if epochs_since_best >= config.early_stop_patience {
                break;
            }
        }
    }

    net.read_flat(&best_flat);
    Ok(TrainedForecaster {
        config: config.clone(),
        network: net,
        norm_stats: data.norm_stats.clone(),
        history,
        best_epoch,
        best_val_rmse: Some(best_val),
    })
}

/// RMSE of the persistence baseline (predict the current power) on the
/// given sample indices, normalized scale.
pub fn persistence_rmse(data: &SupervisedSet, indices: &[usize]) -> f64 {
    let sq: f64 = indices
        .iter()
        .map(|&i| {
            let e = data.current_power[i] - data.targets[i];
            e * e
        })
        .sum();
    (sq / indices.len() as f64).sqrt()
}
