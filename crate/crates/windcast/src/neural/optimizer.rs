//! Weight-update rules: SGD with momentum, Adam, RMSProp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgdm,
    #[default]
    Adam,
    RmsProp,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgdm => "sgdm",
            OptimizerKind::Adam => "adam",
            OptimizerKind::RmsProp => "rmsprop",
        }
    }

    /// Categorical code 1..3 as used by the hyperparameter space.
    pub fn from_code(code: usize) -> Result<Self> {
        match code {
            1 => Ok(OptimizerKind::Sgdm),
            2 => Ok(OptimizerKind::Adam),
            3 => Ok(OptimizerKind::RmsProp),
            other => Err(Error::InvalidParameter(format!(
                "optimizer code must be 1..=3, got {other}"
            ))),
        }
    }

    pub fn code(self) -> usize {
        match self {
            OptimizerKind::Sgdm => 1,
            OptimizerKind::Adam => 2,
            OptimizerKind::RmsProp => 3,
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgdm" | "sqdm" => Ok(OptimizerKind::Sgdm),
            "adam" => Ok(OptimizerKind::Adam),
            "rmsprop" => Ok(OptimizerKind::RmsProp),
            other => Err(Error::InvalidParameter(format!(
                "unknown optimizer `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;
const MOMENTUM: f64 = 0.9;
const RMS_DECAY: f64 = 0.9;

/// Per-parameter moment buffers plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    step: u64,
    /// First moment (Adam) / velocity (SGDM); empty for RMSProp.
    m: Vec<f64>,
    /// Second moment (Adam) / running square (RMSProp); empty for SGDM.
    v: Vec<f64>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, learning_rate: f64, param_count: usize) -> Self {
        let (m, v) = match kind {
            OptimizerKind::Sgdm => (vec![0.0; param_count], Vec::new()),
            OptimizerKind::Adam => (vec![0.0; param_count], vec![0.0; param_count]),
            OptimizerKind::RmsProp => (Vec::new(), vec![0.0; param_count]),
        };
        Self {
            kind,
            learning_rate,
            step: 0,
            m,
            v,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update in place. Refuses non-finite gradients without
    /// touching the parameters or the step counter.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                got: grads.len(),
                context: "optimizer step",
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite gradient; step refused".into()));
        }
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgdm => {
                for ((p, &g), vel) in params.iter_mut().zip(grads).zip(&mut self.m) {
                    *vel = MOMENTUM * *vel + g;
                    *p -= lr * *vel;
                }
            }
            OptimizerKind::Adam => {
                let t = self.step as i32;
                let bias1 = 1.0 - BETA1.powi(t);
                let bias2 = 1.0 - BETA2.powi(t);
                for (k, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
                    self.m[k] = BETA1 * self.m[k] + (1.0 - BETA1) * g;
                    self.v[k] = BETA2 * self.v[k] + (1.0 - BETA2) * g * g;
                    let m_hat = self.m[k] / bias1;
                    let v_hat = self.v[k] / bias2;
                    *p -= lr * m_hat / (v_hat.sqrt() + EPS);
                }
            }
            OptimizerKind::RmsProp => {
                for ((p, &g), s) in params.iter_mut().zip(grads).zip(&mut self.v) {
                    *s = RMS_DECAY * *s + (1.0 - RMS_DECAY) * g * g;
                    *p -= lr * g / (s.sqrt() + EPS);
                }
            }
        }
        Ok(())
    }
}
