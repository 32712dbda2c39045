//! Short-term wind turbine power forecasting toolkit.
//!
//! The pipeline: SCADA ingestion and windowing ([`scada`]), K-means +
//! autoencoder outlier filtering ([`outlier`]), from-scratch LSTM
//! forecasters ([`neural`], [`forecaster`]), and hyperparameter search via
//! self-adaptive differential evolution with DE/GWO/grid/random baselines
//! ([`search`]). A synthetic SCADA generator ([`synth`]) makes every
//! experiment reproducible without proprietary turbine data.

pub mod error;
pub mod forecaster;
pub mod linalg;
pub mod neural;
pub mod outlier;
pub mod scada;
pub mod search;
pub mod synth;

pub use error::{Error, Result};
