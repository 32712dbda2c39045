//! Versioned JSON checkpoints with a weight checksum.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forecaster::{ForecasterConfig, LstmNetwork, TrainedForecaster};
use crate::scada::NormStats;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    config: ForecasterConfig,
    norm_stats: NormStats,
    weights: LstmNetwork,
    weights_sha256: String,
}

fn weights_digest(network: &LstmNetwork) -> String {
    let flat = network.to_flat();
    let mut hasher = Sha256::new();
    for v in flat {
        hasher.update(v.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes a checkpoint that [`load`] restores bit-identically.
pub fn save(model: &TrainedForecaster, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        format_version: CHECKPOINT_VERSION,
        config: model.config.clone(),
        norm_stats: model.norm_stats.clone(),
        weights_sha256: weights_digest(&model.network),
        weights: model.network.clone(),
    };
    let json = serde_json::to_vec_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Restores a forecaster for inference. Training history is not part of
/// the checkpoint format and comes back empty.
pub fn load(path: &Path) -> Result<TrainedForecaster> {
    let bytes = std::fs::read(path)?;
    let file: CheckpointFile = serde_json::from_slice(&bytes)?;
    if file.format_version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: file.format_version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let digest = weights_digest(&file.weights);
    if digest != file.weights_sha256 {
        return Err(Error::Integrity(format!(
            "weight checksum mismatch: stored {}, computed {digest}",
            file.weights_sha256
        )));
    }
    file.config.validate()?;
    Ok(TrainedForecaster {
        config: file.config,
        network: file.weights,
        norm_stats: file.norm_stats,
        history: Vec::new(),
        best_epoch: 0,
        best_val_rmse: None,
    })
}
