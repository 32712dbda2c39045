//! SCADA outlier removal: K-means bands over normalized (wind_speed, power),
//! then a per-band autoencoder flags rows whose reconstruction error exceeds
//! the band's mean.

mod autoencoder;
mod kmeans;

pub use autoencoder::{autoencoder_fit, AutoencoderModel};
pub use kmeans::{kmeans_fit, ClusterModel};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scada::{FeatureRange, ScadaSeries};

/// Whether the removal threshold is each cluster's own mean RMSE or the
/// mean over all filtered rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    PerCluster,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Number of K-means bands.
    pub k: usize,
    pub seed: u64,
    /// Autoencoder bottleneck width.
    pub hidden_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub threshold_mode: ThresholdMode,
    pub kmeans_max_iters: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            k: 10,
            seed: 0,
            hidden_dim: 1,
            epochs: 500,
            learning_rate: 0.05,
            threshold_mode: ThresholdMode::PerCluster,
            kmeans_max_iters: 100,
        }
    }
}

/// Per-cluster filtering outcome. `mean_rmse`/`threshold` are `None` for
/// clusters too small to filter (passed through unchanged).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterFilterStats {
    pub cluster_id: usize,
    pub size: usize,
    pub mean_rmse: Option<f64>,
    pub threshold: Option<f64>,
    pub removed: usize,
    pub passed_through: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterReport {
    pub total_records: usize,
    /// Original indices kept, ascending. `kept ∪ removed` partitions the input.
    pub kept_indices: Vec<usize>,
    pub removed_indices: Vec<usize>,
    /// K-means cluster per original record.
    pub assignments: Vec<usize>,
    pub clusters: Vec<ClusterFilterStats>,
    pub threshold_mode: ThresholdMode,
}

impl FilterReport {
    pub fn removed_count(&self) -> usize {
        self.removed_indices.len()
    }
}

/// Indices of values strictly greater than `threshold`, with a relative
/// margin so float noise in the mean never flags values sitting exactly
/// at it.
fn strictly_above(values: &[f64], threshold: f64) -> Vec<usize> {
    let cutoff = threshold + threshold.abs() * 1e-9;
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > cutoff)
        .map(|(i, _)| i)
        .collect()
}

/// Removes outliers from a series.
///
/// Rows are clustered in normalized (wind_speed, power) space; each cluster
/// of at least 10 rows trains its own autoencoder, and rows reconstructing
/// strictly worse than the threshold are dropped. The kept series preserves
/// original ordering and timestamps.
pub fn filter_outliers(
    series: &ScadaSeries,
    config: &FilterConfig,
) -> Result<(ScadaSeries, FilterReport)> {
    if series.is_empty() {
        return Err(Error::EmptyData("series".into()));
    }

    let speeds: Vec<f64> = series.records().iter().map(|r| r.wind_speed).collect();
    let powers: Vec<f64> = series.records().iter().map(|r| r.power).collect();
    let speed_range = FeatureRange::from_values("wind_speed", &speeds)?;
    let power_range = FeatureRange::from_values("power", &powers)?;
    let points: Vec<[f64; 2]> = speeds
        .iter()
        .zip(&powers)
        .map(|(&u, &p)| [speed_range.normalize_one(u), power_range.normalize_one(p)])
        .collect();

    let clustering = kmeans_fit(&points, config.k, config.seed, config.kmeans_max_iters)?;

    // Rows per cluster, in original order.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.k];
    for (i, &c) in clustering.assignments.iter().enumerate() {
        members[c].push(i);
    }

    // Train one autoencoder per sufficiently large cluster and score every
    // row. The autoencoder sees the cluster rescaled to the unit box (a
    // raw cluster occupies a tiny corner of feature space, which starves
    // the gradients); reconstruction errors are mapped back to the global
    // normalized scale so thresholds are comparable across clusters.
    struct ClusterScores {
        cluster_id: usize,
        rmse: Vec<f64>, // parallel to members[cluster_id]
    }
    let scored: Vec<Option<ClusterScores>> = members
        .par_iter()
        .enumerate()
        .map(|(c, rows_idx)| {
            if rows_idx.len() < 10 {
                return Ok(None);
            }
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for &i in rows_idx {
                for d in 0..2 {
                    lo[d] = lo[d].min(points[i][d]);
                    hi[d] = hi[d].max(points[i][d]);
                }
            }
            let span = [hi[0] - lo[0], hi[1] - lo[1]];
            // Map the cluster into [0.35, 0.65]: the sigmoid decoder is
            // near-linear there, so the fit bottoms out at the noise floor
            // instead of a curvature-mismatch plateau.
            const LOCAL_SPAN: f64 = 0.3;
            let to_local = |p: [f64; 2]| -> Vec<f64> {
                (0..2)
                    .map(|d| {
                        if span[d] > 1e-12 {
                            0.35 + LOCAL_SPAN * (p[d] - lo[d]) / span[d]
                        } else {
                            0.5
                        }
                    })
                    .collect()
            };
            let rows: Vec<Vec<f64>> = rows_idx.iter().map(|&i| to_local(points[i])).collect();
            let seed = config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c as u64);
            let model = autoencoder_fit(
                &rows,
                config.hidden_dim,
                config.epochs,
                config.learning_rate,
                seed,
            )?;
            let rmse = rows
                .iter()
                .map(|r| {
                    let rec = model.reconstruct(r);
                    let sq: f64 = (0..2)
                        .map(|d| {
                            let e = (rec[d] - r[d]) * span[d] / LOCAL_SPAN;
                            e * e
                        })
                        .sum::<f64>()
                        / 2.0;
                    sq.sqrt()
                })
                .collect();
            Ok(Some(ClusterScores {
                cluster_id: c,
                rmse,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    // Removal threshold: the root-mean-square of the per-row errors (the
    // dataset's own reconstruction RMSE). Outliers inflate it
    // quadratically, so the threshold sits well above the clean bulk.
    let rms = |values: &[f64]| -> f64 {
        (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
    };
    let global_threshold = match config.threshold_mode {
        ThresholdMode::PerCluster => None,
        ThresholdMode::Global => {
            let all: Vec<f64> = scored
                .iter()
                .flatten()
                .flat_map(|s| s.rmse.iter().copied())
                .collect();
            (!all.is_empty()).then(|| rms(&all))
        }
    };

    let mut removed_flags = vec![false; series.len()];
    let mut cluster_stats = Vec::with_capacity(config.k);
    for (c, rows_idx) in members.iter().enumerate() {
        match &scored[c] {
            None => cluster_stats.push(ClusterFilterStats {
                cluster_id: c,
                size: rows_idx.len(),
                mean_rmse: None,
                threshold: None,
                removed: 0,
                passed_through: true,
            }),
            Some(scores) => {
                debug_assert_eq!(scores.cluster_id, c);
                let mean = scores.rmse.iter().sum::<f64>() / scores.rmse.len() as f64;
                let threshold = global_threshold.unwrap_or_else(|| rms(&scores.rmse));
                let above = strictly_above(&scores.rmse, threshold);
                if above.len() * 2 > rows_idx.len() {
                    return Err(Error::DegenerateFilter {
                        cluster: c,
                        removed: above.len(),
                        size: rows_idx.len(),
                    });
                }
                for &local in &above {
                    removed_flags[rows_idx[local]] = true;
                }
                cluster_stats.push(ClusterFilterStats {
                    cluster_id: c,
                    size: rows_idx.len(),
                    mean_rmse: Some(mean),
                    threshold: Some(threshold),
                    removed: above.len(),
                    passed_through: false,
                });
            }
        }
    }

    let kept_indices: Vec<usize> = (0..series.len()).filter(|&i| !removed_flags[i]).collect();
    let removed_indices: Vec<usize> = (0..series.len()).filter(|&i| removed_flags[i]).collect();
    let kept = series.subset(&kept_indices)?;

    let report = FilterReport {
        total_records: series.len(),
        kept_indices,
        removed_indices,
        assignments: clustering.assignments,
        clusters: cluster_stats,
        threshold_mode: config.threshold_mode,
    };
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scada::ScadaRecord;
    use crate::synth::{generate, OutlierKind, SynthConfig, TurbineSpec};

    fn record(ts: i64, speed: f64, power: f64) -> ScadaRecord {
        ScadaRecord {
            timestamp: ts,
            wind_speed: speed,
            wind_direction: 180.0,
            power,
            ambient_temp: 10.0,
            nacelle_temp: 20.0,
            hydraulic_oil_temp: 40.0,
            hydraulic_oil_pressure: 160.0,
        }
    }

    #[test]
    fn identical_errors_remove_nothing() {
        assert!(strictly_above(&[0.3, 0.3, 0.3, 0.3], 0.3).is_empty());

        // Two constant clusters: every row in a cluster reconstructs with
        // the same error, so nothing strictly exceeds the mean.
        let mut records = Vec::new();
        for i in 0..30 {
            records.push(record(i * 600, 3.0, 100.0));
        }
        for i in 30..60 {
            records.push(record(i * 600, 12.0, 2500.0));
        }
        let series = ScadaSeries::new(records, 600).unwrap();
        let config = FilterConfig {
            k: 2,
            epochs: 50,
            ..FilterConfig::default()
        };
        let (kept, report) = filter_outliers(&series, &config).unwrap();
        assert_eq!(kept.len(), 60);
        assert_eq!(report.removed_count(), 0);
    }

    #[test]
    fn report_partitions_the_input() {
        let config = SynthConfig {
            n_records: 1_500,
            outlier_rate: 0.05,
            outlier_kind: OutlierKind::Scaled,
            seed: 1,
            ..SynthConfig::default()
        };
        let (series, _) = generate(&TurbineSpec::default(), &config).unwrap();
        let (kept, report) = filter_outliers(&series, &FilterConfig::default()).unwrap();
        assert_eq!(
            report.kept_indices.len() + report.removed_indices.len(),
            report.total_records
        );
        assert_eq!(kept.len(), report.kept_indices.len());
        let mut all: Vec<usize> = report
            .kept_indices
            .iter()
            .chain(&report.removed_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..series.len()).collect::<Vec<_>>());
        // Kept series preserves ordering and timestamps.
        for (a, b) in kept.records().windows(2).map(|w| (w[0], w[1])).take(50) {
            assert!(a.timestamp < b.timestamp);
        }
    }

    #[test]
    fn injected_outliers_are_mostly_removed() {
        let config = SynthConfig {
            n_records: 4_000,
            outlier_rate: 0.05,
            outlier_kind: OutlierKind::Scaled,
            seed: 3,
            ..SynthConfig::default()
        };
        let (series, labels) = generate(&TurbineSpec::default(), &config).unwrap();
        let (_, report) = filter_outliers(&series, &FilterConfig::default()).unwrap();
        let removed: std::collections::HashSet<usize> =
            report.removed_indices.iter().copied().collect();
        let caught = labels.iter().filter(|i| removed.contains(i)).count();
        let recall = caught as f64 / labels.len() as f64;
        let inliers = series.len() - labels.len();
        let false_removals = removed.len() - caught;
        let false_rate = false_removals as f64 / inliers as f64;
        assert!(recall >= 0.8, "recall {recall}");
        assert!(false_rate <= 0.2, "false removal rate {false_rate}");
    }

    #[test]
    fn second_pass_removes_little() {
        let config = SynthConfig {
            n_records: 3_000,
            outlier_rate: 0.05,
            outlier_kind: OutlierKind::Scaled,
            seed: 5,
            ..SynthConfig::default()
        };
        let (series, _) = generate(&TurbineSpec::default(), &config).unwrap();
        let filter_cfg = FilterConfig::default();
        let (kept, first) = filter_outliers(&series, &filter_cfg).unwrap();
        let (_, second) = filter_outliers(&kept, &filter_cfg).unwrap();
        assert!(
            second.removed_count() * 10 <= first.removed_count(),
            "second pass removed {} vs first {}",
            second.removed_count(),
            first.removed_count()
        );
    }

    #[test]
    fn tiny_clusters_pass_through_flagged() {
        // 11 distinct points, k=4: some clusters end up with < 10 rows.
        let records: Vec<ScadaRecord> = (0..11)
            .map(|i| record(i * 600, i as f64, (i * i) as f64))
            .collect();
        let series = ScadaSeries::new(records, 600).unwrap();
        let config = FilterConfig {
            k: 4,
            epochs: 20,
            ..FilterConfig::default()
        };
        let (kept, report) = filter_outliers(&series, &config).unwrap();
        assert_eq!(kept.len(), 11, "passthrough clusters keep all rows");
        assert!(report.clusters.iter().any(|c| c.passed_through));
        for c in report.clusters.iter().filter(|c| c.passed_through) {
            assert_eq!(c.removed, 0);
            assert!(c.mean_rmse.is_none());
        }
    }

    #[test]
    fn empty_series_is_rejected() {
        let series = ScadaSeries::new(Vec::new(), 600).unwrap();
        assert!(filter_outliers(&series, &FilterConfig::default()).is_err());
    }

    #[test]
    fn global_threshold_mode_runs() {
        let config = SynthConfig {
            n_records: 1_200,
            outlier_rate: 0.05,
            seed: 9,
            ..SynthConfig::default()
        };
        let (series, _) = generate(&TurbineSpec::default(), &config).unwrap();
        let filter_cfg = FilterConfig {
            threshold_mode: ThresholdMode::Global,
            ..FilterConfig::default()
        };
        let (_, report) = filter_outliers(&series, &filter_cfg).unwrap();
        let thresholds: Vec<f64> = report.clusters.iter().filter_map(|c| c.threshold).collect();
        assert!(thresholds.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-15));
    }

    #[test]
    fn deterministic_in_seed() {
        let config = SynthConfig {
            n_records: 1_000,
            outlier_rate: 0.05,
            seed: 13,
            ..SynthConfig::default()
        };
        let (series, _) = generate(&TurbineSpec::default(), &config).unwrap();
        let (_, a) = filter_outliers(&series, &FilterConfig::default()).unwrap();
        let (_, b) = filter_outliers(&series, &FilterConfig::default()).unwrap();
        assert_eq!(a.kept_indices, b.kept_indices);
        assert_eq!(a.removed_indices, b.removed_indices);
    }
}
