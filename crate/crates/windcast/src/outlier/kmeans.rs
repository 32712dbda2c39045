//! Lloyd's algorithm with k-means++ seeding over 2-D points.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted clustering of normalized (wind_speed, power) points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<[f64; 2]>,
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    /// Sum of squared distances to assigned centroids.
    pub inertia: f64,
    /// Inertia after each Lloyd iteration; non-increasing.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn nearest(point: [f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centroids.iter().enumerate() {
        let d = dist2(point, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    (best, best_d)
}

/// k-means++ seeding: first centroid uniform, the rest weighted by squared
/// distance to the closest centroid chosen so far.
fn seed_centroids(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|&p| dist2(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            points[chosen]
        } else {
            // All remaining mass at the chosen centroids; any point works.
            points[rng.random_range(0..points.len())]
        };
        centroids.push(next);
        for (i, &p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, next));
        }
    }
    centroids
}

/// Fits `k` clusters to `points` with Lloyd's algorithm.
///
/// Terminates when assignments stabilize or `max_iters` is reached. Empty
/// clusters are re-seeded from the point farthest from its centroid.
pub fn kmeans_fit(
    points: &[[f64; 2]],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut distinct: Vec<[f64; 2]> = points.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::InfeasibleK {
            k,
            distinct: distinct.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut assignments = vec![0usize; points.len()];
    let mut inertia_history = Vec::new();
    let mut iterations = 0usize;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        // Assignment step.
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, &p) in points.iter().enumerate() {
            let (j, d) = nearest(p, &centroids);
            if assignments[i] != j {
                assignments[i] = j;
                changed = true;
            }
            inertia += d;
        }
        inertia_history.push(inertia);

        // Update step.
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, &p) in points.iter().enumerate() {
            let j = assignments[i];
            sums[j][0] += p[0];
            sums[j][1] += p[1];
            counts[j] += 1;
        }
        let mut reseeded = false;
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            } else {
                // Re-seed an empty cluster from the farthest point.
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(ia, &a), (ib, &b)| {
                        let da = dist2(a, centroids[assignments[*ia]]);
                        let db = dist2(b, centroids[assignments[*ib]]);
                        da.partial_cmp(&db).expect("finite")
                    })
                    .map(|(i, _)| i)
                    .expect("non-empty points");
                centroids[j] = points[far];
                reseeded = true;
            }
        }

        if !changed && !reseeded && iterations > 1 {
            break;
        }
    }

    // Final assignment against the last centroid update.
    let mut inertia = 0.0;
    for (i, &p) in points.iter().enumerate() {
        let (j, d) = nearest(p, &centroids);
        assignments[i] = j;
        inertia += d;
    }
    inertia_history.push(inertia);

    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia,
        inertia_history,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn k1_centroid_is_the_mean() {
        let points = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 3.0], [0.5, 1.0]];
        let model = kmeans_fit(&points, 1, 0, 50).unwrap();
        let mean = [0.5, 1.0];
        assert!((model.centroids[0][0] - mean[0]).abs() < 1e-12);
        assert!((model.centroids[0][1] - mean[1]).abs() < 1e-12);
    }

    #[test]
    fn two_points_two_clusters_exact_fit() {
        let points = vec![[0.1, 0.2], [0.9, 0.8]];
        let model = kmeans_fit(&points, 2, 0, 50).unwrap();
        assert_eq!(model.inertia, 0.0);
        assert_ne!(model.assignments[0], model.assignments[1]);
    }

    #[test]
    fn three_separated_blobs_are_recovered() {
        let centers = [[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut points = Vec::new();
        for &c in &centers {
            for _ in 0..60 {
                points.push([c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            }
        }
        let model = kmeans_fit(&points, 3, 1, 100).unwrap();

        // Brute-force oracle: every point's assigned centroid is its nearest
        // generating center's matched centroid.
        let mut matched = vec![usize::MAX; 3];
        for (ci, &c) in centers.iter().enumerate() {
            let (j, d) = nearest(c, &model.centroids);
            assert!(d.sqrt() < 0.02, "centroid {j} is {} from center {ci}", d.sqrt());
            matched[ci] = j;
        }
        matched.sort_unstable();
        matched.dedup();
        assert_eq!(matched.len(), 3, "each blob gets its own centroid");
        for (i, &p) in points.iter().enumerate() {
            let blob = i / 60;
            let (want, _) = nearest(centers[blob], &model.centroids);
            assert_eq!(model.assignments[i], want);
        }
    }

    #[test]
    fn infeasible_k_is_rejected() {
        let points = vec![[0.5, 0.5], [0.5, 0.5], [0.1, 0.1]];
        let err = kmeans_fit(&points, 3, 0, 10).unwrap_err();
        assert!(matches!(err, Error::InfeasibleK { k: 3, distinct: 2 }));
    }

    #[test]
    fn inertia_history_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<[f64; 2]> = (0..500)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let model = kmeans_fit(&points, 10, 9, 100).unwrap();
        for pair in model.inertia_history.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "inertia rose: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn converged_assignments_are_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let points: Vec<[f64; 2]> = (0..300)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let model = kmeans_fit(&points, 5, 4, 200).unwrap();
        for (i, &p) in points.iter().enumerate() {
            let assigned = dist2(p, model.centroids[model.assignments[i]]);
            for &c in &model.centroids {
                assert!(dist2(p, c) >= assigned - 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let points: Vec<[f64; 2]> = (0..100)
            .map(|i| [(i % 13) as f64 / 13.0, (i % 7) as f64 / 7.0])
            .collect();
        let a = kmeans_fit(&points, 4, 42, 100).unwrap();
        let b = kmeans_fit(&points, 4, 42, 100).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.assignments, b.assignments);
    }
}
