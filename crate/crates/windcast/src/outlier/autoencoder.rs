//! One-hidden-layer sigmoid autoencoder trained by full-batch gradient
//! descent on mean squared reconstruction error.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// hidden × input.
    pub w_enc: Matrix,
    pub b_enc: Vec<f64>,
    /// input × hidden.
    pub w_dec: Matrix,
    pub b_dec: Vec<f64>,
    /// Per-epoch full-batch loss before each update, plus the final loss.
    pub loss_history: Vec<f64>,
}

impl AutoencoderModel {
    fn hidden(&self, row: &[f64]) -> Vec<f64> {
        let mut z = self.b_enc.clone();
        self.w_enc.matvec_add(row, &mut z);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));
        z
    }

    /// Sigmoid-decoded reconstruction of one row.
    pub fn reconstruct(&self, row: &[f64]) -> Vec<f64> {
        let h = self.hidden(row);
        let mut z = self.b_dec.clone();
        self.w_dec.matvec_add(&h, &mut z);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));
        z
    }

    /// √(mean over features of squared reconstruction error).
    pub fn reconstruction_rmse(&self, row: &[f64]) -> f64 {
        let rec = self.reconstruct(row);
        let sq: f64 = rec
            .iter()
            .zip(row)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / row.len() as f64;
        sq.sqrt()
    }
}

fn xavier(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let scale = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    Matrix {
        rows,
        cols,
        data,
    }
}

/// Principal-axis initialization for the 1-unit bottleneck: the encoder
/// projects onto the cluster's principal direction and the decoder traces
/// that line back, so gradient descent starts from a near-fit instead of
/// the flat centroid plateau.
fn pca_line_init(rows: &[Vec<f64>]) -> Option<Params> {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for a in 0..d {
            for b in 0..d {
                cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / n;
            }
        }
    }
    // Power iteration for the principal eigenvector.
    let mut v: Vec<f64> = (0..d).map(|j| 1.0 + j as f64 * 0.01).collect();
    for _ in 0..64 {
        let mut next = vec![0.0; d];
        for a in 0..d {
            for b in 0..d {
                next[a] += cov[a][b] * v[b];
            }
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-15 {
            return None;
        }
        v = next.iter().map(|x| x / norm).collect();
    }
    let std_t = {
        let sq: f64 = rows
            .iter()
            .map(|r| {
                let t: f64 = (0..d).map(|j| v[j] * (r[j] - mean[j])).sum();
                t * t
            })
            .sum::<f64>()
            / n;
        sq.sqrt()
    };
    if std_t < 1e-9 {
        return None;
    }

    // Encoder: h = sigmoid(t / std_t) with t the principal coordinate.
    let w_enc = Matrix {
        rows: 1,
        cols: d,
        data: v.iter().map(|&vj| vj / std_t).collect(),
    };
    let b_enc = vec![-(0..d).map(|j| v[j] * mean[j]).sum::<f64>() / std_t];

    // Decoder: first-order match of sigmoid(w h + b) to mean + v·t at the
    // operating point h = 0.5 (where t = 4·std_t·(h - 1/2)).
    let mut w_dec = Matrix::zeros(d, 1);
    let mut b_dec = vec![0.0; d];
    for j in 0..d {
        let m = mean[j].clamp(0.05, 0.95);
        let w = 4.0 * std_t * v[j] / (m * (1.0 - m));
        w_dec.data[j] = w;
        b_dec[j] = (m / (1.0 - m)).ln() - 0.5 * w;
    }
    Some(Params {
        w_enc,
        b_enc,
        w_dec,
        b_dec,
    })
}

struct Params {
    w_enc: Matrix,
    b_enc: Vec<f64>,
    w_dec: Matrix,
    b_dec: Vec<f64>,
}

/// Full-batch loss and gradients of the current parameters.
fn loss_and_grads(p: &Params, rows: &[Vec<f64>]) -> (f64, Params) {
    let input_dim = p.w_enc.cols;
    let hidden_dim = p.w_enc.rows;
    let mut grads = Params {
        w_enc: Matrix::zeros(hidden_dim, input_dim),
        b_enc: vec![0.0; hidden_dim],
        w_dec: Matrix::zeros(input_dim, hidden_dim),
        b_dec: vec![0.0; input_dim],
    };
    let scale = 1.0 / (rows.len() * input_dim) as f64;
    let mut loss = 0.0;
    for row in rows {
        let mut zh = p.b_enc.clone();
        p.w_enc.matvec_add(row, &mut zh);
        let h: Vec<f64> = zh.iter().map(|&v| sigmoid(v)).collect();
        let mut zo = p.b_dec.clone();
        p.w_dec.matvec_add(&h, &mut zo);
        let out: Vec<f64> = zo.iter().map(|&v| sigmoid(v)).collect();

        let mut dz_dec = vec![0.0; input_dim];
        for d in 0..input_dim {
            let e = out[d] - row[d];
            loss += e * e * scale;
            dz_dec[d] = 2.0 * e * scale * out[d] * (1.0 - out[d]);
        }
        grads.w_dec.outer_add(&dz_dec, &h);
        for (g, dz) in grads.b_dec.iter_mut().zip(&dz_dec) {
            *g += dz;
        }
        let mut dh = vec![0.0; hidden_dim];
        p.w_dec.matvec_transpose_add(&dz_dec, &mut dh);
        let dz_enc: Vec<f64> = dh
            .iter()
            .zip(&h)
            .map(|(d, hv)| d * hv * (1.0 - hv))
            .collect();
        grads.w_enc.outer_add(&dz_enc, row);
        for (g, dz) in grads.b_enc.iter_mut().zip(&dz_enc) {
            *g += dz;
        }
    }
    (loss, grads)
}

/// Trains an autoencoder on the rows of one cluster.
///
/// Returns the parameters with the lowest full-batch loss seen during
/// training, so the reported loss never exceeds the initial loss.
pub fn autoencoder_fit(
    rows: &[Vec<f64>],
    hidden_dim: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<AutoencoderModel> {
    if rows.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "autoencoder needs >= 10 rows, got {}",
            rows.len()
        )));
    }
    if hidden_dim < 1 {
        return Err(Error::InvalidParameter("hidden_dim must be >= 1".into()));
    }
    let input_dim = rows[0].len();
    if rows.iter().any(|r| r.len() != input_dim) {
        return Err(Error::DimensionMismatch {
            expected: input_dim,
            got: rows.iter().map(Vec::len).find(|&l| l != input_dim).unwrap_or(0),
            context: "autoencoder rows",
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = (hidden_dim == 1)
        .then(|| pca_line_init(rows))
        .flatten()
        .unwrap_or_else(|| Params {
            w_enc: xavier(hidden_dim, input_dim, &mut rng),
            b_enc: vec![0.0; hidden_dim],
            w_dec: xavier(input_dim, hidden_dim, &mut rng),
            b_dec: vec![0.0; input_dim],
        });

    let mut history = Vec::with_capacity(epochs + 1);
    let mut best_loss = f64::INFINITY;
    let mut best = (
        p.w_enc.clone(),
        p.b_enc.clone(),
        p.w_dec.clone(),
        p.b_dec.clone(),
    );
    for _ in 0..epochs {
        let (loss, grads) = loss_and_grads(&p, rows);
        history.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best = (
                p.w_enc.clone(),
                p.b_enc.clone(),
                p.w_dec.clone(),
                p.b_dec.clone(),
            );
        }
        for (w, g) in p.w_enc.data.iter_mut().zip(&grads.w_enc.data) {
            *w -= lr * g;
        }
        for (b, g) in p.b_enc.iter_mut().zip(&grads.b_enc) {
            *b -= lr * g;
        }
        for (w, g) in p.w_dec.data.iter_mut().zip(&grads.w_dec.data) {
            *w -= lr * g;
        }
        for (b, g) in p.b_dec.iter_mut().zip(&grads.b_dec) {
            *b -= lr * g;
        }
    }
    let (final_loss, _) = loss_and_grads(&p, rows);
    history.push(final_loss);
    if final_loss < best_loss {
        best = (p.w_enc, p.b_enc, p.w_dec, p.b_dec);
    }

    Ok(AutoencoderModel {
        input_dim,
        hidden_dim,
        w_enc: best.0,
        b_enc: best.1,
        w_dec: best.2,
        b_dec: best.3,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent forward-pass oracle used to score trained models.
    fn oracle_rmse(model: &AutoencoderModel, row: &[f64]) -> f64 {
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let mut h = vec![0.0; model.hidden_dim];
        for (j, hv) in h.iter_mut().enumerate() {
            let mut z = model.b_enc[j];
            for (i, &x) in row.iter().enumerate() {
                z += model.w_enc.get(j, i) * x;
            }
            *hv = sig(z);
        }
        let mut sq = 0.0;
        for d in 0..model.input_dim {
            let mut z = model.b_dec[d];
            for (j, &hv) in h.iter().enumerate() {
                z += model.w_dec.get(d, j) * hv;
            }
            let e = sig(z) - row[d];
            sq += e * e;
        }
        (sq / model.input_dim as f64).sqrt()
    }

    #[test]
    fn constant_dataset_is_learned_to_high_precision() {
        let rows: Vec<Vec<f64>> = (0..50).map(|_| vec![0.7, 0.3]).collect();
        let model = autoencoder_fit(&rows, 1, 4000, 1.0, 0).unwrap();
        let rmse = model.reconstruction_rmse(&rows[0]);
        assert!(rmse < 1e-3, "rmse {rmse}");
        assert!(
            *model.loss_history.last().unwrap() <= model.loss_history[0],
            "final loss exceeds initial"
        );
    }

    #[test]
    fn same_seed_gives_bit_identical_weights() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 10) as f64 / 10.0, (i % 7) as f64 / 7.0])
            .collect();
        let a = autoencoder_fit(&rows, 1, 200, 0.05, 42).unwrap();
        let b = autoencoder_fit(&rows, 1, 200, 0.05, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn outliers_have_higher_reconstruction_error_than_inliers() {
        // 200 inliers on a line through [0,1]^2, 5 far-off rows.
        let mut rows: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let t = i as f64 / 199.0;
                vec![t, 0.2 + 0.6 * t]
            })
            .collect();
        let outliers: Vec<Vec<f64>> = vec![
            vec![0.05, 0.95],
            vec![0.1, 0.9],
            vec![0.9, 0.05],
            vec![0.95, 0.1],
            vec![0.85, 0.02],
        ];
        rows.extend(outliers.iter().cloned());
        let model = autoencoder_fit(&rows, 1, 2000, 0.5, 7).unwrap();

        let inlier_mean: f64 = rows[..200]
            .iter()
            .map(|r| oracle_rmse(&model, r))
            .sum::<f64>()
            / 200.0;
        let outlier_mean: f64 = outliers
            .iter()
            .map(|r| oracle_rmse(&model, r))
            .sum::<f64>()
            / outliers.len() as f64;
        assert!(
            inlier_mean < outlier_mean,
            "inlier {inlier_mean} vs outlier {outlier_mean}"
        );
        // The oracle and the implementation agree.
        for r in rows.iter().take(5) {
            assert!((oracle_rmse(&model, r) - model.reconstruction_rmse(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_cluster_is_rejected() {
        let rows: Vec<Vec<f64>> = (0..9).map(|_| vec![0.5, 0.5]).collect();
        assert!(autoencoder_fit(&rows, 1, 10, 0.05, 0).is_err());
    }

    #[test]
    fn final_loss_never_exceeds_initial() {
        // Aggressive learning rate makes plain GD oscillate; the returned
        // parameters must still satisfy the contract.
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 3) as f64 / 2.0, ((i * i) % 5) as f64 / 4.0])
            .collect();
        let model = autoencoder_fit(&rows, 1, 100, 25.0, 1).unwrap();
        let initial = model.loss_history[0];
        let returned: f64 = rows
            .iter()
            .map(|r| model.reconstruction_rmse(r).powi(2) * r.len() as f64)
            .sum::<f64>()
            / (rows.len() * 2) as f64;
        assert!(returned <= initial + 1e-12);
    }
}
