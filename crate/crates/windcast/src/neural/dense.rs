//! Fully connected layer with a linear output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    /// out × in.
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            w: Matrix::zeros(out_dim, in_dim),
            b: vec![0.0; out_dim],
        }
    }

    pub fn init(out_dim: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = (6.0 / (out_dim + in_dim) as f64).sqrt();
        Self {
            w: Matrix {
                rows: out_dim,
                cols: in_dim,
                data: (0..out_dim * in_dim)
                    .map(|_| rng.random_range(-scale..scale))
                    .collect(),
            },
            b: vec![0.0; out_dim],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.w.cols {
            return Err(Error::DimensionMismatch {
                expected: self.w.cols,
                got: x.len(),
                context: "dense forward",
            });
        }
        let mut y = self.b.clone();
        self.w.matvec_add(x, &mut y);
        Ok(y)
    }

    /// Accumulates parameter gradients and returns dLoss/dx.
    pub fn backward(&self, x: &[f64], dy: &[f64], grads: &mut DenseParams) -> Vec<f64> {
        grads.w.outer_add(dy, x);
        for (b, d) in grads.b.iter_mut().zip(dy) {
            *b += d;
        }
        let mut dx = vec![0.0; self.w.cols];
        self.w.matvec_transpose_add(dy, &mut dx);
        dx
    }

    pub fn flat_len(&self) -> usize {
        self.w.data.len() + self.b.len()
    }

    pub fn append_flat(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.w.data);
        out.extend_from_slice(&self.b);
    }

    pub fn read_flat(&mut self, src: &[f64], pos: &mut usize) {
        let wn = self.w.data.len();
        self.w.data.copy_from_slice(&src[*pos..*pos + wn]);
        *pos += wn;
        let bn = self.b.len();
        self.b.copy_from_slice(&src[*pos..*pos + bn]);
        *pos += bn;
    }
}
