//! Minimal neural machinery: LSTM cell with BPTT, dense head, dropout, and
//! the three weight optimizers. 64-bit floats throughout.

mod dense;
mod dropout;
mod lstm;
mod optimizer;

pub use dense::DenseParams;
pub use dropout::dropout_mask;
pub use lstm::{
    lstm_backward, lstm_backward_seq, lstm_step, GateCache, GateParams, LstmCellParams,
    LstmGrads, LstmState,
};
pub use optimizer::{OptimizerKind, OptimizerState};

/// Scales `grads` so the global L2 norm is at most `max_norm`.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_leaves_small_gradients_alone() {
        let mut g = vec![0.3, -0.4];
        clip_global_norm(&mut g, 1.0);
        assert_eq!(g, vec![0.3, -0.4]);
    }

    #[test]
    fn clip_rescales_large_gradients() {
        let mut g = vec![3.0, 4.0];
        clip_global_norm(&mut g, 1.0);
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((g[0] / g[1] - 0.75).abs() < 1e-12, "direction preserved");
    }
}
