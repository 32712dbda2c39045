//! LSTM cell: forward step and backpropagation through time.
//!
//! Gate equations, with σ the logistic function, ⊙ the Hadamard product,
//! `w` recurrent weights, `u` input weights, `b` biases:
//!
//! ```text
//! f_t = σ(w_f h_{t-1} + u_f x_t + b_f)
//! i_t = σ(w_i h_{t-1} + u_i x_t + b_i)
//! c̃_t = tanh(w_c h_{t-1} + u_c x_t + b_c)
//! c_t = c_{t-1} ⊙ f_t + i_t ⊙ c̃_t
//! o_t = σ(w_o h_{t-1} + u_o x_t + b_o)
//! h_t = o_t ⊙ tanh(c_t)
//! ```

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigmoid, Matrix};

/// One gate's parameters: recurrent weight (hidden×hidden), input weight
/// (hidden×input), bias (hidden).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            w: Matrix::zeros(hidden, hidden),
            u: Matrix::zeros(hidden, input),
            b: vec![0.0; hidden],
        }
    }

    fn xavier(hidden: usize, input: usize, rng: &mut ChaCha8Rng) -> Self {
        let init = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
            let scale = (6.0 / (rows + cols) as f64).sqrt();
            Matrix {
                rows,
                cols,
                data: (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect(),
            }
        };
        Self {
            w: init(hidden, hidden, rng),
            u: init(hidden, input, rng),
            b: vec![0.0; hidden],
        }
    }

    /// Pre-activation z = w·h_prev + u·x + b.
    fn preactivation(&self, h_prev: &[f64], x: &[f64]) -> Vec<f64> {
        let mut z = self.b.clone();
        self.w.matvec_add(h_prev, &mut z);
        self.u.matvec_add(x, &mut z);
        z
    }

    fn is_finite(&self) -> bool {
        self.w.is_finite() && self.u.is_finite() && self.b.iter().all(|v| v.is_finite())
    }

    fn norm_sq(&self) -> f64 {
        self.w.norm().powi(2) + self.u.norm().powi(2) + self.b.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn append_flat(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.w.data);
        out.extend_from_slice(&self.u.data);
        out.extend_from_slice(&self.b);
    }

    pub fn read_flat(&mut self, src: &[f64], pos: &mut usize) {
        let wn = self.w.data.len();
        self.w.data.copy_from_slice(&src[*pos..*pos + wn]);
        *pos += wn;
        let un = self.u.data.len();
        self.u.data.copy_from_slice(&src[*pos..*pos + un]);
        *pos += un;
        let bn = self.b.len();
        self.b.copy_from_slice(&src[*pos..*pos + bn]);
        *pos += bn;
    }

    pub fn flat_len(&self) -> usize {
        self.w.data.len() + self.u.data.len() + self.b.len()
    }
}

/// Full parameter set of one LSTM cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub forget: GateParams,
    pub input: GateParams,
    pub cell: GateParams,
    pub output: GateParams,
    pub hidden_size: usize,
    pub input_size: usize,
}

impl LstmCellParams {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        Self {
            forget: GateParams::zeros(hidden_size, input_size),
            input: GateParams::zeros(hidden_size, input_size),
            cell: GateParams::zeros(hidden_size, input_size),
            output: GateParams::zeros(hidden_size, input_size),
            hidden_size,
            input_size,
        }
    }

    /// Xavier-uniform weights, zero biases except forget-gate bias = 1.
    pub fn init(hidden_size: usize, input_size: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut params = Self {
            forget: GateParams::xavier(hidden_size, input_size, rng),
            input: GateParams::xavier(hidden_size, input_size, rng),
            cell: GateParams::xavier(hidden_size, input_size, rng),
            output: GateParams::xavier(hidden_size, input_size, rng),
            hidden_size,
            input_size,
        };
        params.forget.b.iter_mut().for_each(|b| *b = 1.0);
        params
    }

    pub fn gates(&self) -> [&GateParams; 4] {
        [&self.forget, &self.input, &self.cell, &self.output]
    }

    pub fn is_finite(&self) -> bool {
        self.gates().iter().all(|g| g.is_finite())
    }

    /// Euclidean norm over every parameter, for numeric diagnostics.
    pub fn param_norm(&self) -> f64 {
        self.gates().iter().map(|g| g.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn flat_len(&self) -> usize {
        self.gates().iter().map(|g| g.flat_len()).sum()
    }

    pub fn append_flat(&self, out: &mut Vec<f64>) {
        for g in self.gates() {
            g.append_flat(out);
        }
    }

    pub fn read_flat(&mut self, src: &[f64], pos: &mut usize) {
        self.forget.read_flat(src, pos);
        self.input.read_flat(src, pos);
        self.cell.read_flat(src, pos);
        self.output.read_flat(src, pos);
    }
}

/// Hidden and cell vectors carried between timesteps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            h: vec![0.0; hidden_size],
            c: vec![0.0; hidden_size],
        }
    }
}

/// Post-activation values cached by the forward pass for BPTT.
#[derive(Debug, Clone)]
pub struct GateCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One forward timestep.
pub fn lstm_step(
    params: &LstmCellParams,
    x: &[f64],
    prev: &LstmState,
) -> Result<(LstmState, GateCache)> {
    if x.len() != params.input_size {
        return Err(Error::DimensionMismatch {
            expected: params.input_size,
            got: x.len(),
            context: "lstm_step input",
        });
    }
    if prev.h.len() != params.hidden_size || prev.c.len() != params.hidden_size {
        return Err(Error::DimensionMismatch {
            expected: params.hidden_size,
            got: prev.h.len(),
            context: "lstm_step state",
        });
    }

    let f: Vec<f64> = params
        .forget
        .preactivation(&prev.h, x)
        .into_iter()
        .map(sigmoid)
        .collect();
    let i: Vec<f64> = params
        .input
        .preactivation(&prev.h, x)
        .into_iter()
        .map(sigmoid)
        .collect();
    let g: Vec<f64> = params
        .cell
        .preactivation(&prev.h, x)
        .into_iter()
        .map(f64::tanh)
        .collect();
    let c: Vec<f64> = (0..params.hidden_size)
        .map(|j| prev.c[j] * f[j] + i[j] * g[j])
        .collect();
    let o: Vec<f64> = params
        .output
        .preactivation(&prev.h, x)
        .into_iter()
        .map(sigmoid)
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|&v| v.tanh()).collect();
    let h: Vec<f64> = (0..params.hidden_size).map(|j| o[j] * tanh_c[j]).collect();

    if h.iter().any(|v| !v.is_finite()) || c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite LSTM state; parameter norm = {:.6e}",
            params.param_norm()
        )));
    }

    let state = LstmState { h: h.clone(), c: c.clone() };
    let cache = GateCache {
        x: x.to_vec(),
        h_prev: prev.h.clone(),
        c_prev: prev.c.clone(),
        f,
        i,
        g,
        o,
        c,
        tanh_c,
    };
    Ok((state, cache))
}

/// Gradients for every parameter in a cell; same shapes as the parameters.
pub type LstmGrads = LstmCellParams;

/// BPTT with an upstream gradient at every timestep.
///
/// Returns parameter gradients plus dLoss/dx_t per timestep (for stacked
/// layers). `d_h_seq[t]` is dLoss/dh_t from outside the cell.
pub fn lstm_backward_seq(
    params: &LstmCellParams,
    caches: &[GateCache],
    d_h_seq: &[Vec<f64>],
) -> Result<(LstmGrads, Vec<Vec<f64>>)> {
    if caches.is_empty() {
        return Err(Error::ContractViolation("no forward caches".into()));
    }
    if d_h_seq.len() != caches.len() {
        return Err(Error::ContractViolation(format!(
            "{} upstream gradients for {} cached timesteps",
            d_h_seq.len(),
            caches.len()
        )));
    }
    let hidden = params.hidden_size;
    let mut grads = LstmGrads::zeros(hidden, params.input_size);
    let mut dx_seq = vec![vec![0.0; params.input_size]; caches.len()];

    let mut dh_next = vec![0.0; hidden];
    let mut dc_next = vec![0.0; hidden];

    for t in (0..caches.len()).rev() {
        let cache = &caches[t];
        let dh: Vec<f64> = (0..hidden).map(|j| d_h_seq[t][j] + dh_next[j]).collect();

        // h = o ⊙ tanh(c)
        let mut dc = vec![0.0; hidden];
        let mut do_pre = vec![0.0; hidden];
        for j in 0..hidden {
            let o = cache.o[j];
            do_pre[j] = dh[j] * cache.tanh_c[j] * o * (1.0 - o);
            dc[j] = dh[j] * o * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]) + dc_next[j];
        }

        // c = c_prev ⊙ f + i ⊙ g
        let mut df_pre = vec![0.0; hidden];
        let mut di_pre = vec![0.0; hidden];
        let mut dg_pre = vec![0.0; hidden];
        for j in 0..hidden {
            let (f, i, g) = (cache.f[j], cache.i[j], cache.g[j]);
            df_pre[j] = dc[j] * cache.c_prev[j] * f * (1.0 - f);
            di_pre[j] = dc[j] * g * i * (1.0 - i);
            dg_pre[j] = dc[j] * i * (1.0 - g * g);
            dc_next[j] = dc[j] * f;
        }

        dh_next = vec![0.0; hidden];
        let dx = &mut dx_seq[t];
        for (gate, d_pre) in [
            (&params.forget, &df_pre),
            (&params.input, &di_pre),
            (&params.cell, &dg_pre),
            (&params.output, &do_pre),
        ] {
            gate.w.matvec_transpose_add(d_pre, &mut dh_next);
            gate.u.matvec_transpose_add(d_pre, dx);
        }
        for (grad_gate, d_pre) in [
            (&mut grads.forget, &df_pre),
            (&mut grads.input, &di_pre),
            (&mut grads.cell, &dg_pre),
            (&mut grads.output, &do_pre),
        ] {
            grad_gate.w.outer_add(d_pre, &cache.h_prev);
            grad_gate.u.outer_add(d_pre, &cache.x);
            for (b, d) in grad_gate.b.iter_mut().zip(d_pre.iter()) {
                *b += d;
            }
        }
    }

    Ok((grads, dx_seq))
}

/// BPTT with the upstream gradient applied only at the final timestep.
pub fn lstm_backward(
    params: &LstmCellParams,
    caches: &[GateCache],
    d_h_last: &[f64],
) -> Result<(LstmGrads, Vec<Vec<f64>>)> {
    if caches.is_empty() {
        return Err(Error::ContractViolation("no forward caches".into()));
    }
    let mut d_h_seq = vec![vec![0.0; params.hidden_size]; caches.len()];
    d_h_seq[caches.len() - 1] = d_h_last.to_vec();
    lstm_backward_seq(params, caches, &d_h_seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn run_forward(params: &LstmCellParams, xs: &[Vec<f64>]) -> (Vec<GateCache>, LstmState) {
        let mut state = LstmState::zeros(params.hidden_size);
        let mut caches = Vec::new();
        for x in xs {
            let (next, cache) = lstm_step(params, x, &state).unwrap();
            caches.push(cache);
            state = next;
        }
        (caches, state)
    }

    #[test]
    fn zero_parameters_give_half_gates_and_zero_state() {
        let params = LstmCellParams::zeros(3, 2);
        let prev = LstmState::zeros(3);
        let (state, cache) = lstm_step(&params, &[0.7, -1.3], &prev).unwrap();
        for j in 0..3 {
            assert_eq!(cache.f[j], 0.5);
            assert_eq!(cache.i[j], 0.5);
            assert_eq!(cache.o[j], 0.5);
            assert_eq!(cache.g[j], 0.0);
            assert_eq!(state.c[j], 0.0);
            assert_eq!(state.h[j], 0.0);
        }
    }

    #[test]
    fn saturated_forget_bias_opens_the_gate() {
        let mut params = LstmCellParams::zeros(2, 1);
        params.forget.b.iter_mut().for_each(|b| *b = 50.0);
        let (_, cache) = lstm_step(&params, &[0.3], &LstmState::zeros(2)).unwrap();
        for &f in &cache.f {
            assert!((f - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_cell_matches_hand_evaluation() {
        // hidden=1, input=1, every weight 0.5, biases 0, x=1, prev=(0,0).
        let mut params = LstmCellParams::zeros(1, 1);
        for gate in [
            &mut params.forget,
            &mut params.input,
            &mut params.cell,
            &mut params.output,
        ] {
            gate.w.data[0] = 0.5;
            gate.u.data[0] = 0.5;
        }
        let (state, cache) = lstm_step(&params, &[1.0], &LstmState::zeros(1)).unwrap();

        // Scalar oracle evaluated in place.
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let f = sig(0.5);
        let i = sig(0.5);
        let g = 0.5f64.tanh();
        let c = i * g;
        let o = sig(0.5);
        let h = o * c.tanh();
        assert!((cache.f[0] - f).abs() < 1e-15);
        assert!((cache.g[0] - g).abs() < 1e-15);
        assert!((state.c[0] - c).abs() < 1e-15);
        assert!((state.h[0] - h).abs() < 1e-15);
        // Frozen values from the oracle.
        assert!((f - 0.622_459_331_201_854_6).abs() < 1e-12);
        assert!((g - 0.462_117_157_260_009_74).abs() < 1e-12);
        assert!((c - 0.287_649_136_644_967_94).abs() < 1e-12);
        assert!((h - 0.174_269_718_656_105_08).abs() < 1e-12);
    }

    #[test]
    fn gate_ranges_hold_on_random_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let hidden = rng.random_range(1..5);
            let input = rng.random_range(1..4);
            let params = LstmCellParams::init(hidden, input, &mut rng);
            let xs: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..input).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let (caches, _) = run_forward(&params, &xs);
            for cache in &caches {
                for j in 0..hidden {
                    assert!(cache.f[j] > 0.0 && cache.f[j] < 1.0);
                    assert!(cache.i[j] > 0.0 && cache.i[j] < 1.0);
                    assert!(cache.o[j] > 0.0 && cache.o[j] < 1.0);
                    assert!(cache.g[j] > -1.0 && cache.g[j] < 1.0);
                }
            }
        }
    }

    #[test]
    fn zero_upstream_gradient_zeroes_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = LstmCellParams::init(3, 2, &mut rng);
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let (caches, _) = run_forward(&params, &xs);
        let (grads, dx) = lstm_backward(&params, &caches, &[0.0, 0.0, 0.0]).unwrap();
        let mut flat = Vec::new();
        grads.append_flat(&mut flat);
        assert!(flat.iter().all(|&v| v == 0.0));
        assert!(dx.iter().flatten().all(|&v| v == 0.0));
    }

    /// Central finite differences of h_T summed against a fixed probe
    /// vector; returns (max relative error, max absolute error).
    fn finite_difference_check(hidden: usize, input: usize, steps: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = LstmCellParams::init(hidden, input, &mut rng);
        let xs: Vec<Vec<f64>> = (0..steps)
            .map(|_| (0..input).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let probe: Vec<f64> = (0..hidden).map(|_| rng.random_range(-1.0..1.0)).collect();

        let loss = |p: &LstmCellParams| -> f64 {
            let (_, state) = run_forward(p, &xs);
            state.h.iter().zip(&probe).map(|(h, w)| h * w).sum()
        };

        let (caches, _) = run_forward(&params, &xs);
        let (grads, _) = lstm_backward(&params, &caches, &probe).unwrap();

        let mut analytic = Vec::new();
        grads.append_flat(&mut analytic);
        let mut theta = Vec::new();
        params.append_flat(&mut theta);

        let eps = 1e-5;
        let mut max_rel = 0.0f64;
        let mut max_abs = 0.0f64;
        for k in 0..theta.len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            let mut tp = theta.clone();
            tp[k] += eps;
            let mut pos = 0;
            plus.read_flat(&tp, &mut pos);
            let mut tm = theta.clone();
            tm[k] -= eps;
            pos = 0;
            minus.read_flat(&tm, &mut pos);
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            let abs = (analytic[k] - numeric).abs();
            max_abs = max_abs.max(abs);
            let denom = analytic[k].abs().max(numeric.abs());
            if denom > 1e-7 {
                max_rel = max_rel.max(abs / denom);
            }
        }
        (max_rel, max_abs)
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let (rel, _) = finite_difference_check(3, 2, 4, 10);
        assert!(rel < 1e-4, "max relative error {rel}");
    }

    #[test]
    fn single_timestep_matches_finite_differences_tightly() {
        let (_, abs) = finite_difference_check(2, 2, 1, 11);
        assert!(abs < 1e-6, "max absolute error {abs}");
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let params = LstmCellParams::zeros(2, 3);
        let err = lstm_step(&params, &[1.0], &LstmState::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn missing_caches_violate_the_contract() {
        let params = LstmCellParams::zeros(2, 1);
        let err = lstm_backward(&params, &[], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }
}
