//! Minimal feed-forward network: tanh hidden layers, linear output, exact
//! reverse-mode weight gradients, exact forward-mode input derivatives, and
//! an Adam optimizer.
//!
//! This is the learned inverse map of the EINN method. It is deliberately
//! small and dependency-free: the architectures involved are a handful of
//! ten-unit layers, and determinism matters more than throughput. All types
//! are plain values; the training loop owns one private copy and mutates it
//! single-threaded.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("layer_sizes must have at least two entries, all positive (got {0:?})")]
    InvalidLayerSizes(Vec<usize>),
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite gradient entry at layer {layer}, index {index}")]
    NonFiniteGradient { layer: usize, index: usize },
    #[error("invalid train config: {0}")]
    InvalidConfig(String),
}

/// Weights and biases of a fully connected network.
///
/// `weights[l]` is row-major with `layer_sizes[l+1]` rows of
/// `layer_sizes[l]` columns; `biases[l]` has one entry per row. Hidden
/// layers apply tanh elementwise; the output layer is affine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-parameter gradients, same shapes as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Gradients {
        Gradients {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn reset(&mut self) {
        for w in &mut self.weights {
            w.fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for g in w.iter_mut() {
                *g *= factor;
            }
        }
        for b in &mut self.biases {
            for g in b.iter_mut() {
                *g *= factor;
            }
        }
    }
}

/// Adam moment estimates. Moments are zero until the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_count: u64,
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with the conventional constants (β1 = 0.9, β2 = 0.999,
    /// ε = 1e-8).
    pub fn new(params: &MlpParams) -> AdamState {
        AdamState {
            step_count: 0,
            first_moment: Gradients::zeros_like(params),
            second_moment: Gradients::zeros_like(params),
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Training hyperparameters shared by every EINN run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub mse_stop: f64,
    pub max_epochs: u64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            learning_rate: 1e-3,
            mse_stop: 2e-10,
            max_epochs: 400_000,
            rng_seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.learning_rate > 0.0) {
            return Err(NetError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.mse_stop > 0.0) {
            return Err(NetError::InvalidConfig(format!(
                "mse_stop must be positive, got {}",
                self.mse_stop
            )));
        }
        if self.max_epochs == 0 {
            return Err(NetError::InvalidConfig("max_epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Glorot-uniform initialization: weights drawn from
/// ±sqrt(6/(fan_in+fan_out)) per layer, biases zero. Deterministic for a
/// given seed.
pub fn init(layer_sizes: &[usize], rng_seed: u64) -> Result<MlpParams, NetError> {
    if layer_sizes.len() < 2 || layer_sizes.iter().any(|&n| n == 0) {
        return Err(NetError::InvalidLayerSizes(layer_sizes.to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
    let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w: Vec<f64> = (0..fan_in * fan_out)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        weights.push(w);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpParams {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
    })
}

/// Reusable per-layer buffers so the training loop never allocates.
#[derive(Debug, Clone)]
pub struct Workspace {
    /// activations[0] is the input; activations[l+1] the output of layer l
    /// (tanh applied on hidden layers).
    activations: Vec<Vec<f64>>,
    /// forward-mode tangents, same shapes as activations
    tangents: Vec<Vec<f64>>,
    /// reverse-mode deltas, one per layer output
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new(params: &MlpParams) -> Workspace {
        let shapes: Vec<usize> = params.layer_sizes.clone();
        Workspace {
            activations: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            tangents: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            deltas: shapes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("network has layers")
    }

    pub fn output_tangent(&self) -> &[f64] {
        self.tangents.last().expect("network has layers")
    }
}

impl MlpParams {
    pub fn n_in(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_out(&self) -> usize {
        *self.layer_sizes.last().expect("nonempty layer_sizes")
    }

    /// Structural consistency check (dimensions, finiteness).
    pub fn check(&self) -> Result<(), NetError> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.iter().any(|&n| n == 0) {
            return Err(NetError::InvalidLayerSizes(self.layer_sizes.clone()));
        }
        let layers = self.layer_sizes.len() - 1;
        if self.weights.len() != layers {
            return Err(NetError::DimensionMismatch {
                what: "weight tensors",
                expected: layers,
                got: self.weights.len(),
            });
        }
        if self.biases.len() != layers {
            return Err(NetError::DimensionMismatch {
                what: "bias vectors",
                expected: layers,
                got: self.biases.len(),
            });
        }
        for (l, pair) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] {
                return Err(NetError::DimensionMismatch {
                    what: "weight matrix",
                    expected: pair[0] * pair[1],
                    got: self.weights[l].len(),
                });
            }
            if self.biases[l].len() != pair[1] {
                return Err(NetError::DimensionMismatch {
                    what: "bias vector",
                    expected: pair[1],
                    got: self.biases[l].len(),
                });
            }
        }
        let finite = self
            .weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(NetError::InvalidConfig("non-finite parameter entry".into()));
        }
        Ok(())
    }

    /// Forward pass into a caller-owned workspace (no allocation).
    pub fn forward_into(&self, input: &[f64], ws: &mut Workspace) -> Result<(), NetError> {
        if input.len() != self.n_in() {
            return Err(NetError::DimensionMismatch {
                what: "input",
                expected: self.n_in(),
                got: input.len(),
            });
        }
        ws.activations[0].copy_from_slice(input);
        let layers = self.weights.len();
        for l in 0..layers {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let w = &self.weights[l];
            let b = &self.biases[l];
            let (before, after) = ws.activations.split_at_mut(l + 1);
            let src = &before[l];
            let dst = &mut after[0];
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut z = b[r];
                for (wi, ai) in row.iter().zip(src.iter()) {
                    z += wi * ai;
                }
                dst[r] = if l < layers - 1 { z.tanh() } else { z };
            }
        }
        Ok(())
    }

    /// Forward pass: tanh on hidden layers, affine output.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        let mut ws = Workspace::new(self);
        self.forward_into(input, &mut ws)?;
        Ok(ws.output().to_vec())
    }

    /// Forward pass carrying (value, tangent) pairs seeded at one input
    /// component. Returns the output and d(output)/d(input[seed_index]).
    /// The value path is the same arithmetic as [`MlpParams::forward`].
    pub fn forward_with_input_derivative(
        &self,
        input: &[f64],
        seed_index: usize,
    ) -> Result<(Vec<f64>, Vec<f64>), NetError> {
        let mut ws = Workspace::new(self);
        self.forward_tangent_into(input, seed_index, &mut ws)?;
        Ok((ws.output().to_vec(), ws.output_tangent().to_vec()))
    }

    /// Allocation-free version of [`MlpParams::forward_with_input_derivative`].
    pub fn forward_tangent_into(
        &self,
        input: &[f64],
        seed_index: usize,
        ws: &mut Workspace,
    ) -> Result<(), NetError> {
        if input.len() != self.n_in() {
            return Err(NetError::DimensionMismatch {
                what: "input",
                expected: self.n_in(),
                got: input.len(),
            });
        }
        if seed_index >= self.n_in() {
            return Err(NetError::DimensionMismatch {
                what: "seed_index",
                expected: self.n_in(),
                got: seed_index,
            });
        }
        ws.activations[0].copy_from_slice(input);
        ws.tangents[0].fill(0.0);
        ws.tangents[0][seed_index] = 1.0;
        let layers = self.weights.len();
        for l in 0..layers {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let w = &self.weights[l];
            let b = &self.biases[l];
            let (a_before, a_after) = ws.activations.split_at_mut(l + 1);
            let (t_before, t_after) = ws.tangents.split_at_mut(l + 1);
            let (src, dst) = (&a_before[l], &mut a_after[0]);
            let (t_src, t_dst) = (&t_before[l], &mut t_after[0]);
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut z = b[r];
                let mut zt = 0.0;
                for ((wi, ai), ti) in row.iter().zip(src.iter()).zip(t_src.iter()) {
                    z += wi * ai;
                    zt += wi * ti;
                }
                if l < layers - 1 {
                    let a = z.tanh();
                    dst[r] = a;
                    t_dst[r] = (1.0 - a * a) * zt;
                } else {
                    dst[r] = z;
                    t_dst[r] = zt;
                }
            }
        }
        Ok(())
    }

    /// Reverse accumulation of `d(cotangent · output)/dθ` for every weight
    /// and bias, given the activations of a prior [`MlpParams::forward_into`]
    /// call on the same input. Gradients are accumulated into `grads`.
    pub fn backward_into(
        &self,
        ws: &mut Workspace,
        output_cotangent: &[f64],
        grads: &mut Gradients,
    ) -> Result<(), NetError> {
        if output_cotangent.len() != self.n_out() {
            return Err(NetError::DimensionMismatch {
                what: "output_cotangent",
                expected: self.n_out(),
                got: output_cotangent.len(),
            });
        }
        let layers = self.weights.len();
        ws.deltas[layers - 1].copy_from_slice(output_cotangent);
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let (d_before, d_rest) = ws.deltas.split_at_mut(l);
            let delta = &d_rest[0];
            let src = &ws.activations[l];
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for r in 0..n_out {
                let d = delta[r];
                gb[r] += d;
                let grow = &mut gw[r * n_in..(r + 1) * n_in];
                for (g, ai) in grow.iter_mut().zip(src.iter()) {
                    *g += d * ai;
                }
            }
            if l > 0 {
                // delta for the previous hidden layer: (Wᵀ delta) ⊙ (1 - a²)
                let prev = &mut d_before[l - 1];
                let w = &self.weights[l];
                let a_prev = &ws.activations[l];
                for (c, p) in prev.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for r in 0..n_out {
                        acc += w[r * n_in + c] * delta[r];
                    }
                    *p = acc * (1.0 - a_prev[c] * a_prev[c]);
                }
            }
        }
        Ok(())
    }

    /// Exact gradient of `output_cotangent · output(input)` with respect to
    /// every parameter, via reverse accumulation through stored activations.
    pub fn backward(
        &self,
        input: &[f64],
        output_cotangent: &[f64],
    ) -> Result<Gradients, NetError> {
        let mut ws = Workspace::new(self);
        self.forward_into(input, &mut ws)?;
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(&mut ws, output_cotangent, &mut grads)?;
        Ok(grads)
    }
}

/// One Adam update with bias-corrected moments. Rejects non-finite gradient
/// entries, which signal training divergence.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &Gradients,
    state: &mut AdamState,
    learning_rate: f64,
) -> Result<(), NetError> {
    for (layer, (gw, gb)) in grads.weights.iter().zip(grads.biases.iter()).enumerate() {
        if let Some(index) = gw.iter().position(|g| !g.is_finite()) {
            return Err(NetError::NonFiniteGradient { layer, index });
        }
        if let Some(index) = gb.iter().position(|g| !g.is_finite()) {
            return Err(NetError::NonFiniteGradient { layer, index });
        }
    }
    state.step_count += 1;
    let t = state.step_count;
    let (beta1, beta2, epsilon) = (state.beta1, state.beta2, state.epsilon);
    let bc1 = 1.0 - beta1.powf(t as f64);
    let bc2 = 1.0 - beta2.powf(t as f64);
    let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..theta.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            theta[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    };
    for l in 0..params.weights.len() {
        update(
            &mut params.weights[l],
            &grads.weights[l],
            &mut state.first_moment.weights[l],
            &mut state.second_moment.weights[l],
        );
        update(
            &mut params.biases[l],
            &grads.biases[l],
            &mut state.first_moment.biases[l],
            &mut state.second_moment.biases[l],
        );
    }
    Ok(())
}
