//! The FECG-to-DUS generator: a causal convolution front end, five gated
//! residual blocks with exponentially increasing dilations, skip connections
//! refined by 1x1 convolutions, and a dense head with a tanh output.
//!
//! The forward pass is built on the autograd tape; the conv stack is causal
//! (the dense head intentionally mixes all time steps).

mod checkpoint;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use train::{train, EpochStats, TrainConfig};

use crate::autograd::{cast, NodeId, Scalar, Tape, Tensor};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Output nonlinearity of the dense head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutActivation {
    Tanh,
}

/// Architectural hyperparameters. `l_out` is always `8 * l_in` (the
/// 2000/250 Hz rate ratio).
#[derive(Debug, Clone, PartialEq)]
pub struct ArchConfig {
    pub n_filters: usize,
    pub kernel: usize,
    pub dilations: Vec<usize>,
    pub l_in: usize,
    pub l_out: usize,
    pub post_skip_convs: usize,
    pub out_activation: OutActivation,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            n_filters: 64,
            kernel: 20,
            dilations: vec![1, 2, 4, 8, 16],
            l_in: 160,
            l_out: 1280,
            post_skip_convs: 2,
            out_activation: OutActivation::Tanh,
        }
    }
}

impl ArchConfig {
    /// Same architecture with the input window scaled for `n_beats` beats of
    /// `l_in_per_beat` samples.
    pub fn with_window(mut self, l_in: usize) -> Self {
        self.l_in = l_in;
        self.l_out = 8 * l_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_filters == 0 || self.kernel == 0 || self.l_in == 0 {
            return Err(Error::Config("n_filters, kernel and l_in must be positive".into()));
        }
        if self.l_out != 8 * self.l_in {
            return Err(Error::Config(format!(
                "l_out {} must equal 8 * l_in = {}",
                self.l_out,
                8 * self.l_in
            )));
        }
        if self.dilations.is_empty() {
            return Err(Error::Config("at least one residual block is required".into()));
        }
        let mut prev = 0;
        for &d in &self.dilations {
            if d == 0 || !d.is_power_of_two() || d <= prev {
                return Err(Error::Config(format!(
                    "dilations must be strictly increasing powers of two, got {:?}",
                    self.dilations
                )));
            }
            prev = d;
        }
        Ok(())
    }

    /// Receptive field of the conv stack in input samples:
    /// `1 + (K-1) * (1 + sum of dilations)`.
    pub fn receptive_field(&self) -> usize {
        1 + (self.kernel - 1) * (1 + self.dilations.iter().sum::<usize>())
    }

    /// Tensor names and shapes in parameter-list order.
    fn layout(&self) -> Vec<(String, Vec<usize>)> {
        let c = self.n_filters;
        let k = self.kernel;
        let mut out = vec![
            ("front.w".to_string(), vec![k, 1, c]),
            ("front.b".to_string(), vec![c]),
        ];
        for i in 0..self.dilations.len() {
            out.push((format!("block{i}.filter.w"), vec![k, c, c]));
            out.push((format!("block{i}.filter.b"), vec![c]));
            out.push((format!("block{i}.gate.w"), vec![k, c, c]));
            out.push((format!("block{i}.gate.b"), vec![c]));
            out.push((format!("block{i}.res.w"), vec![1, c, c]));
            out.push((format!("block{i}.res.b"), vec![c]));
        }
        for j in 0..self.post_skip_convs {
            out.push((format!("post{j}.w"), vec![1, c, c]));
            out.push((format!("post{j}.b"), vec![c]));
        }
        out.push(("dense.w".to_string(), vec![self.l_in * c, self.l_out]));
        out.push(("dense.b".to_string(), vec![self.l_out]));
        out
    }
}

/// All learnable tensors, stored in the fixed layout order so the optimizer
/// and checkpoints can treat them as a flat list.
#[derive(Debug, Clone)]
pub struct ModelParams<T: Scalar> {
    pub arch: ArchConfig,
    tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> ModelParams<T> {
    /// Glorot-uniform weights, zero biases, deterministic in `seed`.
    pub fn init(arch: ArchConfig, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tensors = Vec::new();
        for (name, shape) in arch.layout() {
            let numel: usize = shape.iter().product();
            if name.ends_with(".b") {
                tensors.push(Tensor::zeros(shape));
            } else {
                let (fan_in, fan_out) = match shape.len() {
                    3 => (shape[0] * shape[1], shape[0] * shape[2]),
                    2 => (shape[0], shape[1]),
                    _ => (numel, numel),
                };
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data: Vec<T> =
                    (0..numel).map(|_| cast::<T>(rng.gen_range(-a..a))).collect();
                tensors.push(Tensor::new(shape, data)?);
            }
        }
        Ok(ModelParams { arch, tensors })
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub fn names(&self) -> Vec<String> {
        self.arch.layout().into_iter().map(|(n, _)| n).collect()
    }

    pub fn from_tensors(arch: ArchConfig, tensors: Vec<Tensor<T>>) -> Result<Self> {
        arch.validate()?;
        let layout = arch.layout();
        if layout.len() != tensors.len() {
            return Err(Error::Model(format!(
                "expected {} tensors, got {}",
                layout.len(),
                tensors.len()
            )));
        }
        for ((name, shape), t) in layout.iter().zip(&tensors) {
            if t.shape() != shape.as_slice() {
                return Err(Error::Model(format!(
                    "tensor {name}: shape {:?} does not match architecture ({:?})",
                    t.shape(),
                    shape
                )));
            }
        }
        Ok(ModelParams { arch, tensors })
    }

    // Indices into the flat tensor list.
    fn idx_front(&self) -> usize {
        0
    }
    fn idx_block(&self, i: usize) -> usize {
        2 + 6 * i
    }
    fn idx_post(&self, j: usize) -> usize {
        2 + 6 * self.arch.dilations.len() + 2 * j
    }
    fn idx_dense(&self) -> usize {
        2 + 6 * self.arch.dilations.len() + 2 * self.arch.post_skip_convs
    }
}

/// Handles into a recorded forward pass.
pub struct ForwardGraph {
    pub input: NodeId,
    /// Conv-stack output before flatten (causal part of the network).
    pub conv_stack: NodeId,
    pub output: NodeId,
    /// Leaves aligned with `ModelParams::tensors()` order.
    pub param_leaves: Vec<NodeId>,
}

/// Record the full forward pass for `x` (length `l_in`, values in [-1, 1]).
pub fn build_forward<T: Scalar>(
    tape: &mut Tape<T>,
    params: &ModelParams<T>,
    x: &[T],
) -> Result<ForwardGraph> {
    let arch = &params.arch;
    if x.len() != arch.l_in {
        return Err(Error::invalid(format!(
            "input length {} does not match l_in {}",
            x.len(),
            arch.l_in
        )));
    }
    let leaves: Vec<NodeId> = params.tensors.iter().map(|t| tape.leaf(t)).collect();
    let input = tape.leaf_from(vec![arch.l_in, 1], x.to_vec())?;

    let f = params.idx_front();
    let mut h = tape.conv1d_causal(input, leaves[f], leaves[f + 1], 1)?;

    let mut skip: Option<NodeId> = None;
    for (i, &d) in arch.dilations.iter().enumerate() {
        let b = params.idx_block(i);
        let filt = tape.conv1d_causal(h, leaves[b], leaves[b + 1], d)?;
        let filt = tape.tanh(filt);
        let gate = tape.conv1d_causal(h, leaves[b + 2], leaves[b + 3], d)?;
        let gate = tape.sigmoid(gate);
        let z = tape.mul(filt, gate)?;
        let s = tape.conv1d_causal(z, leaves[b + 4], leaves[b + 5], 1)?;
        h = tape.add(h, s)?;
        skip = Some(match skip {
            Some(acc) => tape.add(acc, s)?,
            None => s,
        });
    }

    let mut y = skip.expect("at least one residual block");
    for j in 0..arch.post_skip_convs {
        let p = params.idx_post(j);
        y = tape.relu(y);
        y = tape.conv1d_causal(y, leaves[p], leaves[p + 1], 1)?;
    }
    let conv_stack = y;

    let flat = tape.flatten(y);
    let d = params.idx_dense();
    let out = tape.dense(flat, leaves[d], leaves[d + 1])?;
    let output = match arch.out_activation {
        OutActivation::Tanh => tape.tanh(out),
    };

    Ok(ForwardGraph { input, conv_stack, output, param_leaves: leaves })
}

/// Forward pass without keeping the tape.
pub fn forward<T: Scalar>(params: &ModelParams<T>, x: &[T]) -> Result<Vec<T>> {
    let mut tape = Tape::new();
    let graph = build_forward(&mut tape, params, x)?;
    Ok(tape.value(graph.output).data().to_vec())
}

/// Batch inference; parallel per example, output order matches input order.
pub fn predict_batch<T: Scalar>(
    params: &ModelParams<T>,
    inputs: &[Vec<T>],
) -> Result<Vec<Vec<T>>> {
    use rayon::prelude::*;
    inputs.par_iter().map(|x| forward(params, x)).collect()
}
