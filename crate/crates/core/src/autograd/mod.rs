//! Minimal reverse-mode automatic differentiation.
//!
//! A dynamic tape is rebuilt for every forward pass: operations evaluate
//! eagerly as nodes are appended, and [`Tape::backward`] walks the nodes in
//! reverse creation order (a valid reverse-topological order, since an op can
//! only reference earlier nodes — cycles are impossible by construction).
//!
//! Gradients accumulate: calling `backward` twice without clearing doubles
//! every gradient. Summation orders are fixed so identical inputs produce
//! bit-identical results.
//!
//! The engine is generic over the element type: training runs in `f32`,
//! gradient checks instantiate `f64`.

mod adam;

pub use adam::{adam_step, AdamParams, AdamState};

use crate::{Error, Result};
use num_traits::Float;
use std::fmt::Debug;
use std::sync::Arc;

/// Element types the engine supports.
pub trait Scalar: Float + Debug + Default + Send + Sync + 'static {}
impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lossy f64 -> T conversion for constants.
pub fn cast<T: Scalar>(v: f64) -> T {
    T::from(v).expect("f64 conversion")
}

/// Dense tensor with row-major data. Cloning is cheap (shared storage);
/// mutation copies on write if the storage is shared.
#[derive(Debug, Clone)]
pub struct Tensor<T: Scalar> {
    shape: Vec<usize>,
    data: Arc<Vec<T>>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::invalid(format!(
                "shape {shape:?} wants {numel} elements, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data: Arc::new(data) })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel = shape.iter().product();
        Tensor { shape, data: Arc::new(vec![T::zero(); numel]) }
    }

    pub fn scalar(v: T) -> Self {
        Tensor { shape: vec![1], data: Arc::new(vec![v]) }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        Arc::make_mut(&mut self.data).as_mut_slice()
    }

    /// Same storage viewed with a different shape (element count must match).
    fn reshaped(&self, shape: Vec<usize>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), self.numel());
        Tensor { shape, data: Arc::clone(&self.data) }
    }
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Tanh(NodeId),
    Sigmoid(NodeId),
    Relu(NodeId),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    ConvCausal { x: NodeId, w: NodeId, b: NodeId, dilation: usize },
    Dense { x: NodeId, w: NodeId, b: NodeId },
    Flatten(NodeId),
    Mse { pred: NodeId, target: NodeId },
}

struct Node<T: Scalar> {
    value: Tensor<T>,
    grad: Vec<T>, // empty until backward touches this node
    op: Op,
}

/// Recording tape: values are computed eagerly, gradients on demand.
pub struct Tape<T: Scalar> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    fn push(&mut self, value: Tensor<T>, op: Op) -> NodeId {
        self.nodes.push(Node { value, grad: Vec::new(), op });
        NodeId(self.nodes.len() - 1)
    }

    /// Register an input or parameter tensor (shares storage, no copy).
    pub fn leaf(&mut self, t: &Tensor<T>) -> NodeId {
        self.push(t.clone(), Op::Leaf)
    }

    pub fn leaf_from(&mut self, shape: Vec<usize>, data: Vec<T>) -> Result<NodeId> {
        Ok(self.push(Tensor::new(shape, data)?, Op::Leaf))
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    /// Accumulated gradient for a node; zeros if backward has not reached it.
    pub fn grad(&self, id: NodeId) -> Vec<T> {
        let node = &self.nodes[id.0];
        if node.grad.is_empty() {
            vec![T::zero(); node.value.numel()]
        } else {
            node.grad.clone()
        }
    }

    pub fn zero_grads(&mut self) {
        for n in self.nodes.iter_mut() {
            n.grad.clear();
        }
    }

    fn unary<F>(&mut self, x: NodeId, op: Op, f: F) -> NodeId
    where
        F: Fn(T) -> T,
    {
        let data: Vec<T> = self.nodes[x.0].value.data().iter().map(|&v| f(v)).collect();
        let shape = self.nodes[x.0].value.shape().to_vec();
        self.push(Tensor { shape, data: Arc::new(data) }, op)
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        self.unary(x, Op::Tanh(x), |v| v.tanh())
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        self.unary(x, Op::Sigmoid(x), |v| T::one() / (T::one() + (-v).exp()))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        self.unary(x, Op::Relu(x), |v| if v > T::zero() { v } else { T::zero() })
    }

    fn binary_shape_check(&self, a: NodeId, b: NodeId, what: &str) -> Result<()> {
        let (sa, sb) = (self.nodes[a.0].value.shape(), self.nodes[b.0].value.shape());
        if sa != sb {
            return Err(Error::invalid(format!("{what}: shape mismatch {sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_shape_check(a, b, "add")?;
        let data: Vec<T> = self.nodes[a.0]
            .value
            .data()
            .iter()
            .zip(self.nodes[b.0].value.data())
            .map(|(&x, &y)| x + y)
            .collect();
        let shape = self.nodes[a.0].value.shape().to_vec();
        Ok(self.push(Tensor { shape, data: Arc::new(data) }, Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary_shape_check(a, b, "mul")?;
        let data: Vec<T> = self.nodes[a.0]
            .value
            .data()
            .iter()
            .zip(self.nodes[b.0].value.data())
            .map(|(&x, &y)| x * y)
            .collect();
        let shape = self.nodes[a.0].value.shape().to_vec();
        Ok(self.push(Tensor { shape, data: Arc::new(data) }, Op::Mul(a, b)))
    }

    /// Causal dilated 1-D convolution.
    ///
    /// `x: [T, Cin]`, `w: [K, Cin, Cout]`, `b: [Cout]` -> `y: [T, Cout]` with
    /// `y[t,o] = b[o] + sum_{k,c} w[k,c,o] * x[t - k*dilation, c]` and zero
    /// padding on the left, so the output has the input's length.
    pub fn conv1d_causal(
        &mut self,
        x: NodeId,
        w: NodeId,
        b: NodeId,
        dilation: usize,
    ) -> Result<NodeId> {
        if dilation == 0 {
            return Err(Error::invalid("dilation must be >= 1"));
        }
        let xs = self.nodes[x.0].value.shape();
        let ws = self.nodes[w.0].value.shape();
        let bs = self.nodes[b.0].value.shape();
        if xs.len() != 2 || ws.len() != 3 || bs.len() != 1 {
            return Err(Error::invalid(format!(
                "conv1d_causal wants x:[T,Cin] w:[K,Cin,Cout] b:[Cout], got {xs:?} {ws:?} {bs:?}"
            )));
        }
        let (t_len, c_in) = (xs[0], xs[1]);
        let (k_len, w_cin, c_out) = (ws[0], ws[1], ws[2]);
        if w_cin != c_in || bs[0] != c_out || k_len == 0 {
            return Err(Error::invalid(format!(
                "conv1d_causal shape mismatch: x {xs:?}, w {ws:?}, b {bs:?}"
            )));
        }

        let xv = self.nodes[x.0].value.data();
        let wv = self.nodes[w.0].value.data();
        let bv = self.nodes[b.0].value.data();
        let mut y = vec![T::zero(); t_len * c_out];
        for t in 0..t_len {
            let row = &mut y[t * c_out..(t + 1) * c_out];
            row.copy_from_slice(bv);
            for k in 0..k_len {
                let offset = k * dilation;
                if offset > t {
                    break;
                }
                let src = t - offset;
                let xrow = &xv[src * c_in..(src + 1) * c_in];
                for (c, &xval) in xrow.iter().enumerate() {
                    let wrow = &wv[(k * c_in + c) * c_out..(k * c_in + c + 1) * c_out];
                    for (o, yv) in row.iter_mut().enumerate() {
                        *yv = *yv + xval * wrow[o];
                    }
                }
            }
        }
        Ok(self.push(
            Tensor { shape: vec![t_len, c_out], data: Arc::new(y) },
            Op::ConvCausal { x, w, b, dilation },
        ))
    }

    /// Affine map: `x: [N]`, `w: [N, M]`, `b: [M]` -> `y: [M]`.
    pub fn dense(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let xs = self.nodes[x.0].value.shape();
        let ws = self.nodes[w.0].value.shape();
        let bs = self.nodes[b.0].value.shape();
        if xs.len() != 1 || ws.len() != 2 || bs.len() != 1 || ws[0] != xs[0] || ws[1] != bs[0] {
            return Err(Error::invalid(format!(
                "dense wants x:[N] w:[N,M] b:[M], got {xs:?} {ws:?} {bs:?}"
            )));
        }
        let (n, m) = (ws[0], ws[1]);
        let xv = self.nodes[x.0].value.data();
        let wv = self.nodes[w.0].value.data();
        let mut y = self.nodes[b.0].value.data().to_vec();
        for i in 0..n {
            let xi = xv[i];
            let wrow = &wv[i * m..(i + 1) * m];
            for (o, yv) in y.iter_mut().enumerate() {
                *yv = *yv + xi * wrow[o];
            }
        }
        Ok(self.push(Tensor { shape: vec![m], data: Arc::new(y) }, Op::Dense { x, w, b }))
    }

    /// Row-major reshape to 1-D; shares storage with the input value.
    pub fn flatten(&mut self, x: NodeId) -> NodeId {
        let numel = self.nodes[x.0].value.numel();
        let value = self.nodes[x.0].value.reshaped(vec![numel]);
        self.push(value, Op::Flatten(x))
    }

    /// Mean squared error; returns a scalar node.
    pub fn mse_loss(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId> {
        self.binary_shape_check(pred, target, "mse_loss")?;
        let p = self.nodes[pred.0].value.data();
        let t = self.nodes[target.0].value.data();
        let mut acc = T::zero();
        for (&a, &b) in p.iter().zip(t) {
            let d = a - b;
            acc = acc + d * d;
        }
        let n = cast::<T>(p.len() as f64);
        Ok(self.push(Tensor::scalar(acc / n), Op::Mse { pred, target }))
    }

    /// Reverse-mode pass from a scalar loss node. Gradients are added into
    /// each node's accumulator; unreachable nodes keep zero.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if self.nodes[loss.0].value.numel() != 1 {
            return Err(Error::invalid("backward requires a scalar loss node"));
        }
        // Fresh buffers per call so repeated calls accumulate exactly.
        let mut g: Vec<Option<Vec<T>>> = (0..=loss.0).map(|_| None).collect();
        g[loss.0] = Some(vec![T::one()]);

        for i in (0..=loss.0).rev() {
            let Some(gy) = g[i].take() else { continue };
            self.propagate(i, &gy, &mut g);
            let node = &mut self.nodes[i];
            if node.grad.is_empty() {
                node.grad = gy;
            } else {
                for (dst, src) in node.grad.iter_mut().zip(&gy) {
                    *dst = *dst + *src;
                }
            }
        }
        Ok(())
    }

    fn accumulate(g: &mut [Option<Vec<T>>], id: NodeId, len: usize) -> &mut Vec<T> {
        g[id.0].get_or_insert_with(|| vec![T::zero(); len])
    }

    fn propagate(&self, i: usize, gy: &[T], g: &mut [Option<Vec<T>>]) {
        match self.nodes[i].op {
            Op::Leaf => {}
            Op::Tanh(x) => {
                let y = self.nodes[i].value.data();
                let gx = Self::accumulate(g, x, y.len());
                for j in 0..y.len() {
                    gx[j] = gx[j] + gy[j] * (T::one() - y[j] * y[j]);
                }
            }
            Op::Sigmoid(x) => {
                let y = self.nodes[i].value.data();
                let gx = Self::accumulate(g, x, y.len());
                for j in 0..y.len() {
                    gx[j] = gx[j] + gy[j] * y[j] * (T::one() - y[j]);
                }
            }
            Op::Relu(x) => {
                let y = self.nodes[i].value.data();
                let gx = Self::accumulate(g, x, y.len());
                for j in 0..y.len() {
                    if y[j] > T::zero() {
                        gx[j] = gx[j] + gy[j];
                    }
                }
            }
            Op::Add(a, b) => {
                let ga = Self::accumulate(g, a, gy.len());
                for j in 0..gy.len() {
                    ga[j] = ga[j] + gy[j];
                }
                let gb = Self::accumulate(g, b, gy.len());
                for j in 0..gy.len() {
                    gb[j] = gb[j] + gy[j];
                }
            }
            Op::Mul(a, b) => {
                let av = self.nodes[a.0].value.data();
                let bv = self.nodes[b.0].value.data();
                let ga = Self::accumulate(g, a, gy.len());
                for j in 0..gy.len() {
                    ga[j] = ga[j] + gy[j] * bv[j];
                }
                let gb = Self::accumulate(g, b, gy.len());
                for j in 0..gy.len() {
                    gb[j] = gb[j] + gy[j] * av[j];
                }
            }
            Op::ConvCausal { x, w, b, dilation } => {
                self.conv_backward(x, w, b, dilation, gy, g);
            }
            Op::Dense { x, w, b } => {
                let xv = self.nodes[x.0].value.data();
                let wv = self.nodes[w.0].value.data();
                let (n, m) = (self.nodes[w.0].value.shape()[0], self.nodes[w.0].value.shape()[1]);
                {
                    let gb = Self::accumulate(g, b, m);
                    for j in 0..m {
                        gb[j] = gb[j] + gy[j];
                    }
                }
                {
                    let gw = Self::accumulate(g, w, n * m);
                    for i_n in 0..n {
                        let xi = xv[i_n];
                        let row = &mut gw[i_n * m..(i_n + 1) * m];
                        for (o, slot) in row.iter_mut().enumerate() {
                            *slot = *slot + xi * gy[o];
                        }
                    }
                }
                {
                    let gx = Self::accumulate(g, x, n);
                    for i_n in 0..n {
                        let wrow = &wv[i_n * m..(i_n + 1) * m];
                        let mut acc = T::zero();
                        for (o, &wv_) in wrow.iter().enumerate() {
                            acc = acc + wv_ * gy[o];
                        }
                        gx[i_n] = gx[i_n] + acc;
                    }
                }
            }
            Op::Flatten(x) => {
                let gx = Self::accumulate(g, x, gy.len());
                for j in 0..gy.len() {
                    gx[j] = gx[j] + gy[j];
                }
            }
            Op::Mse { pred, target } => {
                let p = self.nodes[pred.0].value.data();
                let t = self.nodes[target.0].value.data();
                let n = cast::<T>(p.len() as f64);
                let scale = gy[0] * cast::<T>(2.0) / n;
                {
                    let gp = Self::accumulate(g, pred, p.len());
                    for j in 0..p.len() {
                        gp[j] = gp[j] + scale * (p[j] - t[j]);
                    }
                }
                {
                    let gt = Self::accumulate(g, target, p.len());
                    for j in 0..p.len() {
                        gt[j] = gt[j] - scale * (p[j] - t[j]);
                    }
                }
            }
        }
    }

    fn conv_backward(
        &self,
        x: NodeId,
        w: NodeId,
        b: NodeId,
        dilation: usize,
        gy: &[T],
        g: &mut [Option<Vec<T>>],
    ) {
        let xs = self.nodes[x.0].value.shape();
        let ws = self.nodes[w.0].value.shape();
        let (t_len, c_in) = (xs[0], xs[1]);
        let (k_len, _, c_out) = (ws[0], ws[1], ws[2]);
        let xv = self.nodes[x.0].value.data();
        let wv = self.nodes[w.0].value.data();

        {
            let gb = Self::accumulate(g, b, c_out);
            for t in 0..t_len {
                let gy_row = &gy[t * c_out..(t + 1) * c_out];
                for (o, slot) in gb.iter_mut().enumerate() {
                    *slot = *slot + gy_row[o];
                }
            }
        }
        {
            let gw = Self::accumulate(g, w, k_len * c_in * c_out);
            for t in 0..t_len {
                let gy_row = &gy[t * c_out..(t + 1) * c_out];
                for k in 0..k_len {
                    let offset = k * dilation;
                    if offset > t {
                        break;
                    }
                    let src = t - offset;
                    for c in 0..c_in {
                        let xval = xv[src * c_in + c];
                        let row = &mut gw[(k * c_in + c) * c_out..(k * c_in + c + 1) * c_out];
                        for (o, slot) in row.iter_mut().enumerate() {
                            *slot = *slot + xval * gy_row[o];
                        }
                    }
                }
            }
        }
        {
            let gx = Self::accumulate(g, x, t_len * c_in);
            for t in 0..t_len {
                let gy_row = &gy[t * c_out..(t + 1) * c_out];
                for k in 0..k_len {
                    let offset = k * dilation;
                    if offset > t {
                        break;
                    }
                    let src = t - offset;
                    for c in 0..c_in {
                        let wrow = &wv[(k * c_in + c) * c_out..(k * c_in + c + 1) * c_out];
                        let mut acc = T::zero();
                        for (o, &wval) in wrow.iter().enumerate() {
                            acc = acc + wval * gy_row[o];
                        }
                        gx[src * c_in + c] = gx[src * c_in + c] + acc;
                    }
                }
            }
        }
    }
}
