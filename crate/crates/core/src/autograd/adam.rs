//! Adam optimizer with bias correction.

use super::{cast, Scalar, Tensor};
use crate::{Error, Result};

/// Hyperparameters; defaults are the standard lr=1e-3, beta1=0.9,
/// beta2=0.999, eps=1e-8.
#[derive(Debug, Clone, Copy)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First/second moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<T: Scalar> {
    pub params: AdamParams,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    /// Moments start at zero, shaped like the parameter list.
    pub fn new(params: AdamParams, shapes: &[Tensor<T>]) -> Self {
        let m = shapes.iter().map(|p| Tensor::zeros(p.shape().to_vec())).collect();
        let v = shapes.iter().map(|p| Tensor::zeros(p.shape().to_vec())).collect();
        AdamState { params, m, v, t: 0 }
    }
}

/// One Adam update over a flat parameter list. `grads` must align with
/// `params` in order and shape.
pub fn adam_step<T: Scalar>(
    params: &mut [Tensor<T>],
    grads: &[Tensor<T>],
    state: &mut AdamState<T>,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::invalid("adam_step: parameter/gradient/state length mismatch"));
    }
    for ((p, g), (m, v)) in params
        .iter()
        .zip(grads)
        .zip(state.m.iter().zip(state.v.iter()))
    {
        if p.shape() != g.shape() || p.shape() != m.shape() || p.shape() != v.shape() {
            return Err(Error::invalid(format!(
                "adam_step: shape mismatch {:?} vs {:?}",
                p.shape(),
                g.shape()
            )));
        }
        let _ = v;
    }

    state.t += 1;
    let b1 = cast::<T>(state.params.beta1);
    let b2 = cast::<T>(state.params.beta2);
    let one = T::one();
    let lr = cast::<T>(state.params.lr);
    let eps = cast::<T>(state.params.eps);
    let bc1 = cast::<T>(1.0 - state.params.beta1.powi(state.t as i32));
    let bc2 = cast::<T>(1.0 - state.params.beta2.powi(state.t as i32));

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        let pd = p.data_mut();
        let md = m.data_mut();
        let vd = v.data_mut();
        let gd = g.data();
        for j in 0..pd.len() {
            let gj = gd[j];
            md[j] = b1 * md[j] + (one - b1) * gj;
            vd[j] = b2 * vd[j] + (one - b2) * gj * gj;
            let m_hat = md[j] / bc1;
            let v_hat = vd[j] / bc2;
            pd[j] = pd[j] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
