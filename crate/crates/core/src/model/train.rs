//! Mini-batch Adam training with a per-subject validation split and early
//! stopping.
//!
//! Per-example gradients within a batch are computed in parallel over fixed
//! four-example units and summed in unit order, so results are bit-identical
//! for any worker count.

use super::{build_forward, ModelParams};
use crate::autograd::{adam_step, AdamParams, AdamState, Tape, Tensor};
use crate::preprocess::BeatPair;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Gradient summation unit; fixed so the reduction order never depends on
/// the worker count.
const GRAD_UNIT: usize = 4;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub n_beats: usize,
    /// Cap on training pairs after the validation split (0 = no cap);
    /// subsampling is an evenly spaced deterministic pick.
    pub max_train_pairs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            seed: 42,
            n_beats: 1,
            max_train_pairs: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// Train on `pairs` (all subjects in the list), holding out the last ~10% of
/// each subject's pairs (time-ordered) for validation. Returns the
/// best-validation parameters and the loss history.
pub fn train(
    pairs: &[BeatPair],
    arch: &super::ArchConfig,
    tc: &TrainConfig,
) -> Result<(ModelParams<f32>, Vec<EpochStats>)> {
    tc.validate()?;
    arch.validate()?;
    if pairs.is_empty() {
        return Err(Error::invalid("training requires at least one pair"));
    }
    for p in pairs {
        if p.fecg_in.len() != arch.l_in || p.dus_out.len() != arch.l_out {
            return Err(Error::invalid(format!(
                "pair at t={} has window {}/{}, architecture wants {}/{}",
                p.peak_time,
                p.fecg_in.len(),
                p.dus_out.len(),
                arch.l_in,
                arch.l_out
            )));
        }
    }

    let (mut train_set, val_set) = validation_split(pairs);
    if tc.max_train_pairs > 0 && train_set.len() > tc.max_train_pairs {
        train_set = subsample(&train_set, tc.max_train_pairs);
    }

    let mut params: ModelParams<f32> = ModelParams::init(arch.clone(), tc.seed)?;
    let mut adam = AdamState::new(
        AdamParams { lr: tc.lr, ..Default::default() },
        params.tensors(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed ^ 0x7261696e); // "rain"

    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_params = params.clone();
    let mut since_best = 0usize;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..tc.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for batch in order.chunks(tc.batch_size) {
            let (grads, batch_loss) = batch_gradients(&params, &train_set, batch)?;
            loss_sum += batch_loss * batch.len() as f64;
            loss_count += batch.len();
            adam_step(params.tensors_mut(), &grads, &mut adam)?;
        }
        let train_mse = loss_sum / loss_count as f64;
        if !train_mse.is_finite() {
            return Err(Error::Model(format!("training diverged at epoch {epoch} (loss NaN)")));
        }
        let val_mse = if val_set.is_empty() { train_mse } else { mean_mse(&params, &val_set)? };
        history.push(EpochStats { epoch, train_mse, val_mse });

        if val_mse < best_val {
            best_val = val_mse;
            best_params = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > tc.patience {
                break;
            }
        }
    }

    Ok((best_params, history))
}

/// Last ~10% of each subject's pairs (by peak time) go to validation; every
/// subject keeps at least one pair on each side when it has two or more.
fn validation_split(pairs: &[BeatPair]) -> (Vec<BeatPair>, Vec<BeatPair>) {
    let mut by_subject: BTreeMap<&str, Vec<&BeatPair>> = BTreeMap::new();
    for p in pairs {
        by_subject.entry(&p.subject_id).or_default().push(p);
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (_, mut list) in by_subject {
        list.sort_by(|a, b| a.peak_time.total_cmp(&b.peak_time));
        let n = list.len();
        let n_val = if n >= 2 { (n / 10).max(1) } else { 0 };
        let cut = n - n_val;
        for (i, p) in list.into_iter().enumerate() {
            if i < cut {
                train.push(p.clone());
            } else {
                val.push(p.clone());
            }
        }
    }
    (train, val)
}

fn subsample(pairs: &[BeatPair], cap: usize) -> Vec<BeatPair> {
    (0..cap).map(|i| pairs[i * pairs.len() / cap].clone()).collect()
}

/// Mean-of-example-losses gradient over one batch, summed in fixed unit
/// order, plus the batch loss.
fn batch_gradients(
    params: &ModelParams<f32>,
    pairs: &[BeatPair],
    batch: &[usize],
) -> Result<(Vec<Tensor<f32>>, f64)> {
    let unit_results: Vec<Result<(Vec<Tensor<f32>>, f64)>> = batch
        .par_chunks(GRAD_UNIT)
        .map(|unit| {
            let mut acc: Vec<Tensor<f32>> =
                params.tensors().iter().map(|t| Tensor::zeros(t.shape().to_vec())).collect();
            let mut loss = 0.0f64;
            for &idx in unit {
                let pair = &pairs[idx];
                let mut tape = Tape::new();
                let x: Vec<f32> = pair.fecg_in.clone();
                let graph = build_forward(&mut tape, params, &x)?;
                let target =
                    tape.leaf_from(vec![pair.dus_out.len()], pair.dus_out.clone())?;
                let l = tape.mse_loss(graph.output, target)?;
                loss += tape.value(l).data()[0] as f64;
                tape.backward(l)?;
                for (slot, leaf) in acc.iter_mut().zip(&graph.param_leaves) {
                    let g = tape.grad(*leaf);
                    for (s, gv) in slot.data_mut().iter_mut().zip(&g) {
                        *s += *gv;
                    }
                }
            }
            Ok((acc, loss))
        })
        .collect();

    let mut total: Vec<Tensor<f32>> =
        params.tensors().iter().map(|t| Tensor::zeros(t.shape().to_vec())).collect();
    let mut loss_sum = 0.0;
    for res in unit_results {
        let (unit_grads, unit_loss) = res?;
        loss_sum += unit_loss;
        for (t, u) in total.iter_mut().zip(&unit_grads) {
            for (a, b) in t.data_mut().iter_mut().zip(u.data()) {
                *a += *b;
            }
        }
    }
    let scale = 1.0f32 / batch.len() as f32;
    for t in total.iter_mut() {
        for v in t.data_mut() {
            *v *= scale;
        }
    }
    Ok((total, loss_sum / batch.len() as f64))
}

/// Mean MSE of the model over a pair list (parallel, order-stable).
pub fn mean_mse(params: &ModelParams<f32>, pairs: &[BeatPair]) -> Result<f64> {
    let losses: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|pair| {
            let y = super::forward(params, &pair.fecg_in)?;
            let mut acc = 0.0f64;
            for (a, b) in y.iter().zip(&pair.dus_out) {
                let d = (*a - *b) as f64;
                acc += d * d;
            }
            Ok(acc / y.len() as f64)
        })
        .collect();
    let mut sum = 0.0;
    for l in &losses {
        match l {
            Ok(v) => sum += v,
            Err(e) => return Err(Error::Model(format!("{e}"))),
        }
    }
    Ok(sum / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArchConfig, OutActivation};
    use rand::Rng;

    fn micro_arch(l_in: usize) -> ArchConfig {
        ArchConfig {
            n_filters: 4,
            kernel: 3,
            dilations: vec![1, 2],
            post_skip_convs: 2,
            out_activation: OutActivation::Tanh,
            ..Default::default()
        }
        .with_window(l_in)
    }

    /// Pairs with a learnable structure: the target holds a bump whose
    /// position tracks the input's step edge.
    fn synthetic_pairs(n: usize, subjects: usize, seed: u64) -> Vec<BeatPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l_in = 32;
        let l_out = 256;
        (0..n)
            .map(|k| {
                let edge = rng.gen_range(8..24usize);
                let mut fecg = vec![-1.0f32; l_in];
                for v in fecg.iter_mut().take(edge) {
                    *v = 1.0;
                }
                let mut dus = vec![-0.2f32; l_out];
                let center = edge * 8;
                for (i, v) in dus.iter_mut().enumerate() {
                    let d = (i as f32 - center as f32) / 10.0;
                    *v += (-d * d).exp();
                }
                BeatPair {
                    subject_id: format!("s{}", k % subjects),
                    peak_time: k as f64,
                    fecg_in: fecg,
                    dus_out: dus,
                }
            })
            .collect()
    }

    #[test]
    fn loss_halves_on_learnable_task() {
        let pairs = synthetic_pairs(500, 4, 1);
        let tc = TrainConfig {
            lr: 2e-3,
            batch_size: 32,
            max_epochs: 20,
            patience: 19,
            seed: 7,
            ..Default::default()
        };
        let (_, history) = train(&pairs, &micro_arch(32), &tc).unwrap();
        let first = history.first().unwrap().train_mse;
        let last = history.last().unwrap().train_mse;
        assert!(last < 0.5 * first, "train MSE {first} -> {last}");
    }

    #[test]
    fn constant_zero_target_is_fit_by_bias() {
        let mut pairs = synthetic_pairs(120, 2, 2);
        for p in pairs.iter_mut() {
            p.dus_out = vec![0.0; p.dus_out.len()];
        }
        let tc = TrainConfig {
            lr: 5e-3,
            batch_size: 16,
            max_epochs: 40,
            patience: 39,
            seed: 3,
            ..Default::default()
        };
        let (params, history) = train(&pairs, &micro_arch(32), &tc).unwrap();
        assert!(
            history.last().unwrap().train_mse < 1e-3,
            "final MSE {}",
            history.last().unwrap().train_mse
        );
        let y = super::super::forward(&params, &pairs[0].fecg_in).unwrap();
        assert!(y.iter().all(|v| v.abs() < 0.1));
    }

    #[test]
    fn fixed_seed_identical_history() {
        let pairs = synthetic_pairs(100, 3, 4);
        let tc = TrainConfig {
            lr: 1e-3,
            batch_size: 16,
            max_epochs: 4,
            patience: 3,
            seed: 11,
            ..Default::default()
        };
        let (_, h1) = train(&pairs, &micro_arch(32), &tc).unwrap();
        let (_, h2) = train(&pairs, &micro_arch(32), &tc).unwrap();
        assert_eq!(h1.len(), h2.len());
        for (a, b) in h1.iter().zip(&h2) {
            assert_eq!(a.train_mse.to_bits(), b.train_mse.to_bits());
            assert_eq!(a.val_mse.to_bits(), b.val_mse.to_bits());
        }
    }

    #[test]
    fn best_so_far_validation_never_increases() {
        let pairs = synthetic_pairs(200, 3, 5);
        let tc = TrainConfig {
            lr: 2e-3,
            batch_size: 32,
            max_epochs: 10,
            patience: 9,
            seed: 13,
            ..Default::default()
        };
        let (_, history) = train(&pairs, &micro_arch(32), &tc).unwrap();
        let mut best = f64::INFINITY;
        let mut bests = Vec::new();
        for h in &history {
            best = best.min(h.val_mse);
            bests.push(best);
        }
        for w in bests.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn mismatched_window_errors() {
        let pairs = synthetic_pairs(10, 1, 6);
        let arch = micro_arch(64); // pairs have l_in = 32
        assert!(train(&pairs, &arch, &TrainConfig::default()).is_err());
    }

    #[test]
    fn bad_config_errors() {
        let pairs = synthetic_pairs(10, 1, 6);
        let tc = TrainConfig { patience: 100, max_epochs: 100, ..Default::default() };
        assert!(train(&pairs, &micro_arch(32), &tc).is_err());
        let tc = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(train(&pairs, &micro_arch(32), &tc).is_err());
    }

    #[test]
    fn validation_split_is_per_subject_tail() {
        let pairs = synthetic_pairs(40, 2, 7);
        let (train_set, val_set) = validation_split(&pairs);
        assert_eq!(train_set.len() + val_set.len(), pairs.len());
        assert!(!val_set.is_empty());
        // Validation pairs are the latest ones of each subject.
        for v in &val_set {
            let max_train_t = train_set
                .iter()
                .filter(|p| p.subject_id == v.subject_id)
                .map(|p| p.peak_time)
                .fold(f64::MIN, f64::max);
            assert!(v.peak_time > max_train_t);
        }
    }
}
