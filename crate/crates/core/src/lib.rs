//! Core library for the FEDUS pipeline: mapping single-beat fetal ECG
//! waveforms to Doppler ultrasound waveforms with a dilated-causal-convolution
//! generative model.
//!
//! Modules, roughly in pipeline order:
//! - [`signal`] — deterministic DSP primitives (resampling, filtering, FFT,
//!   analytic signal, Welch PSD, normalization, waveform CSV I/O)
//! - [`synth`] — synthetic paired FECG/DUS subject generator with ground truth
//! - [`preprocess`] — envelopes, lag alignment, SQI channel fusion, beat
//!   extraction, subject-independent splits, beat-pair archive I/O
//! - [`autograd`] — minimal reverse-mode tensor engine plus Adam
//! - [`model`] — the generator architecture, training loop, checkpoints
//! - [`metrics`] — the eight paired-signal similarity indicators
//! - [`usecase`] — segment stitching, FHR estimation, Bland-Altman agreement
//! - [`pipeline`] / [`config`] — end-to-end stages driven by one config file

pub mod autograd;
pub mod config;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod plot;
pub mod preprocess;
pub mod signal;
pub mod synth;
pub mod usecase;

mod error;

pub use error::{Error, Result};
