//! Deterministic DSP primitives.
//!
//! All operations are pure functions of their inputs and safe to call from
//! many threads; there is no shared mutable state anywhere in this module.

mod butter;
mod fir;
mod hilbert;
mod resample;
mod wave_io;
mod welch;

pub use butter::{butter_bandpass, design_butter_bandpass, BiquadCascade};
pub use fir::{fir_bandpass, fir_bandpass_taps};
pub use hilbert::{analytic_envelope, analytic_signal};
pub use resample::resample;
pub use wave_io::{read_waveform_csv, write_waveform_csv};
pub use welch::{welch_psd, PsdEstimate};

use crate::{Error, Result};

/// A uniformly sampled real-valued signal with an explicit sampling rate.
///
/// Invariants enforced at construction: `fs > 0`, at least one sample, all
/// samples finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    fs: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::invalid(format!("sampling rate must be positive, got {fs}")));
        }
        if samples.is_empty() {
            return Err(Error::invalid("waveform must contain at least one sample"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Waveform { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Sample index closest to time `t` seconds.
    pub fn index_of(&self, t: f64) -> usize {
        ((t * self.fs).round().max(0.0) as usize).min(self.samples.len().saturating_sub(1))
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Slice of samples covering `[t0, t1)` seconds, clipped to the signal.
    pub fn slice_seconds(&self, t0: f64, t1: f64) -> &[f64] {
        let a = ((t0 * self.fs).round().max(0.0) as usize).min(self.samples.len());
        let b = ((t1 * self.fs).round().max(0.0) as usize).min(self.samples.len());
        &self.samples[a..b.max(a)]
    }

    /// Time-shift by an integer number of samples nearest to `shift_s`,
    /// keeping length and rate. Positive shift delays the signal (content
    /// moves toward larger t); vacated samples are zero-filled.
    pub fn shifted(&self, shift_s: f64) -> Waveform {
        let n = self.samples.len();
        let k = (shift_s * self.fs).round() as i64;
        let mut out = vec![0.0; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let src = i as i64 - k;
            if src >= 0 && (src as usize) < n {
                *slot = self.samples[src as usize];
            }
        }
        Waveform { samples: out, fs: self.fs }
    }
}

/// Affine map onto [-1, 1]: min -> -1, max -> +1.
///
/// Errors on a constant signal (degenerate range).
pub fn minmax_normalize(w: &Waveform) -> Result<Waveform> {
    let samples = minmax_normalize_slice(w.samples())?;
    Ok(Waveform { samples, fs: w.fs })
}

/// Slice form of [`minmax_normalize`], used on raw beat windows.
pub fn minmax_normalize_slice(x: &[f64]) -> Result<Vec<f64>> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(hi > lo) {
        return Err(Error::invalid("constant signal: min-max range is degenerate"));
    }
    let range = hi - lo;
    Ok(x.iter().map(|&v| 2.0 * (v - lo) / range - 1.0).collect())
}
