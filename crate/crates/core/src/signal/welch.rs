//! Welch power spectral density: Hann-windowed, overlapped, averaged
//! periodograms with density scaling (power per Hz, one-sided).

use super::Waveform;
use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// One-sided PSD on a uniform frequency grid starting at 0 Hz.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl PsdEstimate {
    /// Grid spacing in Hz.
    pub fn df(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1] - self.freqs[0]
        } else {
            0.0
        }
    }

    /// Frequency of the strongest bin.
    pub fn peak_freq(&self) -> f64 {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        self.freqs[best]
    }

    /// Spectral centroid sum(f * P) / sum(P).
    pub fn centroid(&self) -> Result<f64> {
        let total: f64 = self.power.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("zero-power spectrum has no centroid"));
        }
        let weighted: f64 = self.freqs.iter().zip(&self.power).map(|(f, p)| f * p).sum();
        Ok(weighted / total)
    }

    /// Spectral flatness: geometric mean over arithmetic mean of the bins.
    pub fn flatness(&self) -> Result<f64> {
        let total: f64 = self.power.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("zero-power spectrum has no flatness"));
        }
        let n = self.power.len() as f64;
        let mean = total / n;
        // Geometric mean through logs; the epsilon floor keeps empty bins
        // from collapsing the product to an exact zero.
        let log_sum: f64 = self.power.iter().map(|&p| (p + 1e-300).ln()).sum();
        Ok(((log_sum / n).exp() / mean).clamp(0.0, 1.0))
    }
}

/// Welch PSD with Hann-windowed segments of `seg_len` samples and fractional
/// `overlap` in [0, 1).
pub fn welch_psd(w: &Waveform, seg_len: usize, overlap: f64) -> Result<PsdEstimate> {
    let x = w.samples();
    let fs = w.fs();
    if seg_len == 0 {
        return Err(Error::invalid("segment length must be positive"));
    }
    if seg_len > x.len() {
        return Err(Error::invalid(format!(
            "segment length {seg_len} exceeds signal length {}",
            x.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::invalid(format!("overlap must be in [0,1), got {overlap}")));
    }

    let step = ((seg_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
    let window: Vec<f64> = (0..seg_len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg_len as f64).cos())
        .collect();
    let win_power: f64 = window.iter().map(|v| v * v).sum();

    let n_bins = seg_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg_len);
    let mut n_segments = 0usize;
    let mut start = 0usize;
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); seg_len];
    while start + seg_len <= x.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, slot) in acc.iter_mut().enumerate() {
            let mag2 = buf[k].norm_sqr();
            // One-sided density: double everything except DC and Nyquist.
            let factor = if k == 0 || (seg_len % 2 == 0 && k == seg_len / 2) { 1.0 } else { 2.0 };
            *slot += factor * mag2 / (fs * win_power);
        }
        n_segments += 1;
        start += step;
    }
    let scale = 1.0 / n_segments as f64;
    for v in acc.iter_mut() {
        *v *= scale;
    }
    let df = fs / seg_len as f64;
    Ok(PsdEstimate {
        freqs: (0..n_bins).map(|k| k as f64 * df).collect(),
        power: acc,
    })
}
