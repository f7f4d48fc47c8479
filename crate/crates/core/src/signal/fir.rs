//! Linear-phase FIR bandpass (Hamming-windowed difference of sincs) with the
//! group delay compensated, so the output is time-aligned with the input.

use super::Waveform;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Design the symmetric bandpass taps. Tap count is fixed at
/// `4 * fs / transition` with `transition = fs / 250` Hz, i.e. 1001 taps,
/// giving a ~1 Hz transition band at fs = 250.
pub fn fir_bandpass_taps(pass_lo: f64, pass_hi: f64, fs: f64) -> Result<Vec<f64>> {
    if !(0.0 < pass_lo && pass_lo < pass_hi && pass_hi < fs / 2.0) {
        return Err(Error::invalid(format!(
            "band edges must satisfy 0 < {pass_lo} < {pass_hi} < fs/2 = {}",
            fs / 2.0
        )));
    }
    let transition = fs / 250.0;
    let mut n = (4.0 * fs / transition).round() as usize;
    if n % 2 == 0 {
        n += 1;
    }
    let half = (n - 1) as f64 / 2.0;
    let f1 = pass_lo / fs;
    let f2 = pass_hi / fs;
    let taps = (0..n)
        .map(|i| {
            let m = i as f64 - half;
            let ideal = 2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m);
            let win = 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
            ideal * win
        })
        .collect();
    Ok(taps)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Zero-phase FIR bandpass: convolve with symmetric taps, centered so the
/// output has no group delay. Edges use zero padding.
pub fn fir_bandpass(w: &Waveform, pass_lo: f64, pass_hi: f64) -> Result<Waveform> {
    let taps = fir_bandpass_taps(pass_lo, pass_hi, w.fs())?;
    let x = w.samples();
    let n = x.len();
    let half = taps.len() / 2;
    let mut y = vec![0.0; n];
    for (i, out) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        // y[i] = sum_k taps[k] * x[i + half - k]
        let k_lo = (i + half).saturating_sub(n - 1);
        let k_hi = (i + half).min(taps.len() - 1);
        for k in k_lo..=k_hi {
            acc += taps[k] * x[i + half - k];
        }
        *out = acc;
    }
    Waveform::new(y, w.fs())
}
