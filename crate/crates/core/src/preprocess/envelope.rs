//! Amplitude envelopes used for lag estimation: the homomorphic envelope for
//! DUS and the Pan-Tompkins energy envelope for FECG.
//!
//! Both are implemented zero-phase (symmetric derivative, centered
//! integration window, forward-backward smoothing) so that envelope peaks
//! line up with the underlying events and cross-correlation lags carry no
//! filter-delay offset.

use crate::signal::{analytic_envelope, Waveform};
use crate::{Error, Result};
use std::f64::consts::PI;

const LOG_FLOOR: f64 = 1e-6;

/// exp(lowpass(log(|analytic| + eps))): a smooth, strictly positive envelope
/// robust to multiplicative modulation. The smoother is a first-order
/// low-pass at `lpf_hz` run forward and backward.
pub fn homomorphic_envelope(dus: &Waveform, lpf_hz: f64) -> Result<Waveform> {
    if !(lpf_hz > 0.0) || lpf_hz >= dus.fs() / 2.0 {
        return Err(Error::invalid(format!("envelope low-pass {lpf_hz} Hz outside (0, fs/2)")));
    }
    let env = analytic_envelope(dus)?;
    let mut log_env: Vec<f64> = env.samples().iter().map(|&v| (v + LOG_FLOOR).ln()).collect();
    one_pole_zero_phase(&mut log_env, lpf_hz, dus.fs());
    Waveform::new(log_env.iter().map(|&v| v.exp()).collect(), dus.fs())
}

/// First-order low-pass applied forward then backward (zero phase).
fn one_pole_zero_phase(x: &mut [f64], fc: f64, fs: f64) {
    let a = 1.0 - (-2.0 * PI * fc / fs).exp();
    let mut state = x[0];
    for v in x.iter_mut() {
        state += a * (*v - state);
        *v = state;
    }
    let mut state = x[x.len() - 1];
    for v in x.iter_mut().rev() {
        state += a * (*v - state);
        *v = state;
    }
}

/// Pan-Tompkins energy envelope: derivative, squaring, moving-window
/// integration over 100 ms. The derivative is a symmetric difference and the
/// window is centered, keeping envelope maxima on the QRS complexes.
pub fn pan_tompkins_envelope(fecg: &Waveform) -> Result<Waveform> {
    let fs = fecg.fs();
    let window = (0.100 * fs).round() as usize;
    let x = fecg.samples();
    if x.len() < window.max(3) {
        return Err(Error::invalid(format!(
            "signal ({} samples) shorter than the {window}-sample integration window",
            x.len()
        )));
    }

    let n = x.len();
    let mut sq = vec![0.0; n];
    for i in 0..n {
        let d = if i == 0 {
            x[1] - x[0]
        } else if i == n - 1 {
            x[n - 1] - x[n - 2]
        } else {
            (x[i + 1] - x[i - 1]) / 2.0
        };
        sq[i] = d * d;
    }

    let half = window / 2;
    let mut out = vec![0.0; n];
    // Centered moving average via a running sum.
    let mut acc: f64 = sq[..(half + 1).min(n)].iter().sum();
    let mut count = (half + 1).min(n);
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = acc / count as f64;
        // advance: add sq[i + half + 1], drop sq[i - half]
        if i + half + 1 < n {
            acc += sq[i + half + 1];
            count += 1;
        }
        if i >= half {
            acc -= sq[i - half];
            count -= 1;
        }
    }
    Waveform::new(out, fs)
}
