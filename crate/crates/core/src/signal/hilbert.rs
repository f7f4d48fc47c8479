//! FFT-based analytic signal and amplitude envelope.

use super::Waveform;
use crate::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Analytic signal via the frequency-domain Hilbert transform: zero the
/// negative frequencies, double the positive ones, keep DC and Nyquist.
pub fn analytic_signal(x: &[f64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 4 {
        return Err(Error::invalid("analytic signal needs at least 4 samples"));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);

    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and Nyquist unchanged
        } else if k < half || (n % 2 == 1 && k == half) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(buf)
}

/// |analytic signal|: nonnegative amplitude envelope, same length and rate.
pub fn analytic_envelope(w: &Waveform) -> Result<Waveform> {
    let env = analytic_signal(w.samples())?.iter().map(|c| c.norm()).collect();
    Waveform::new(env, w.fs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pure_tone_envelope_is_flat() {
        let fs = 1000.0;
        let n = 1000;
        let w = Waveform::new(
            (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 / fs).sin()).collect(),
            fs,
        )
        .unwrap();
        let env = analytic_envelope(&w).unwrap();
        for &v in &env.samples()[50..n - 50] {
            assert!((v - 1.0).abs() < 0.02, "envelope {v}");
        }
    }

    #[test]
    fn zero_signal_zero_envelope() {
        let w = Waveform::new(vec![0.0; 64], 100.0).unwrap();
        let env = analytic_envelope(&w).unwrap();
        assert!(env.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn am_tone_recovers_modulation() {
        let fs = 2000.0;
        let n = 4000;
        let carrier = 200.0;
        let a = |t: f64| 1.0 + 0.5 * (2.0 * PI * 2.0 * t).sin();
        let w = Waveform::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    a(t) * (2.0 * PI * carrier * t).sin()
                })
                .collect(),
            fs,
        )
        .unwrap();
        let env = analytic_envelope(&w).unwrap();
        for i in 200..n - 200 {
            let t = i as f64 / fs;
            let want = a(t);
            let got = env.samples()[i];
            assert!((got - want).abs() / want < 0.05, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn too_short_errors() {
        assert!(analytic_signal(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn envelope_nonnegative() {
        let fs = 500.0;
        let w = Waveform::new(
            (0..512).map(|i| ((i * i) as f64 * 0.013).sin() - 0.3).collect(),
            fs,
        )
        .unwrap();
        let env = analytic_envelope(&w).unwrap();
        assert!(env.samples().iter().all(|&v| v >= 0.0));
    }
}
