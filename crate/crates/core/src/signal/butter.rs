//! Butterworth bandpass design (analog prototype -> LP-to-BP transform ->
//! bilinear) realized as cascaded biquad sections, applied single-pass causal
//! with zero initial conditions.

use super::Waveform;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// One second-order section with normalized a0 = 1.
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b0 + self.b1 * z_inv + self.b2 * z_inv * z_inv;
        let den = Complex64::new(1.0, 0.0) + self.a1 * z_inv + self.a2 * z_inv * z_inv;
        num / den
    }
}

/// A cascade of biquads implementing one IIR filter.
#[derive(Debug, Clone)]
pub struct BiquadCascade {
    sections: Vec<Biquad>,
}

impl BiquadCascade {
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Single-pass causal filtering (direct form II transposed), zero state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            let mut z1 = 0.0;
            let mut z2 = 0.0;
            for v in y.iter_mut() {
                let xin = *v;
                let out = s.b0 * xin + z1;
                z1 = s.b1 * xin - s.a1 * out + z2;
                z2 = s.b2 * xin - s.a2 * out;
                *v = out;
            }
        }
        y
    }

    /// Magnitude response at `freq` Hz for sampling rate `fs`.
    pub fn magnitude_at(&self, freq: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * freq / fs;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections.iter().map(|s| s.response(z_inv).norm()).product()
    }
}

/// Design an order-`order` Butterworth bandpass (2*order poles) with -3 dB
/// points at `f_lo` and `f_hi`.
pub fn design_butter_bandpass(f_lo: f64, f_hi: f64, order: usize, fs: f64) -> Result<BiquadCascade> {
    if order == 0 {
        return Err(Error::invalid("filter order must be >= 1"));
    }
    if !(0.0 < f_lo && f_lo < f_hi && f_hi < fs / 2.0) {
        return Err(Error::invalid(format!(
            "band edges must satisfy 0 < {f_lo} < {f_hi} < fs/2 = {}",
            fs / 2.0
        )));
    }

    // Prewarped analog edges and the LP-to-BP transform parameters.
    let w1 = (PI * f_lo / fs).tan();
    let w2 = (PI * f_hi / fs).tan();
    let w0sq = w1 * w2;
    let bw = w2 - w1;

    // Analog Butterworth prototype poles on the unit circle, left half plane.
    let n = order;
    let mut sections = Vec::with_capacity(n);
    let push_pair = |z1: Complex64, z2: Complex64, sections: &mut Vec<Biquad>| {
        // Denominator from the pole pair; numerator has zeros at z = +1, -1.
        let a1 = -(z1 + z2).re;
        let a2 = (z1 * z2).re;
        sections.push(Biquad { b0: 1.0, b1: 0.0, b2: -1.0, a1, a2 });
    };

    for k in 0..n {
        let theta = PI * (2.0 * k as f64 + n as f64 + 1.0) / (2.0 * n as f64);
        let p = Complex64::from_polar(1.0, theta);
        if p.im < -1e-12 {
            continue; // conjugate handled with its upper-half partner
        }
        // LP->BP: s^2 - p*bw*s + w0^2 = 0.
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0sq).sqrt();
        let s_a = (pb + disc) / 2.0;
        let s_b = (pb - disc) / 2.0;
        let z_a = bilinear(s_a);
        let z_b = bilinear(s_b);
        if p.im.abs() <= 1e-12 {
            // Real prototype pole: its two bandpass poles form one section.
            push_pair(z_a, z_b, &mut sections);
        } else {
            // Complex prototype pole: each bandpass pole pairs with its own
            // conjugate (contributed by the conjugate prototype pole).
            push_pair(z_a, z_a.conj(), &mut sections);
            push_pair(z_b, z_b.conj(), &mut sections);
        }
    }

    // Normalize each section to unit magnitude at the warped center frequency,
    // making the cascade exactly 0 dB there.
    let wc = 2.0 * w0sq.sqrt().atan();
    let z_inv = Complex64::from_polar(1.0, -wc);
    for s in sections.iter_mut() {
        let m = s.response(z_inv).norm();
        if m > 0.0 {
            s.b0 /= m;
            s.b1 /= m;
            s.b2 /= m;
        }
    }
    Ok(BiquadCascade { sections })
}

/// Bilinear map s -> z with the tan() prewarp convention.
fn bilinear(s: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) + s) / (Complex64::new(1.0, 0.0) - s)
}

/// Butterworth bandpass filtering of a waveform (causal, zero initial state).
pub fn butter_bandpass(w: &Waveform, f_lo: f64, f_hi: f64, order: usize) -> Result<Waveform> {
    let cascade = design_butter_bandpass(f_lo, f_hi, order, w.fs())?;
    Waveform::new(cascade.filter(w.samples()), w.fs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, fs: f64, dur: f64) -> Waveform {
        let n = (fs * dur) as usize;
        Waveform::new(
            (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect(),
            fs,
        )
        .unwrap()
    }

    fn steady_rms(w: &Waveform) -> f64 {
        // Skip the first 0.2 s of transient.
        let start = (0.2 * w.fs()) as usize;
        let x = &w.samples()[start..];
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn design_rejects_bad_edges() {
        assert!(design_butter_bandpass(25.0, 600.0, 2, 1000.0).is_err()); // 600 >= 500
        assert!(design_butter_bandpass(0.0, 100.0, 2, 1000.0).is_err());
        assert!(design_butter_bandpass(200.0, 100.0, 2, 1000.0).is_err());
        assert!(design_butter_bandpass(25.0, 600.0, 0, 2000.0).is_err());
    }

    #[test]
    fn edges_sit_at_minus_3_db() {
        let c = design_butter_bandpass(25.0, 600.0, 2, 2000.0).unwrap();
        for f in [25.0, 600.0] {
            let db = 20.0 * c.magnitude_at(f, 2000.0).log10();
            assert!((db + 3.0103).abs() < 0.5, "{f} Hz at {db} dB");
        }
    }

    #[test]
    fn midband_is_flat() {
        let c = design_butter_bandpass(25.0, 600.0, 2, 2000.0).unwrap();
        let mid = (25.0f64 * 600.0).sqrt();
        let db = 20.0 * c.magnitude_at(mid, 2000.0).log10();
        assert!(db.abs() < 1.0, "midband {db} dB");
    }

    #[test]
    fn tone_sweep_pass_and_stop() {
        let fs = 2000.0;
        let pass = butter_bandpass(&tone(400.0, fs, 2.0), 25.0, 600.0, 2).unwrap();
        let db = 20.0 * (steady_rms(&pass) / (1.0 / 2f64.sqrt())).log10();
        assert!(db.abs() < 1.0, "400 Hz tone changed by {db} dB");

        for f in [5.0, 900.0] {
            let out = butter_bandpass(&tone(f, fs, 2.0), 25.0, 600.0, 2).unwrap();
            let att = 20.0 * (steady_rms(&out) / (1.0 / 2f64.sqrt())).log10();
            assert!(att < -15.0, "{f} Hz attenuated only {att} dB");
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let w = Waveform::new(vec![0.0; 500], 2000.0).unwrap();
        let y = butter_bandpass(&w, 25.0, 600.0, 2).unwrap();
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linearity() {
        let fs = 2000.0;
        let x = tone(100.0, fs, 0.5);
        let y = tone(310.0, fs, 0.5);
        let combo = Waveform::new(
            x.samples().iter().zip(y.samples()).map(|(a, b)| 2.5 * a - 1.25 * b).collect(),
            fs,
        )
        .unwrap();
        let fx = butter_bandpass(&x, 25.0, 600.0, 2).unwrap();
        let fy = butter_bandpass(&y, 25.0, 600.0, 2).unwrap();
        let fc = butter_bandpass(&combo, 25.0, 600.0, 2).unwrap();
        for i in 0..fc.len() {
            let want = 2.5 * fx.samples()[i] - 1.25 * fy.samples()[i];
            assert!((fc.samples()[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn higher_order_also_butterworth() {
        let c = design_butter_bandpass(25.0, 600.0, 3, 2000.0).unwrap();
        assert_eq!(c.sections().len(), 3);
        for f in [25.0, 600.0] {
            let db = 20.0 * c.magnitude_at(f, 2000.0).log10();
            assert!((db + 3.0103).abs() < 0.5, "order 3: {f} Hz at {db} dB");
        }
    }
}
