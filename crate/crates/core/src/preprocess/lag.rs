//! Envelope cross-correlation lag estimation.

use crate::signal::Waveform;
use crate::{Error, Result};

/// Lag (seconds) maximizing the normalized cross-correlation between the two
/// envelopes over [-max_lag_s, +max_lag_s], at integer-sample resolution.
///
/// Sign convention: a positive lag means the DUS envelope trails the FECG
/// envelope, i.e. `env_dus[t] ~ env_fecg[t - lag]`.
pub fn estimate_lag(env_dus: &Waveform, env_fecg: &Waveform, max_lag_s: f64) -> Result<f64> {
    if env_dus.fs() != env_fecg.fs() {
        return Err(Error::invalid(format!(
            "envelopes must share a rate, got {} vs {}",
            env_dus.fs(),
            env_fecg.fs()
        )));
    }
    let fs = env_dus.fs();
    let max_lag = (max_lag_s * fs).round() as i64;
    if max_lag < 1 {
        return Err(Error::invalid("max lag window is below one sample"));
    }
    let a = centered(env_dus.samples());
    let b = centered(env_fecg.samples());
    let n = a.len().min(b.len()) as i64;
    if n <= 2 * max_lag {
        return Err(Error::invalid(format!(
            "envelopes ({n} samples) shorter than the 2x{max_lag}-sample lag window"
        )));
    }

    let norm_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::invalid("constant envelope has no correlation structure"));
    }

    let mut best_lag = 0i64;
    let mut best_r = f64::NEG_INFINITY;
    for lag in -max_lag..=max_lag {
        let t_lo = lag.max(0);
        let t_hi = n.min(n + lag);
        let mut acc = 0.0;
        for t in t_lo..t_hi {
            acc += a[t as usize] * b[(t - lag) as usize];
        }
        let r = acc / (norm_a * norm_b);
        if r > best_r {
            best_r = r;
            best_lag = lag;
        }
    }
    Ok(best_lag as f64 / fs)
}

fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump_train(fs: f64, dur: f64, period: f64, offset: f64) -> Waveform {
        let n = (fs * dur) as usize;
        Waveform::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let phase = (t - offset).rem_euclid(period);
                    let d = phase.min(period - phase);
                    (-(d / 0.04).powi(2)).exp()
                })
                .collect(),
            fs,
        )
        .unwrap()
    }

    #[test]
    fn recovers_injected_shift() {
        let fs = 250.0;
        let env_fecg = bump_train(fs, 30.0, 0.45, 0.0);
        // DUS trails by 120 ms.
        let env_dus = env_fecg.shifted(0.120);
        let lag = estimate_lag(&env_dus, &env_fecg, 2.0).unwrap();
        assert!((lag - 0.120).abs() <= 1.0 / fs + 1e-9, "lag {lag}");
    }

    #[test]
    fn identical_envelopes_zero_lag() {
        let env = bump_train(250.0, 30.0, 0.45, 0.1);
        assert_eq!(estimate_lag(&env, &env, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn scale_invariant() {
        let fs = 250.0;
        let env_fecg = bump_train(fs, 30.0, 0.45, 0.0);
        let env_dus = env_fecg.shifted(0.080);
        let scaled = Waveform::new(
            env_dus.samples().iter().map(|v| 37.0 * v + 0.0).collect(),
            fs,
        )
        .unwrap();
        let l1 = estimate_lag(&env_dus, &env_fecg, 2.0).unwrap();
        let l2 = estimate_lag(&scaled, &env_fecg, 2.0).unwrap();
        assert_eq!(l1, l2);
        let scaled_other = Waveform::new(
            env_fecg.samples().iter().map(|v| 0.2 * v).collect(),
            fs,
        )
        .unwrap();
        let l3 = estimate_lag(&env_dus, &scaled_other, 2.0).unwrap();
        assert_eq!(l1, l3);
    }

    #[test]
    fn negative_lag_direction() {
        let fs = 250.0;
        let env_fecg = bump_train(fs, 30.0, 0.45, 0.0);
        let env_dus = env_fecg.shifted(-0.100); // DUS leads
        let lag = estimate_lag(&env_dus, &env_fecg, 2.0).unwrap();
        assert!((lag + 0.100).abs() <= 1.0 / fs + 1e-9, "lag {lag}");
    }

    #[test]
    fn too_short_errors() {
        let env = bump_train(250.0, 3.0, 0.45, 0.0);
        assert!(estimate_lag(&env, &env, 2.0).is_err());
    }

    #[test]
    fn rate_mismatch_errors() {
        let a = bump_train(250.0, 30.0, 0.45, 0.0);
        let b = bump_train(500.0, 30.0, 0.45, 0.0);
        assert!(estimate_lag(&a, &b, 2.0).is_err());
    }
}
