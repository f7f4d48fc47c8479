//! Paired-signal similarity indicators: RMSE, MAE, KLD, spectral entropy
//! difference, PSD difference, centroid difference, spectral flatness
//! difference, and discrete Fréchet distance, plus fold-level aggregation.
//!
//! Every metric returns exactly 0 for identical pairs and is nonnegative.
//! Spectral metrics share one Welch configuration so values stay comparable.

use crate::signal::{welch_psd, PsdEstimate, Waveform};
use crate::{Error, Result};

/// Welch settings shared by the spectral metrics.
#[derive(Debug, Clone, Copy)]
pub struct SpectralConfig {
    pub seg_len: usize,
    pub overlap: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { seg_len: 256, overlap: 0.5 }
    }
}

pub fn rmse(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    let acc: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((acc / x.len() as f64).sqrt())
}

pub fn mae(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, y)?;
    let acc: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
    Ok(acc / x.len() as f64)
}

fn check_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::invalid("empty signal"));
    }
    Ok(())
}

/// Amplitude-histogram KL divergence sum P_r log(P_r / P_g) with `bins`
/// uniform bins over [-1, 1], additive smoothing, natural log. `real` plays
/// the role of P_r. Inputs must lie in [-1, 1] (tolerance 1e-6).
pub fn kld(real: &[f64], gen: &[f64], bins: usize) -> Result<f64> {
    check_len(real, gen)?;
    if bins == 0 {
        return Err(Error::invalid("bins must be >= 1"));
    }
    let p = amplitude_histogram(real, bins)?;
    let q = amplitude_histogram(gen, bins)?;
    let mut acc = 0.0;
    for (pi, qi) in p.iter().zip(&q) {
        if *pi > 0.0 {
            acc += pi * (pi / qi).ln();
        }
    }
    // Smoothing can leave a tiny negative residue on identical inputs.
    Ok(acc.max(0.0))
}

const KLD_EPS: f64 = 1e-10;

fn amplitude_histogram(x: &[f64], bins: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0.0f64; bins];
    for &v in x {
        if !(-1.0 - 1e-6..=1.0 + 1e-6).contains(&v) {
            return Err(Error::invalid(format!("value {v} outside [-1, 1]")));
        }
        let idx = (((v + 1.0) / 2.0) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1.0;
    }
    let total: f64 = counts.iter().sum::<f64>() + bins as f64 * KLD_EPS;
    Ok(counts.iter().map(|c| (c + KLD_EPS) / total).collect())
}

/// Shannon entropy (natural log) of a power vector normalized to sum 1.
pub fn entropy_of_power(power: &[f64]) -> Result<f64> {
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("zero-power spectrum has no entropy"));
    }
    let mut acc = 0.0;
    for &p in power {
        let pj = p / total;
        if pj > 0.0 {
            acc -= pj * pj.ln();
        }
    }
    Ok(acc)
}

/// Spectral entropy of one waveform from its Welch PSD.
pub fn spectral_entropy(w: &Waveform, cfg: SpectralConfig) -> Result<f64> {
    entropy_of_power(&welch_psd(w, cfg.seg_len, cfg.overlap)?.power)
}

/// |SE(x) - SE(y)|.
pub fn spectral_entropy_diff(x: &Waveform, y: &Waveform, cfg: SpectralConfig) -> Result<f64> {
    if x.fs() != y.fs() {
        return Err(Error::invalid("spectral entropy diff requires equal sampling rates"));
    }
    Ok((spectral_entropy(x, cfg)? - spectral_entropy(y, cfg)?).abs())
}

/// Mean PSD (linear power) over a list of waveforms on a common grid.
pub fn mean_psd(signals: &[&Waveform], cfg: SpectralConfig) -> Result<PsdEstimate> {
    if signals.is_empty() {
        return Err(Error::invalid("mean_psd of an empty list"));
    }
    let first = welch_psd(signals[0], cfg.seg_len, cfg.overlap)?;
    let mut acc = first.power.clone();
    for w in &signals[1..] {
        let psd = welch_psd(w, cfg.seg_len, cfg.overlap)?;
        if psd.power.len() != acc.len() || psd.freqs != first.freqs {
            return Err(Error::invalid("mean_psd requires a common sampling rate"));
        }
        for (a, p) in acc.iter_mut().zip(&psd.power) {
            *a += p;
        }
    }
    let n = signals.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(PsdEstimate { freqs: first.freqs, power: acc })
}

/// RMS decibel distance between the averaged PSDs of the two lists:
/// Euclidean distance of the dB spectra divided by sqrt(n_bins).
pub fn psd_difference(
    reals: &[&Waveform],
    gens: &[&Waveform],
    cfg: SpectralConfig,
) -> Result<f64> {
    let pr = mean_psd(reals, cfg)?;
    let pg = mean_psd(gens, cfg)?;
    let n = pr.power.len();
    let mut acc = 0.0;
    for (a, b) in pr.power.iter().zip(&pg.power) {
        let da = 10.0 * (a + 1e-12).log10();
        let db = 10.0 * (b + 1e-12).log10();
        acc += (da - db) * (da - db);
    }
    Ok((acc / n as f64).sqrt())
}

/// |centroid(x) - centroid(y)| in Hz.
pub fn centroid_diff(x: &Waveform, y: &Waveform, cfg: SpectralConfig) -> Result<f64> {
    let cx = welch_psd(x, cfg.seg_len, cfg.overlap)?.centroid()?;
    let cy = welch_psd(y, cfg.seg_len, cfg.overlap)?.centroid()?;
    Ok((cx - cy).abs())
}

/// |flatness(x) - flatness(y)|, flatness in [0, 1].
pub fn spectral_flatness_diff(x: &Waveform, y: &Waveform, cfg: SpectralConfig) -> Result<f64> {
    let fx = welch_psd(x, cfg.seg_len, cfg.overlap)?.flatness()?;
    let fy = welch_psd(y, cfg.seg_len, cfg.overlap)?.flatness()?;
    Ok((fx - fy).abs())
}

/// Discrete Fréchet distance between the planar curves
/// `(i/(n-1) * time_scale, x_i)` and `(j/(m-1) * time_scale, y_j)` with the
/// Euclidean point metric, via the O(n*m) dynamic program.
pub fn frechet_distance(x: &[f64], y: &[f64], time_scale: f64) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("frechet_distance on empty signal"));
    }
    let n = x.len();
    let m = y.len();
    let tx = |i: usize| if n > 1 { i as f64 / (n - 1) as f64 * time_scale } else { 0.0 };
    let ty = |j: usize| if m > 1 { j as f64 / (m - 1) as f64 * time_scale } else { 0.0 };
    let dist = |i: usize, j: usize| {
        let dt = tx(i) - ty(j);
        let dv = x[i] - y[j];
        (dt * dt + dv * dv).sqrt()
    };

    // Rolling rows of the coupling-measure table.
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for j in 0..m {
        let d = dist(0, j);
        prev[j] = if j == 0 { d } else { prev[j - 1].max(d) };
    }
    for i in 1..n {
        cur[0] = prev[0].max(dist(i, 0));
        for j in 1..m {
            let reach = prev[j].min(prev[j - 1]).min(cur[j - 1]);
            cur[j] = reach.max(dist(i, j));
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Per-pair values of all eight metrics, in Table-1 column order.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairMetrics {
    pub rmse: f64,
    pub mae: f64,
    pub kld: f64,
    pub se: f64,
    pub psdd: f64,
    pub cd: f64,
    pub sf: f64,
    pub fd: f64,
}

impl PairMetrics {
    pub const NAMES: [&'static str; 8] =
        ["RMSE", "MAE", "KLD", "SE", "PSDD", "CD", "SF", "FD"];

    pub fn values(&self) -> [f64; 8] {
        [self.rmse, self.mae, self.kld, self.se, self.psdd, self.cd, self.sf, self.fd]
    }
}

/// Settings for the full eight-metric evaluation of one pair.
#[derive(Debug, Clone, Copy)]
pub struct MetricConfig {
    pub spectral: SpectralConfig,
    pub kld_bins: usize,
    pub frechet_time_scale: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { spectral: SpectralConfig::default(), kld_bins: 50, frechet_time_scale: 1.0 }
    }
}

/// Evaluate all eight metrics for one (real, generated) pair at a common rate.
pub fn evaluate_pair(real: &Waveform, gen: &Waveform, cfg: &MetricConfig) -> Result<PairMetrics> {
    let (x, y) = (real.samples(), gen.samples());
    Ok(PairMetrics {
        rmse: rmse(x, y)?,
        mae: mae(x, y)?,
        kld: kld(x, y, cfg.kld_bins)?,
        se: spectral_entropy_diff(real, gen, cfg.spectral)?,
        psdd: psd_difference(&[real], &[gen], cfg.spectral)?,
        cd: centroid_diff(real, gen, cfg.spectral)?,
        sf: spectral_flatness_diff(real, gen, cfg.spectral)?,
        fd: frechet_distance(x, y, cfg.frechet_time_scale)?,
    })
}

/// Mean and population standard deviation per metric across the pairs of a
/// fold.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub mean: PairMetrics,
    pub std: PairMetrics,
    pub n_pairs: usize,
}

/// Aggregate per-pair metric values into a fold report.
pub fn aggregate(per_pair: &[PairMetrics]) -> Result<MetricsReport> {
    if per_pair.is_empty() {
        return Err(Error::invalid("aggregate needs at least one pair"));
    }
    let n = per_pair.len() as f64;
    let mut mean = [0.0f64; 8];
    for p in per_pair {
        for (m, v) in mean.iter_mut().zip(p.values()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = [0.0f64; 8];
    for p in per_pair {
        for ((s, v), m) in var.iter_mut().zip(p.values()).zip(mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
    let pack = |v: &[f64]| PairMetrics {
        rmse: v[0],
        mae: v[1],
        kld: v[2],
        se: v[3],
        psdd: v[4],
        cd: v[5],
        sf: v[6],
        fd: v[7],
    };
    Ok(MetricsReport { mean: pack(&mean), std: pack(&std), n_pairs: per_pair.len() })
}

/// CSV header fragment in Table-1 column order: `RMSE_mean,RMSE_std,...`.
pub fn csv_header() -> String {
    PairMetrics::NAMES
        .iter()
        .map(|n| format!("{n}_mean,{n}_std"))
        .collect::<Vec<_>>()
        .join(",")
}

/// CSV row fragment matching [`csv_header`].
pub fn csv_row(report: &MetricsReport) -> String {
    report
        .mean
        .values()
        .iter()
        .zip(report.std.values())
        .map(|(m, s)| format!("{m:.6},{s:.6}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn wave(samples: Vec<f64>, fs: f64) -> Waveform {
        Waveform::new(samples, fs).unwrap()
    }

    fn rand_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn rmse_mae_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(rmse(&x, &x).unwrap(), 0.0);
        assert_eq!(mae(&x, &x).unwrap(), 0.0);

        let y = [0.0, 3.0, 2.0, 5.0]; // diff = [1,-1,1,-1]
        assert_eq!(rmse(&x, &y).unwrap(), 1.0);
        assert_eq!(mae(&x, &y).unwrap(), 1.0);

        let z = [4.0, 2.0, 3.0, 4.0]; // diff = [-3,0,0,0]
        assert_eq!(rmse(&x, &z).unwrap(), 1.5);
        assert_eq!(mae(&x, &z).unwrap(), 0.75);

        assert!(rmse(&x, &y[..3]).is_err());
    }

    #[test]
    fn rmse_dominates_mae() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let n = rng.gen_range(2..64);
            let x = rand_unit(&mut rng, n);
            let y = rand_unit(&mut rng, n);
            let r = rmse(&x, &y).unwrap();
            let m = mae(&x, &y).unwrap();
            assert!(r >= m - 1e-12, "rmse {r} < mae {m}");
        }
    }

    #[test]
    fn kld_identity_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = rand_unit(&mut rng, 500);
        assert!(kld(&x, &x, 50).unwrap().abs() < 1e-12);
    }

    #[test]
    fn kld_two_bin_construction() {
        // Signals occupying exactly two histogram bins, giving
        // P_r = (1/2, 1/2) and P_g = (1/4, 3/4).
        let a = -0.49; // interior of one bin
        let b = 0.49; // interior of another
        let real = [a, a, b, b];
        let gen = [a, b, b, b];
        let expect = 0.5 * (2.0f64).ln() + 0.5 * (2.0f64 / 3.0).ln();
        let got = kld(&real, &gen, 50).unwrap();
        assert!((got - expect).abs() < 1e-6, "{got} vs {expect}");

        // The reversed direction differs (asymmetry witness).
        let rev = kld(&gen, &real, 50).unwrap();
        let expect_rev = 0.25 * (0.25f64 / 0.5).ln() + 0.75 * (0.75f64 / 0.5).ln();
        assert!((rev - expect_rev).abs() < 1e-6, "{rev} vs {expect_rev}");
        assert!((got - rev).abs() > 1e-3);
    }

    /// Brute-force histogram KLD oracle, structured independently.
    fn kld_oracle(real: &[f64], gen: &[f64], bins: usize) -> f64 {
        let hist = |x: &[f64]| {
            let mut h = vec![0usize; bins];
            for &v in x {
                let mut idx = (((v + 1.0) / 2.0) * bins as f64).floor() as isize;
                if idx < 0 {
                    idx = 0;
                }
                if idx as usize >= bins {
                    idx = bins as isize - 1;
                }
                h[idx as usize] += 1;
            }
            h
        };
        let hr = hist(real);
        let hg = hist(gen);
        let tr: f64 = real.len() as f64 + bins as f64 * 1e-10;
        let tg: f64 = gen.len() as f64 + bins as f64 * 1e-10;
        let mut acc = 0.0;
        for i in 0..bins {
            let p = (hr[i] as f64 + 1e-10) / tr;
            let q = (hg[i] as f64 + 1e-10) / tg;
            acc += p * (p / q).ln();
        }
        acc.max(0.0)
    }

    #[test]
    fn kld_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n = rng.gen_range(10..300);
            let x = rand_unit(&mut rng, n);
            let y = rand_unit(&mut rng, n);
            let got = kld(&x, &y, 50).unwrap();
            let want = kld_oracle(&x, &y, 50);
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn kld_range_check() {
        let x = [0.0, 1.5, 0.0, 0.0];
        let y = [0.0; 4];
        assert!(kld(&x, &y, 50).is_err());
    }

    #[test]
    fn entropy_kernel_flat_spectrum() {
        for m in [8usize, 64, 129] {
            let power = vec![0.37; m];
            let se = entropy_of_power(&power).unwrap();
            assert!((se - (m as f64).ln()).abs() < 1e-6, "m={m}: {se}");
        }
    }

    #[test]
    fn entropy_ordering_noise_above_tone() {
        let fs = 2000.0;
        let n = 4096;
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let noise = wave((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), fs);
        let tone = wave(
            (0..n).map(|i| (2.0 * PI * 200.0 * i as f64 / fs).sin()).collect(),
            fs,
        );
        let cfg = SpectralConfig::default();
        let se_noise = spectral_entropy(&noise, cfg).unwrap();
        let se_tone = spectral_entropy(&tone, cfg).unwrap();
        assert!(se_noise > se_tone, "{se_noise} vs {se_tone}");
    }

    #[test]
    fn se_identity_zero() {
        let fs = 2000.0;
        let w = wave(
            (0..2048).map(|i| (2.0 * PI * 130.0 * i as f64 / fs).sin()).collect(),
            fs,
        );
        assert_eq!(spectral_entropy_diff(&w, &w, SpectralConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn psdd_identity_and_scale() {
        let fs = 2000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let x: Vec<f64> = (0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wx = wave(x.clone(), fs);
        let cfg = SpectralConfig::default();
        assert_eq!(psd_difference(&[&wx], &[&wx], cfg).unwrap(), 0.0);

        // Power x10 = amplitude x sqrt(10) -> a uniform 10 dB offset. The
        // 1e-12 dB floor perturbs the last digits, nothing more.
        let scaled = wave(x.iter().map(|v| v * 10f64.sqrt()).collect(), fs);
        let d = psd_difference(&[&wx], &[&scaled], cfg).unwrap();
        assert!((d - 10.0).abs() < 1e-6, "psdd {d}");
    }

    #[test]
    fn psdd_two_tone_positive() {
        let fs = 2000.0;
        let t1 = wave(
            (0..4096).map(|i| (2.0 * PI * 100.0 * i as f64 / fs).sin()).collect(),
            fs,
        );
        let t2 = wave(
            (0..4096).map(|i| (2.0 * PI * 400.0 * i as f64 / fs).sin()).collect(),
            fs,
        );
        let d = psd_difference(&[&t1], &[&t2], SpectralConfig::default()).unwrap();
        assert!(d > 0.0);
        assert!(psd_difference(&[], &[&t1], SpectralConfig::default()).is_err());
    }

    #[test]
    fn centroid_of_tone() {
        let fs = 2000.0;
        let tone = wave(
            (0..4096).map(|i| (2.0 * PI * 200.0 * i as f64 / fs).sin()).collect(),
            fs,
        );
        let cfg = SpectralConfig::default();
        let psd = welch_psd(&tone, cfg.seg_len, cfg.overlap).unwrap();
        let c = psd.centroid().unwrap();
        assert!((c - 200.0).abs() <= psd.df(), "centroid {c}");
        assert_eq!(centroid_diff(&tone, &tone, cfg).unwrap(), 0.0);
    }

    #[test]
    fn flatness_diff_identity_zero() {
        let fs = 2000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let w = wave((0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect(), fs);
        assert_eq!(spectral_flatness_diff(&w, &w, SpectralConfig::default()).unwrap(), 0.0);
    }

    /// Exhaustive minimization over all monotone couplings (n, m <= 6).
    fn frechet_oracle(x: &[f64], y: &[f64], s: f64) -> f64 {
        let n = x.len();
        let m = y.len();
        let px = |i: usize| (if n > 1 { i as f64 / (n - 1) as f64 * s } else { 0.0 }, x[i]);
        let py = |j: usize| (if m > 1 { j as f64 / (m - 1) as f64 * s } else { 0.0 }, y[j]);
        let d = move |i: usize, j: usize| {
            let (ax, av) = px(i);
            let (bx, bv) = py(j);
            ((ax - bx).powi(2) + (av - bv).powi(2)).sqrt()
        };
        fn walk(
            i: usize,
            j: usize,
            n: usize,
            m: usize,
            cur: f64,
            d: &dyn Fn(usize, usize) -> f64,
        ) -> f64 {
            let cur = cur.max(d(i, j));
            if i == n - 1 && j == m - 1 {
                return cur;
            }
            let mut best = f64::INFINITY;
            if i + 1 < n {
                best = best.min(walk(i + 1, j, n, m, cur, d));
            }
            if j + 1 < m {
                best = best.min(walk(i, j + 1, n, m, cur, d));
            }
            if i + 1 < n && j + 1 < m {
                best = best.min(walk(i + 1, j + 1, n, m, cur, d));
            }
            best
        }
        walk(0, 0, n, m, 0.0, &d)
    }

    #[test]
    fn frechet_identity_zero() {
        let x = [0.1, -0.4, 0.9, 0.0];
        assert_eq!(frechet_distance(&x, &x, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn frechet_constant_curves_s_zero() {
        let x = [0.0; 5];
        let y = [0.7; 5];
        assert!((frechet_distance(&x, &y, 0.0).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn frechet_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for trial in 0..500 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(1..=6);
            let x = rand_unit(&mut rng, n);
            let y = rand_unit(&mut rng, m);
            let s = if trial % 3 == 0 { 0.0 } else { 1.0 };
            let dp = frechet_distance(&x, &y, s).unwrap();
            let oracle = frechet_oracle(&x, &y, s);
            assert!((dp - oracle).abs() < 1e-12, "n={n} m={m} dp={dp} oracle={oracle}");
        }
    }

    #[test]
    fn frechet_symmetric_and_endpoint_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        for _ in 0..100 {
            let n = rng.gen_range(2..30);
            let m = rng.gen_range(2..30);
            let x = rand_unit(&mut rng, n);
            let y = rand_unit(&mut rng, m);
            let a = frechet_distance(&x, &y, 1.0).unwrap();
            let b = frechet_distance(&y, &x, 1.0).unwrap();
            assert!((a - b).abs() < 1e-12);
            // Endpoints are forcibly coupled, giving a lower bound.
            let d00 = (x[0] - y[0]).abs();
            let dnn = (x[n - 1] - y[m - 1]).abs();
            assert!(a >= d00.max(dnn) - 1e-12);
        }
    }

    #[test]
    fn frechet_empty_errors() {
        assert!(frechet_distance(&[], &[1.0], 1.0).is_err());
    }

    #[test]
    fn aggregate_mean_and_population_std() {
        let mk = |v: f64| PairMetrics {
            rmse: v,
            mae: v,
            kld: v,
            se: v,
            psdd: v,
            cd: v,
            sf: v,
            fd: v,
        };
        let single = aggregate(&[mk(2.5)]).unwrap();
        assert_eq!(single.mean.rmse, 2.5);
        assert_eq!(single.std.rmse, 0.0);
        assert_eq!(single.n_pairs, 1);

        let two = aggregate(&[mk(1.0), mk(3.0)]).unwrap();
        assert_eq!(two.mean.fd, 2.0);
        assert_eq!(two.std.fd, 1.0);
    }

    #[test]
    fn csv_column_order_is_table_order() {
        let header = csv_header();
        assert!(header.starts_with("RMSE_mean,RMSE_std,MAE_mean"));
        let names: Vec<&str> = header.split(',').step_by(2).collect();
        let got: Vec<String> =
            names.iter().map(|s| s.trim_end_matches("_mean").to_string()).collect();
        assert_eq!(got, ["RMSE", "MAE", "KLD", "SE", "PSDD", "CD", "SF", "FD"]);
    }

    #[test]
    fn all_metrics_zero_on_identical_pair() {
        let fs = 2000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let x: Vec<f64> = (0..1280).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = wave(x, fs);
        let m = evaluate_pair(&w, &w, &MetricConfig::default()).unwrap();
        for (name, v) in PairMetrics::NAMES.iter().zip(m.values()) {
            assert!(v.abs() < 1e-12, "{name} = {v} on identical pair");
        }
    }

    #[test]
    fn all_metrics_nonnegative() {
        let fs = 2000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..10 {
            let x: Vec<f64> = (0..1280).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..1280).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m =
                evaluate_pair(&wave(x, fs), &wave(y, fs), &MetricConfig::default()).unwrap();
            for (name, v) in PairMetrics::NAMES.iter().zip(m.values()) {
                assert!(v >= 0.0, "{name} = {v} negative");
            }
        }
    }
}
