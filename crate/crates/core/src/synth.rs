//! Synthetic paired FECG/DUS subject generator.
//!
//! Stands in for clinical recordings: quasi-periodic sum-of-Gaussians FECG
//! beats with a bounded random-walk heart rate, and DUS built from two
//! amplitude bursts per cardiac cycle (systolic + diastolic) modulating a
//! band-limited noise carrier. The carrier is one fixed realization shared
//! by the whole dataset and restarted at each beat, so the FECG-to-DUS
//! mapping is deterministic given the beat interval (plus additive noise) and
//! remains learnable across subjects.
//!
//! All randomness flows from `SynthConfig::seed` through named substreams;
//! regeneration is bit-identical and per-subject generation is
//! order-independent.

use crate::preprocess::{SegmentAnnotation, SubjectRecord, SubjectTruth};
use crate::signal::{butter_bandpass, Waveform};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FECG_FS: f64 = 250.0;
pub const DUS_FS: f64 = 2000.0;
pub const SEGMENT_S: f64 = 3.75;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_subjects: usize,
    /// Seconds per subject (>= 30).
    pub duration_s: f64,
    /// Per-subject base FHR is spread across this bpm range.
    pub fhr_base_range: (f64, f64),
    /// Stationary std of the beat-to-beat FHR walk, bpm.
    pub fhr_variability: f64,
    /// Target spectral peak of the DUS carrier, Hz.
    pub dus_peak_hz: f64,
    pub noise_snr_db: f64,
    pub seed: u64,
    pub n_fecg_channels: usize,
    /// Known lag injected into the DUS (positive = DUS trails), seconds.
    pub dus_lag_s: f64,
    /// Fraction of segments corrupted and labeled poor quality.
    pub corruption_fraction: f64,
    // DUS burst morphology (valve-event stand-ins).
    pub systolic_offset_s: f64,
    pub systolic_width_s: f64,
    pub diastolic_frac: f64,
    pub diastolic_width_s: f64,
    pub diastolic_amp: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 5,
            duration_s: 600.0,
            fhr_base_range: (110.0, 160.0),
            fhr_variability: 5.0,
            dus_peak_hz: 200.0,
            noise_snr_db: 20.0,
            seed: 42,
            n_fecg_channels: 3,
            dus_lag_s: 0.10,
            corruption_fraction: 0.0,
            systolic_offset_s: 0.04,
            systolic_width_s: 0.05,
            diastolic_frac: 0.45,
            diastolic_width_s: 0.07,
            diastolic_amp: 0.6,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::Config("n_subjects must be >= 1".into()));
        }
        if self.duration_s < 30.0 {
            return Err(Error::Config(format!("duration_s {} below 30", self.duration_s)));
        }
        let (lo, hi) = self.fhr_base_range;
        if !(90.0..=200.0).contains(&lo) || !(90.0..=200.0).contains(&hi) || lo > hi {
            return Err(Error::Config(format!("fhr base range ({lo}, {hi}) outside [90, 200]")));
        }
        if !(self.dus_peak_hz > 25.0 && self.dus_peak_hz < 600.0) {
            return Err(Error::Config(format!(
                "dus_peak_hz {} outside (25, 600)",
                self.dus_peak_hz
            )));
        }
        if self.n_fecg_channels == 0 || self.n_fecg_channels > 7 {
            return Err(Error::Config("n_fecg_channels must be in 1..=7".into()));
        }
        if !(0.0..=1.0).contains(&self.corruption_fraction) {
            return Err(Error::Config("corruption_fraction must be in [0, 1]".into()));
        }
        Ok(())
    }
}

// Named substreams. Tags keep the streams independent of generation order.
const TAG_FHR: u64 = 1;
const TAG_FECG_NOISE: u64 = 2;
const TAG_DUS_NOISE: u64 = 3;
const TAG_CARRIER: u64 = 4;
const TAG_CORRUPT: u64 = 5;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn substream(seed: u64, subject: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(subject.wrapping_mul(0x9E37) ^ tag)))
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Beat-to-beat FHR trajectory and the resulting R-peak times.
#[derive(Debug, Clone)]
pub struct FecgTruth {
    pub peaks: Vec<f64>,
    /// FHR (bpm) governing the interval after each peak.
    pub fhr: Vec<f64>,
}

/// Clean single-channel FECG at 250 Hz with exact R-peak times.
pub fn gen_fecg(cfg: &SynthConfig, subject: usize) -> Result<(Waveform, FecgTruth)> {
    cfg.validate()?;
    let mut rng = substream(cfg.seed, subject as u64, TAG_FHR);

    // Bases spread evenly over the range with a little jitter, so LOSO folds
    // interpolate rather than extrapolate wildly.
    let (lo, hi) = cfg.fhr_base_range;
    let frac = (subject as f64 + 0.5) / cfg.n_subjects as f64;
    let base =
        (lo + (hi - lo) * frac + rng.gen_range(-2.0..2.0)).clamp(lo.max(90.0), hi.min(200.0));

    // Mean-reverting walk with stationary std = fhr_variability.
    let rho = 0.95f64;
    let step_std = cfg.fhr_variability * (1.0 - rho * rho).sqrt();
    let mut fhr_k = base;
    let mut t = 0.5;
    let mut peaks = Vec::new();
    let mut fhr = Vec::new();
    while t < cfg.duration_s - 0.5 {
        peaks.push(t);
        fhr.push(fhr_k);
        t += 60.0 / fhr_k;
        fhr_k = (base + rho * (fhr_k - base) + step_std * gauss(&mut rng)).clamp(90.0, 200.0);
    }

    let n = (cfg.duration_s * FECG_FS).round() as usize;
    let mut samples = vec![0.0f64; n];
    for (k, &r) in peaks.iter().enumerate() {
        let interval = 60.0 / fhr[k];
        // P-QRS-T as Gaussian bumps; P/T offsets scale with the interval.
        add_bump(&mut samples, FECG_FS, r - 0.25 * interval, 0.025, 0.15);
        add_bump(&mut samples, FECG_FS, r - 0.025, 0.010, -0.10);
        add_bump(&mut samples, FECG_FS, r, 0.010, 1.0);
        add_bump(&mut samples, FECG_FS, r + 0.025, 0.010, -0.12);
        add_bump(&mut samples, FECG_FS, r + 0.35 * interval, 0.045, 0.30);
    }
    Ok((Waveform::new(samples, FECG_FS)?, FecgTruth { peaks, fhr }))
}

fn add_bump(samples: &mut [f64], fs: f64, center: f64, sigma: f64, amp: f64) {
    let lo = (((center - 4.0 * sigma) * fs).floor().max(0.0)) as usize;
    let hi = ((((center + 4.0 * sigma) * fs).ceil()) as usize).min(samples.len());
    for (i, slot) in samples.iter_mut().enumerate().take(hi).skip(lo) {
        let t = i as f64 / fs;
        *slot += amp * (-((t - center) / sigma).powi(2)).exp();
    }
}

/// The dataset-wide carrier template: band-limited noise with its spectral
/// peak near `dus_peak_hz`, one second long, unit RMS.
pub fn carrier_template(cfg: &SynthConfig) -> Result<Vec<f64>> {
    let mut rng = substream(cfg.seed, u64::MAX, TAG_CARRIER);
    let n = DUS_FS as usize; // 1 s covers any interval down to 60 bpm
    // Generate double length and keep the steady-state tail.
    let raw: Vec<f64> = (0..2 * n).map(|_| gauss(&mut rng)).collect();
    let wide = butter_bandpass(&Waveform::new(raw, DUS_FS)?, 150.0, 400.0, 2)?;
    let peaked = butter_bandpass(&wide, cfg.dus_peak_hz * 0.75, cfg.dus_peak_hz * 1.35, 2)?;
    let tail = &peaked.samples()[n..];
    let rms = (tail.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    Ok(tail.iter().map(|v| v / rms).collect())
}

/// DUS at 2000 Hz: per cardiac cycle a systolic and a diastolic burst
/// modulating the carrier (restarted at each peak), plus a white noise floor,
/// the whole signal delayed by `dus_lag_s`.
pub fn gen_dus(
    peaks: &[f64],
    cfg: &SynthConfig,
    subject: usize,
    carrier: &[f64],
) -> Result<Waveform> {
    if peaks.is_empty() {
        return Err(Error::invalid("gen_dus requires at least one peak"));
    }
    let n = (cfg.duration_s * DUS_FS).round() as usize;
    let sig_s = cfg.systolic_width_s / 2.355; // FWHM -> sigma
    let sig_d = cfg.diastolic_width_s / 2.355;
    let floor = 0.05;

    let mut samples = vec![0.0f64; n];
    for (i, slot) in samples.iter_mut().enumerate() {
        let t = i as f64 / DUS_FS;
        // Governing cycle: the latest peak at or before t.
        let (tau, interval) = match peaks.partition_point(|&p| p <= t) {
            0 => (t + 1.0, 0.45), // before the first peak: floor only
            k => {
                let k = k - 1;
                let interval = match peaks.get(k + 1) {
                    Some(&nx) => nx - peaks[k],
                    None if k > 0 => peaks[k] - peaks[k - 1],
                    None => 0.45,
                };
                (t - peaks[k], interval)
            }
        };
        let mut env = floor;
        if tau < 1.0 {
            env += (-((tau - cfg.systolic_offset_s) / sig_s).powi(2)).exp();
            env += cfg.diastolic_amp
                * (-((tau - cfg.diastolic_frac * interval) / sig_d).powi(2)).exp();
        }
        let c = carrier[((tau * DUS_FS) as usize) % carrier.len()];
        *slot = env * c;
    }

    // Additive white noise floor at the configured SNR.
    let rms = (samples.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let noise_rms = rms * 10f64.powf(-cfg.noise_snr_db / 20.0);
    let mut rng = substream(cfg.seed, subject as u64, TAG_DUS_NOISE);
    for v in samples.iter_mut() {
        *v += noise_rms * gauss(&mut rng);
    }

    Ok(Waveform::new(samples, DUS_FS)?.shifted(cfg.dus_lag_s))
}

/// Full dataset: subject records with annotations plus generator ground
/// truth (injected lag and per-segment FHR).
pub fn gen_dataset(cfg: &SynthConfig) -> Result<Vec<(SubjectRecord, SubjectTruth)>> {
    cfg.validate()?;
    let carrier = carrier_template(cfg)?;
    (0..cfg.n_subjects).map(|s| gen_subject(cfg, s, &carrier)).collect()
}

fn gen_subject(
    cfg: &SynthConfig,
    subject: usize,
    carrier: &[f64],
) -> Result<(SubjectRecord, SubjectTruth)> {
    let subject_id = format!("s{:02}", subject + 1);
    let (clean_fecg, truth) = gen_fecg(cfg, subject)?;
    let mut dus = gen_dus(&truth.peaks, cfg, subject, carrier)?;

    // Channels share the clean FECG; noise grows with channel index so the
    // automatic rank (1 = channel 0) is honest.
    let clean_rms = {
        let x = clean_fecg.samples();
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    };
    let base_noise = clean_rms * 10f64.powf(-cfg.noise_snr_db / 20.0);
    let mut fecg_channels = Vec::with_capacity(cfg.n_fecg_channels);
    for c in 0..cfg.n_fecg_channels {
        let mut rng = substream(cfg.seed, subject as u64, TAG_FECG_NOISE + 16 * (c as u64 + 1));
        let std = base_noise * (1.0 + 0.8 * c as f64);
        let samples: Vec<f64> =
            clean_fecg.samples().iter().map(|v| v + std * gauss(&mut rng)).collect();
        fecg_channels.push(Waveform::new(samples, FECG_FS)?);
    }

    // Segment annotations; optionally corrupt a fraction.
    let n_segs = (cfg.duration_s / SEGMENT_S).floor() as usize;
    let mut corrupt_rng = substream(cfg.seed, subject as u64, TAG_CORRUPT);
    let mut segments = Vec::with_capacity(n_segs);
    let mut segment_fhr = Vec::with_capacity(n_segs);
    let mut dus_samples = dus.samples().to_vec();
    for k in 0..n_segs {
        let start = k as f64 * SEGMENT_S;
        let corrupted = cfg.corruption_fraction > 0.0
            && corrupt_rng.gen_range(0.0..1.0) < cfg.corruption_fraction;
        if corrupted {
            // Burst noise over the whole segment, labeled "poor".
            let a = (start * DUS_FS) as usize;
            let b = (((start + SEGMENT_S) * DUS_FS) as usize).min(dus_samples.len());
            for v in dus_samples[a..b].iter_mut() {
                *v += 2.0 * gauss(&mut corrupt_rng);
            }
        }
        segments.push(SegmentAnnotation {
            start,
            duration: SEGMENT_S,
            dus_sqi: if corrupted { (2, 2) } else { (1, 1) },
            fecg_sqi: vec![(1, 1); cfg.n_fecg_channels],
            auto_rank: (1..=cfg.n_fecg_channels as u32).collect(),
        });
        segment_fhr.push(segment_truth_fhr(&truth.peaks, start, start + SEGMENT_S));
    }
    dus = Waveform::new(dus_samples, DUS_FS)?;

    let record = SubjectRecord {
        subject_id: subject_id.clone(),
        dus,
        fecg_channels,
        peaks: truth.peaks.clone(),
        segments,
    };
    record.validate()?;
    let truth = SubjectTruth { subject_id, lag_s: cfg.dus_lag_s, segment_fhr };
    Ok((record, truth))
}

/// Mean of 60/interval over intervals whose endpoints both fall inside the
/// segment; `None` when fewer than two peaks land inside.
fn segment_truth_fhr(peaks: &[f64], start: f64, end: f64) -> Option<f64> {
    let inside: Vec<f64> = peaks.iter().copied().filter(|&p| p >= start && p < end).collect();
    if inside.len() < 2 {
        return None;
    }
    let rates: Vec<f64> = inside.windows(2).map(|w| 60.0 / (w[1] - w[0])).collect();
    Some(rates.iter().sum::<f64>() / rates.len() as f64)
}
