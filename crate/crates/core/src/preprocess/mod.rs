//! Raw recordings -> aligned, quality-filtered, fixed-length training pairs.
//!
//! Stages per subject: resample (DUS 2000 Hz, FECG 250 Hz), filter
//! (Butterworth 25-600 Hz on DUS, FIR 3-45 Hz on FECG), segment-wise
//! normalization, SQI channel fusion, envelope-based lag estimation over the
//! accepted segments, lag removal, beat extraction.

mod archive;
mod beats;
mod envelope;
mod fusion;
mod lag;
mod manifest;

pub use archive::{read_pair_archive, write_pair_archive};
pub use beats::{
    extract_beat_pairs, loso_split, subject_ids, AcceptedSegment, AlignedSubject, BeatPair,
    SubjectRecord, RATE_RATIO,
};
pub use envelope::{homomorphic_envelope, pan_tompkins_envelope};
pub use fusion::{select_fecg_channel, SegmentAnnotation};
pub use lag::estimate_lag;
pub use manifest::{
    load_dataset, load_subject, read_json, write_json, DatasetManifest, SubjectManifest,
    SubjectTruth,
};

use crate::signal::{butter_bandpass, fir_bandpass, minmax_normalize_slice, resample, Waveform};
use crate::Result;

/// Knobs for the per-subject preprocessing pipeline; defaults follow the
/// reference processing chain.
#[derive(Debug, Clone)]
pub struct PreprocessParams {
    pub fecg_fs: f64,
    pub dus_fs: f64,
    pub butter_band: (f64, f64),
    pub butter_order: usize,
    pub fir_band: (f64, f64),
    pub envelope_lpf_hz: f64,
    pub max_lag_s: f64,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            fecg_fs: 250.0,
            dus_fs: 2000.0,
            butter_band: (25.0, 600.0),
            butter_order: 2,
            fir_band: (3.0, 45.0),
            envelope_lpf_hz: 8.0,
            max_lag_s: 2.0,
        }
    }
}

/// Filter, normalize, fuse, and lag-align one subject.
pub fn align_subject(rec: &SubjectRecord, params: &PreprocessParams) -> Result<AlignedSubject> {
    rec.validate()?;

    let dus = resample(&rec.dus, params.dus_fs)?;
    let dus = butter_bandpass(&dus, params.butter_band.0, params.butter_band.1, params.butter_order)?;
    let fecg_channels = rec
        .fecg_channels
        .iter()
        .map(|ch| {
            let ch = resample(ch, params.fecg_fs)?;
            fir_bandpass(&ch, params.fir_band.0, params.fir_band.1)
        })
        .collect::<Result<Vec<_>>>()?;

    // Channel fusion decides which segments survive and with which channel.
    let mut accepted = Vec::new();
    for seg in &rec.segments {
        if let Some(channel) = select_fecg_channel(seg)? {
            accepted.push(AcceptedSegment { start: seg.start, duration: seg.duration, channel });
        }
    }

    // Segment-wise min-max normalization of the accepted spans.
    let dus = normalize_segments(&dus, &accepted);
    let fecg_channels: Vec<Waveform> =
        fecg_channels.iter().map(|ch| normalize_segments(ch, &accepted)).collect();

    // Lag from envelopes over the concatenated accepted segments, estimated
    // once per subject at the FECG rate.
    let lag_s = if accepted.is_empty() {
        0.0
    } else {
        let dus_env = homomorphic_envelope(&dus, params.envelope_lpf_hz)?;
        let dus_env = resample(&dus_env, params.fecg_fs)?;
        let mut cat_dus = Vec::new();
        let mut cat_fecg = Vec::new();
        for seg in &accepted {
            let env_fecg = pan_tompkins_envelope(&slice_wave(
                &fecg_channels[seg.channel],
                seg.start,
                seg.start + seg.duration,
            )?)?;
            cat_fecg.extend_from_slice(env_fecg.samples());
            cat_dus.extend_from_slice(
                slice_wave(&dus_env, seg.start, seg.start + seg.duration)?.samples(),
            );
        }
        let n = cat_dus.len().min(cat_fecg.len());
        cat_dus.truncate(n);
        cat_fecg.truncate(n);
        estimate_lag(
            &Waveform::new(cat_dus, params.fecg_fs)?,
            &Waveform::new(cat_fecg, params.fecg_fs)?,
            params.max_lag_s,
        )?
    };

    // Remove the lag: the DUS trails by lag_s, so advance it.
    let dus = dus.shifted(-lag_s);

    Ok(AlignedSubject {
        subject_id: rec.subject_id.clone(),
        dus,
        fecg_channels,
        peaks: rec.peaks.clone(),
        accepted,
        lag_s,
    })
}

fn slice_wave(w: &Waveform, t0: f64, t1: f64) -> Result<Waveform> {
    Waveform::new(w.slice_seconds(t0, t1).to_vec(), w.fs())
}

/// Min-max normalize each accepted span in place; degenerate (constant)
/// spans are left untouched.
fn normalize_segments(w: &Waveform, accepted: &[AcceptedSegment]) -> Waveform {
    let fs = w.fs();
    let mut samples = w.samples().to_vec();
    for seg in accepted {
        let a = ((seg.start * fs).round().max(0.0) as usize).min(samples.len());
        let b = (((seg.start + seg.duration) * fs).round() as usize).min(samples.len());
        if b <= a {
            continue;
        }
        if let Ok(norm) = minmax_normalize_slice(&samples[a..b]) {
            samples[a..b].copy_from_slice(&norm);
        }
    }
    Waveform::new(samples, fs).expect("normalization preserves validity")
}
