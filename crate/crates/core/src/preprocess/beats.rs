//! Beat-pair extraction and subject-independent splitting.

use super::fusion::SegmentAnnotation;
use crate::signal::{minmax_normalize_slice, Waveform};
use crate::{Error, Result};

/// One subject's raw recording with annotations.
#[derive(Debug, Clone)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub dus: Waveform,
    pub fecg_channels: Vec<Waveform>,
    /// R-peak times in seconds, strictly ascending.
    pub peaks: Vec<f64>,
    pub segments: Vec<SegmentAnnotation>,
}

impl SubjectRecord {
    pub fn validate(&self) -> Result<()> {
        if self.fecg_channels.is_empty() || self.fecg_channels.len() > 7 {
            return Err(Error::invalid(format!(
                "subject {}: expected 1-7 FECG channels, got {}",
                self.subject_id,
                self.fecg_channels.len()
            )));
        }
        let fs0 = self.fecg_channels[0].fs();
        let len0 = self.fecg_channels[0].len();
        for ch in &self.fecg_channels {
            if ch.fs() != fs0 || ch.len() != len0 {
                return Err(Error::invalid(format!(
                    "subject {}: FECG channels disagree on length or rate",
                    self.subject_id
                )));
            }
        }
        let duration = self.fecg_channels[0].duration_s().min(self.dus.duration_s());
        for w in self.peaks.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid(format!(
                    "subject {}: peaks not strictly ascending at {}",
                    self.subject_id, w[1]
                )));
            }
        }
        if let Some(&last) = self.peaks.last() {
            if last >= duration || self.peaks[0] < 0.0 {
                return Err(Error::invalid(format!(
                    "subject {}: peak outside signal duration",
                    self.subject_id
                )));
            }
        }
        for seg in &self.segments {
            seg.validate()?;
            if seg.fecg_sqi.len() != self.fecg_channels.len() {
                return Err(Error::invalid(format!(
                    "subject {}: segment at {} annotates {} channels, record has {}",
                    self.subject_id,
                    seg.start,
                    seg.fecg_sqi.len(),
                    self.fecg_channels.len()
                )));
            }
        }
        Ok(())
    }
}

/// A filtered, segment-normalized, lag-corrected subject ready for beat
/// extraction.
#[derive(Debug, Clone)]
pub struct AlignedSubject {
    pub subject_id: String,
    /// 2000 Hz, lag already removed.
    pub dus: Waveform,
    /// 250 Hz.
    pub fecg_channels: Vec<Waveform>,
    pub peaks: Vec<f64>,
    pub accepted: Vec<AcceptedSegment>,
    /// Lag that was removed from the DUS (seconds, positive = DUS trailed).
    pub lag_s: f64,
}

/// An accepted segment and the FECG channel fusion chose for it.
#[derive(Debug, Clone, Copy)]
pub struct AcceptedSegment {
    pub start: f64,
    pub duration: f64,
    pub channel: usize,
}

/// One aligned training example.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatPair {
    pub subject_id: String,
    /// Time of the first peak of the window, seconds.
    pub peak_time: f64,
    /// n_beats * L_in samples at the FECG rate, min-max normalized.
    pub fecg_in: Vec<f32>,
    /// n_beats * 8 * L_in samples at the DUS rate, min-max normalized.
    pub dus_out: Vec<f32>,
}

/// The fixed DUS/FECG sampling-rate ratio (2000 / 250).
pub const RATE_RATIO: usize = 8;

/// Extract every n_beats-long run of consecutive peaks inside each accepted
/// segment. Each beat occupies an `l_in`-sample slot starting at its peak;
/// slot content ends at the next peak or the slot boundary, whichever comes
/// first, and is zero beyond that. Windows with a degenerate (constant) raw
/// range are dropped.
pub fn extract_beat_pairs(
    subj: &AlignedSubject,
    n_beats: usize,
    l_in: usize,
) -> Result<Vec<BeatPair>> {
    if !(1..=3).contains(&n_beats) {
        return Err(Error::invalid(format!("n_beats must be 1..=3, got {n_beats}")));
    }
    if l_in == 0 {
        return Err(Error::invalid("l_in must be positive"));
    }
    let fs_in = subj.fecg_channels[0].fs();
    let fs_out = subj.dus.fs();
    let l_out = l_in * RATE_RATIO;

    let mut pairs = Vec::new();
    for seg in &subj.accepted {
        let ch = &subj.fecg_channels[seg.channel];
        let seg_end = seg.start + seg.duration;
        // Indices into subj.peaks of the peaks inside this segment.
        let inside: Vec<usize> = subj
            .peaks
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= seg.start && p < seg_end)
            .map(|(i, _)| i)
            .collect();
        if inside.len() < n_beats {
            continue;
        }
        for run in inside.windows(n_beats) {
            let mut fecg_raw = vec![0.0f64; n_beats * l_in];
            let mut dus_raw = vec![0.0f64; n_beats * l_out];
            for (b, &peak_idx) in run.iter().enumerate() {
                let p = subj.peaks[peak_idx];
                let next = subj.peaks.get(peak_idx + 1).copied();
                fill_slot(
                    ch.samples(),
                    fs_in,
                    p,
                    next,
                    l_in,
                    &mut fecg_raw[b * l_in..(b + 1) * l_in],
                );
                fill_slot(
                    subj.dus.samples(),
                    fs_out,
                    p,
                    next,
                    l_out,
                    &mut dus_raw[b * l_out..(b + 1) * l_out],
                );
            }
            let (Ok(fecg_in), Ok(dus_out)) =
                (minmax_normalize_slice(&fecg_raw), minmax_normalize_slice(&dus_raw))
            else {
                continue; // degenerate window
            };
            pairs.push(BeatPair {
                subject_id: subj.subject_id.clone(),
                peak_time: subj.peaks[run[0]],
                fecg_in: fecg_in.iter().map(|&v| v as f32).collect(),
                dus_out: dus_out.iter().map(|&v| v as f32).collect(),
            });
        }
    }
    Ok(pairs)
}

/// Copy `[peak, min(next_peak, peak + slot_len/fs, signal end))` into the
/// slot; the remainder stays zero.
fn fill_slot(x: &[f64], fs: f64, peak: f64, next_peak: Option<f64>, slot_len: usize, out: &mut [f64]) {
    let start = (peak * fs).round() as usize;
    if start >= x.len() {
        return;
    }
    let mut end = start + slot_len;
    if let Some(next) = next_peak {
        end = end.min((next * fs).round() as usize);
    }
    end = end.min(x.len());
    let content = end.saturating_sub(start);
    out[..content].copy_from_slice(&x[start..end]);
}

/// Leave-one-subject-out partition: test = the held-out subject's pairs.
pub fn loso_split(pairs: Vec<BeatPair>, held_out: &str) -> Result<(Vec<BeatPair>, Vec<BeatPair>)> {
    if !pairs.iter().any(|p| p.subject_id == held_out) {
        return Err(Error::invalid(format!("unknown subject id {held_out:?}")));
    }
    let (test, train): (Vec<_>, Vec<_>) =
        pairs.into_iter().partition(|p| p.subject_id == held_out);
    Ok((train, test))
}

/// Distinct subject ids in first-appearance order.
pub fn subject_ids(pairs: &[BeatPair]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for p in pairs {
        if !ids.iter().any(|i| i == &p.subject_id) {
            ids.push(p.subject_id.clone());
        }
    }
    ids
}
