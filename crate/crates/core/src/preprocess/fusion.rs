//! Dual-annotator SQI fusion: keep only good-quality DUS segments and pick
//! the best FECG channel per segment.
//!
//! SQI scale is 1..5 with 1 = good/clean. The fusion is a pure function of
//! the annotation:
//!
//! 1. drop the segment unless both annotators gave the DUS an SQI of 1;
//! 2. a channel is a candidate only if its two scores sum to at most 5 and
//!    neither score is 5;
//! 3. if any candidate was rated 1 by both annotators, take the one with the
//!    best automatic rank among those;
//! 4. otherwise take the lowest summed SQI, breaking ties by the lowest
//!    individual score and then by the best automatic rank.
//!
//! Segments where one annotator rated a channel 1 and the other did not fall
//! through to the summed-SQI rule.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dual-annotator quality annotation for one 3.75 s segment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SegmentAnnotation {
    /// Segment start in seconds.
    pub start: f64,
    /// Segment duration in seconds (3.75).
    pub duration: f64,
    /// DUS SQI from annotators A and B.
    pub dus_sqi: (u8, u8),
    /// Per-channel FECG SQI pairs, one per channel.
    pub fecg_sqi: Vec<(u8, u8)>,
    /// Per-channel automatic quality rank, 1 = best; a permutation of 1..=n.
    pub auto_rank: Vec<u32>,
}

impl SegmentAnnotation {
    pub fn validate(&self) -> Result<()> {
        if self.fecg_sqi.is_empty() || self.fecg_sqi.len() != self.auto_rank.len() {
            return Err(Error::invalid(format!(
                "segment at {}: {} channel scores vs {} ranks",
                self.start,
                self.fecg_sqi.len(),
                self.auto_rank.len()
            )));
        }
        if (self.duration - 3.75).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "segment at {}: duration {} != 3.75",
                self.start, self.duration
            )));
        }
        let sqi_ok = |s: u8| (1..=5).contains(&s);
        if !sqi_ok(self.dus_sqi.0) || !sqi_ok(self.dus_sqi.1) {
            return Err(Error::invalid(format!("segment at {}: DUS SQI outside 1..5", self.start)));
        }
        for &(a, b) in &self.fecg_sqi {
            if !sqi_ok(a) || !sqi_ok(b) {
                return Err(Error::invalid(format!(
                    "segment at {}: FECG SQI outside 1..5",
                    self.start
                )));
            }
        }
        // Ranks must be a strict ordering (annotations may rank a subset of a
        // larger channel set, so values above n are allowed).
        for (i, &r) in self.auto_rank.iter().enumerate() {
            if r == 0 || self.auto_rank[..i].contains(&r) {
                return Err(Error::invalid(format!(
                    "segment at {}: auto_rank values must be distinct and >= 1",
                    self.start
                )));
            }
        }
        Ok(())
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Channel chosen for an accepted segment, or rejection.
pub fn select_fecg_channel(seg: &SegmentAnnotation) -> Result<Option<usize>> {
    seg.validate()?;

    if seg.dus_sqi.0 != 1 || seg.dus_sqi.1 != 1 {
        return Ok(None);
    }

    let candidates: Vec<usize> = seg
        .fecg_sqi
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| *a != 5 && *b != 5 && (a + b) <= 5)
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }

    let both_one: Vec<usize> =
        candidates.iter().copied().filter(|&i| seg.fecg_sqi[i] == (1, 1)).collect();
    if !both_one.is_empty() {
        let best = both_one.into_iter().min_by_key(|&i| seg.auto_rank[i]).unwrap();
        return Ok(Some(best));
    }

    let best = candidates
        .into_iter()
        .min_by_key(|&i| {
            let (a, b) = seg.fecg_sqi[i];
            (a + b, a.min(b), seg.auto_rank[i])
        })
        .unwrap();
    Ok(Some(best))
}
