//! Dataset manifests: one JSON document per subject plus a dataset index.

use super::beats::SubjectRecord;
use super::fusion::SegmentAnnotation;
use crate::signal::read_waveform_csv;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Per-subject manifest; waveform paths are relative to the manifest file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectManifest {
    pub subject_id: String,
    pub dus_path: String,
    pub fecg_paths: Vec<String>,
    pub peaks: Vec<f64>,
    pub segments: Vec<SegmentAnnotation>,
}

/// Index of a dataset directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub subjects: Vec<String>,
}

/// Per-subject generator ground truth, emitted next to the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectTruth {
    pub subject_id: String,
    /// Lag injected into the DUS, seconds.
    pub lag_s: f64,
    /// Mean of 60/interval over the beats contained in each segment; null
    /// when a segment holds fewer than two peaks.
    pub segment_fhr: Vec<Option<f64>>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Load a subject's waveforms through its manifest.
pub fn load_subject(manifest_path: &Path) -> Result<SubjectRecord> {
    let manifest: SubjectManifest = read_json(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let dus = read_waveform_csv(&dir.join(&manifest.dus_path))?;
    let fecg_channels = manifest
        .fecg_paths
        .iter()
        .map(|p| read_waveform_csv(&dir.join(p)))
        .collect::<Result<Vec<_>>>()?;
    let record = SubjectRecord {
        subject_id: manifest.subject_id,
        dus,
        fecg_channels,
        peaks: manifest.peaks,
        segments: manifest.segments,
    };
    record.validate()?;
    Ok(record)
}

/// Load every subject listed in `<dir>/dataset.json`.
pub fn load_dataset(dir: &Path) -> Result<Vec<SubjectRecord>> {
    let index: DatasetManifest = read_json(&dir.join("dataset.json"))?;
    index.subjects.iter().map(|name| load_subject(&dir.join(name))).collect()
}
