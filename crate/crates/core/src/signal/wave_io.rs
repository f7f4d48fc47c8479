//! Waveform CSV format: a `# fs=<Hz>` comment header, then one amplitude per
//! line as decimal text. The writer emits 9 significant digits.

use super::Waveform;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_waveform_csv(w: &Waveform, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# fs={}", w.fs())?;
    for &v in w.samples() {
        writeln!(out, "{:.8e}", v)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_waveform_csv(path: &Path) -> Result<Waveform> {
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open waveform {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut fs = None;
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("fs=") {
                fs = Some(v.trim().parse::<f64>().map_err(|_| {
                    Error::Data(format!("{}: bad fs value {v:?}", path.display()))
                })?);
            }
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::Data(format!("{}: line {}: bad sample {line:?}", path.display(), lineno + 1))
        })?;
        samples.push(v);
    }
    let fs = fs.ok_or_else(|| {
        Error::Data(format!("{}: missing '# fs=<Hz>' header", path.display()))
    })?;
    Waveform::new(samples, fs)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}
