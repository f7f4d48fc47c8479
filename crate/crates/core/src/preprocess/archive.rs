//! Beat-pair archive: little-endian binary, magic "FDPAIR1\0", u32 pair
//! count, then per pair: u32 subject-id length + UTF-8 id, f64 peak_time,
//! u32 n_in, n_in * f32 FECG, u32 n_out, n_out * f32 DUS.

use super::beats::BeatPair;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"FDPAIR1\0";

pub fn write_pair_archive(pairs: &[BeatPair], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(pairs.len() as u32).to_le_bytes())?;
    for p in pairs {
        let id = p.subject_id.as_bytes();
        out.write_all(&(id.len() as u32).to_le_bytes())?;
        out.write_all(id)?;
        out.write_all(&p.peak_time.to_le_bytes())?;
        out.write_all(&(p.fecg_in.len() as u32).to_le_bytes())?;
        for v in &p.fecg_in {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&(p.dus_out.len() as u32).to_le_bytes())?;
        for v in &p.dus_out {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_pair_archive(path: &Path) -> Result<Vec<BeatPair>> {
    let mut input = BufReader::new(
        File::open(path)
            .map_err(|e| Error::Data(format!("cannot open archive {}: {e}", path.display())))?,
    );
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| bad(path, "truncated magic"))?;
    if &magic != MAGIC {
        return Err(bad(path, "bad magic (not a beat-pair archive)"));
    }
    let count = read_u32(&mut input, path)? as usize;
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let id_len = read_u32(&mut input, path)? as usize;
        if id_len > 4096 {
            return Err(bad(path, "unreasonable subject-id length"));
        }
        let mut id = vec![0u8; id_len];
        input.read_exact(&mut id).map_err(|_| bad(path, "truncated subject id"))?;
        let subject_id =
            String::from_utf8(id).map_err(|_| bad(path, "subject id is not UTF-8"))?;
        let mut t = [0u8; 8];
        input.read_exact(&mut t).map_err(|_| bad(path, "truncated peak time"))?;
        let peak_time = f64::from_le_bytes(t);
        let fecg_in = read_f32_vec(&mut input, path)?;
        let dus_out = read_f32_vec(&mut input, path)?;
        pairs.push(BeatPair { subject_id, peak_time, fecg_in, dus_out });
    }
    Ok(pairs)
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| bad(path, "truncated u32"))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32_vec(r: &mut impl Read, path: &Path) -> Result<Vec<f32>> {
    let n = read_u32(r, path)? as usize;
    if n > 1 << 26 {
        return Err(bad(path, "unreasonable vector length"));
    }
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes).map_err(|_| bad(path, "truncated f32 vector"))?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn bad(path: &Path, what: &str) -> Error {
    Error::Data(format!("{}: {what}", path.display()))
}
