//! Checkpoint format: little-endian binary, magic "FEDUS1\0\0", u32 format
//! version, field-tagged architecture, u32 tensor count, then per tensor:
//! u32 name length + UTF-8 name, u32 rank, dims, f32 data.

use super::{ArchConfig, ModelParams, OutActivation};
use crate::autograd::Tensor;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"FEDUS1\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

// Architecture field tags.
const TAG_N_FILTERS: u8 = 1;
const TAG_KERNEL: u8 = 2;
const TAG_DILATIONS: u8 = 3;
const TAG_L_IN: u8 = 4;
const TAG_L_OUT: u8 = 5;
const TAG_POST_SKIP: u8 = 6;
const TAG_OUT_ACT: u8 = 7;

pub fn save_checkpoint(params: &ModelParams<f32>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;

    let arch = &params.arch;
    out.write_all(&7u32.to_le_bytes())?; // field count
    write_tagged_u32(&mut out, TAG_N_FILTERS, arch.n_filters as u32)?;
    write_tagged_u32(&mut out, TAG_KERNEL, arch.kernel as u32)?;
    out.write_all(&[TAG_DILATIONS])?;
    out.write_all(&(arch.dilations.len() as u32).to_le_bytes())?;
    for &d in &arch.dilations {
        out.write_all(&(d as u32).to_le_bytes())?;
    }
    write_tagged_u32(&mut out, TAG_L_IN, arch.l_in as u32)?;
    write_tagged_u32(&mut out, TAG_L_OUT, arch.l_out as u32)?;
    write_tagged_u32(&mut out, TAG_POST_SKIP, arch.post_skip_convs as u32)?;
    out.write_all(&[TAG_OUT_ACT, 0u8])?; // 0 = tanh

    let names = params.names();
    out.write_all(&(names.len() as u32).to_le_bytes())?;
    for (name, tensor) in names.iter().zip(params.tensors()) {
        let nb = name.as_bytes();
        out.write_all(&(nb.len() as u32).to_le_bytes())?;
        out.write_all(nb)?;
        out.write_all(&(tensor.shape().len() as u32).to_le_bytes())?;
        for &d in tensor.shape() {
            out.write_all(&(d as u32).to_le_bytes())?;
        }
        for &v in tensor.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_tagged_u32(out: &mut impl Write, tag: u8, v: u32) -> Result<()> {
    out.write_all(&[tag])?;
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams<f32>> {
    let mut input = BufReader::new(
        File::open(path)
            .map_err(|e| Error::Model(format!("cannot open checkpoint {}: {e}", path.display())))?,
    );
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| bad(path, "truncated magic"))?;
    if &magic != MAGIC {
        return Err(bad(path, "bad magic (not a checkpoint)"));
    }
    let version = read_u32(&mut input, path)?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(
            path,
            &format!("format version {version}, this build reads {CHECKPOINT_VERSION}"),
        ));
    }

    let field_count = read_u32(&mut input, path)?;
    let mut arch = ArchConfig::default();
    for _ in 0..field_count {
        let mut tag = [0u8; 1];
        input.read_exact(&mut tag).map_err(|_| bad(path, "truncated field tag"))?;
        match tag[0] {
            TAG_N_FILTERS => arch.n_filters = read_u32(&mut input, path)? as usize,
            TAG_KERNEL => arch.kernel = read_u32(&mut input, path)? as usize,
            TAG_DILATIONS => {
                let n = read_u32(&mut input, path)? as usize;
                if n > 64 {
                    return Err(bad(path, "unreasonable dilation count"));
                }
                arch.dilations =
                    (0..n).map(|_| read_u32(&mut input, path).map(|v| v as usize)).collect::<Result<_>>()?;
            }
            TAG_L_IN => arch.l_in = read_u32(&mut input, path)? as usize,
            TAG_L_OUT => arch.l_out = read_u32(&mut input, path)? as usize,
            TAG_POST_SKIP => arch.post_skip_convs = read_u32(&mut input, path)? as usize,
            TAG_OUT_ACT => {
                let mut v = [0u8; 1];
                input.read_exact(&mut v).map_err(|_| bad(path, "truncated activation"))?;
                arch.out_activation = match v[0] {
                    0 => OutActivation::Tanh,
                    other => return Err(bad(path, &format!("unknown activation tag {other}"))),
                };
            }
            other => return Err(bad(path, &format!("unknown architecture field tag {other}"))),
        }
    }
    arch.validate().map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;

    let tensor_count = read_u32(&mut input, path)? as usize;
    let mut tensors = Vec::with_capacity(tensor_count);
    let mut names = Vec::with_capacity(tensor_count);
    for _ in 0..tensor_count {
        let name_len = read_u32(&mut input, path)? as usize;
        if name_len > 256 {
            return Err(bad(path, "unreasonable tensor name length"));
        }
        let mut nb = vec![0u8; name_len];
        input.read_exact(&mut nb).map_err(|_| bad(path, "truncated tensor name"))?;
        names.push(String::from_utf8(nb).map_err(|_| bad(path, "tensor name not UTF-8"))?);
        let rank = read_u32(&mut input, path)? as usize;
        if rank > 8 {
            return Err(bad(path, "unreasonable tensor rank"));
        }
        let shape: Vec<usize> =
            (0..rank).map(|_| read_u32(&mut input, path).map(|v| v as usize)).collect::<Result<_>>()?;
        let numel: usize = shape.iter().product();
        if numel > 1 << 28 {
            return Err(bad(path, "unreasonable tensor size"));
        }
        let mut bytes = vec![0u8; numel * 4];
        input.read_exact(&mut bytes).map_err(|_| bad(path, "truncated tensor data"))?;
        let data: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        tensors.push(Tensor::new(shape, data).map_err(|e| Error::Model(format!("{e}")))?);
    }

    let params = ModelParams::from_tensors(arch, tensors)
        .map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
    for (want, got) in params.names().iter().zip(&names) {
        if want != got {
            return Err(bad(path, &format!("tensor {got:?} where {want:?} was expected")));
        }
    }
    Ok(params)
}

/// Load and insist on an expected architecture (no silent reshapes).
pub fn load_expecting(path: &Path, expected: &ArchConfig) -> Result<ModelParams<f32>> {
    let params = load_checkpoint(path)?;
    if &params.arch != expected {
        return Err(Error::Model(format!(
            "{}: checkpoint architecture {:?} does not match configured {:?}",
            path.display(),
            params.arch,
            expected
        )));
    }
    Ok(params)
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| bad(path, "truncated u32"))?;
    Ok(u32::from_le_bytes(b))
}

fn bad(path: &Path, what: &str) -> Error {
    Error::Model(format!("{}: {what}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro() -> ModelParams<f32> {
        let arch = ArchConfig {
            n_filters: 3,
            kernel: 4,
            dilations: vec![1, 2, 4],
            ..Default::default()
        }
        .with_window(24);
        ModelParams::init(arch, 99).unwrap()
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let params = micro();
        save_checkpoint(&params, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.arch, params.arch);
        for (a, b) in params.tensors().iter().zip(back.tensors()) {
            assert_eq!(a.shape(), b.shape());
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        // Save-of-load is byte-identical.
        let bytes1 = std::fs::read(&path).unwrap();
        let path2 = dir.path().join("m2.ckpt");
        save_checkpoint(&back, &path2).unwrap();
        assert_eq!(bytes1, std::fs::read(&path2).unwrap());
    }

    #[test]
    fn corrupt_and_mismatched_files_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"garbage").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Model(_))));

        // Valid file, wrong expected architecture.
        let good = dir.path().join("good.ckpt");
        let params = micro();
        save_checkpoint(&params, &good).unwrap();
        let other_arch = ArchConfig {
            n_filters: 5,
            kernel: 4,
            dilations: vec![1, 2, 4],
            ..Default::default()
        }
        .with_window(24);
        assert!(matches!(load_expecting(&good, &other_arch), Err(Error::Model(_))));
        assert!(load_expecting(&good, &params.arch).is_ok());
    }

    #[test]
    fn version_mismatch_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.ckpt");
        let params = micro();
        save_checkpoint(&params, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = 0xFF; // clobber the version field
        std::fs::write(&path, bytes).unwrap();
        match load_checkpoint(&path) {
            Err(Error::Model(msg)) => assert!(msg.contains("version"), "{msg}"),
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
