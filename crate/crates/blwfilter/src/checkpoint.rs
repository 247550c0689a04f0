//! Binary model checkpoints.
//!
//! The file layout is little-endian throughout and fully specified so other
//! tools can read it:
//!
//! ```text
//! magic        4 bytes  "DFCK"
//! version      u32      currently 1
//! kind_len     u32      then that many UTF-8 bytes, e.g. "deepfilter"
//! param_count  u32
//! per parameter, in the graph's canonical order:
//!   name_len   u32      then that many UTF-8 bytes, e.g. "module1.relu_k9.weight"
//!   rank       u32
//!   dims       rank x u64
//!   values     prod(dims) x f64
//! epoch        u64      training epoch the parameters were saved at
//! best_val_ssd f64      best validation SSD seen up to that epoch
//! seed         u64      run seed, for provenance
//! ```
//!
//! Checkpoints describe the standard (512-sample, published-width) build of
//! their model kind; loading reconstructs that graph and fails with a format
//! error if any stored name or shape disagrees. A load either returns a
//! complete, verified model or no model at all.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{build_model, ModelGraph, ModelKind};

const MAGIC: &[u8; 4] = b"DFCK";
const VERSION: u32 = 1;

/// Training provenance stored alongside the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointMeta {
    pub epoch: u64,
    pub best_val_ssd: f64,
    pub seed: u64,
}

fn format_err(detail: impl Into<String>) -> Error {
    Error::Format {
        format: "checkpoint",
        detail: detail.into(),
    }
}

/// Serialize the model and metadata to `path`.
pub fn checkpoint_save(model: &ModelGraph, meta: &CheckpointMeta, path: &Path) -> Result<()> {
    let names = model.param_names();
    let params = model.params();
    let dims = model.param_dims();
    let mut buf = Vec::with_capacity(32 + params.iter().map(|p| p.len() * 8 + 64).sum::<usize>());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let kind = model.kind().as_str().as_bytes();
    buf.extend_from_slice(&(kind.len() as u32).to_le_bytes());
    buf.extend_from_slice(kind);
    buf.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for ((name, values), dim) in names.iter().zip(&params).zip(&dims) {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(dim.len() as u32).to_le_bytes());
        for d in dim {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        for v in *values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf.extend_from_slice(&meta.epoch.to_le_bytes());
    buf.extend_from_slice(&meta.best_val_ssd.to_le_bytes());
    buf.extend_from_slice(&meta.seed.to_le_bytes());
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(format_err(format!(
                "truncated: needed {n} bytes at offset {}, file has {}",
                self.at,
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| format_err("non-UTF-8 string"))
    }
}

/// Load a checkpoint, verifying it against the standard graph of its kind.
///
/// When `expected_kind` is given, a checkpoint of any other kind is rejected
/// with a compatibility error; pass `None` to accept whatever is stored.
pub fn checkpoint_load(
    path: &Path,
    expected_kind: Option<ModelKind>,
) -> Result<(ModelGraph, CheckpointMeta)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        at: 0,
    };
    if r.take(4)? != MAGIC {
        return Err(format_err("bad magic, not a checkpoint file"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format_err(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let kind_str = r.string()?;
    let kind: ModelKind = kind_str
        .parse()
        .map_err(|_| format_err(format!("unknown model kind {kind_str:?}")))?;
    if let Some(expected) = expected_kind {
        if expected != kind {
            return Err(Error::ModelKindMismatch {
                stored: kind_str,
                requested: expected.as_str().to_string(),
            });
        }
    }

    let mut model = build_model(kind, 0);
    let names = model.param_names();
    let dims = model.param_dims();
    let count = r.u32()? as usize;
    if count != names.len() {
        return Err(format_err(format!(
            "parameter count {count} does not match the {} expected for {kind}",
            names.len()
        )));
    }
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (name, dim) in names.iter().zip(&dims) {
        let stored_name = r.string()?;
        if &stored_name != name {
            return Err(format_err(format!(
                "parameter {stored_name:?} does not match expected {name:?}"
            )));
        }
        let rank = r.u32()? as usize;
        if rank != dim.len() {
            return Err(format_err(format!("parameter {name}: rank {rank} != {}", dim.len())));
        }
        let mut stored_dim = Vec::with_capacity(rank);
        for _ in 0..rank {
            stored_dim.push(r.u64()?);
        }
        if &stored_dim != dim {
            return Err(format_err(format!(
                "parameter {name}: dims {stored_dim:?} != {dim:?}"
            )));
        }
        let len: u64 = dim.iter().product();
        let mut vals = Vec::with_capacity(len as usize);
        for _ in 0..len {
            vals.push(r.f64()?);
        }
        values.push(vals);
    }
    let meta = CheckpointMeta {
        epoch: r.u64()?,
        best_val_ssd: r.f64()?,
        seed: r.u64()?,
    };
    if r.at != bytes.len() {
        return Err(format_err(format!(
            "{} trailing bytes after metadata",
            bytes.len() - r.at
        )));
    }

    for (slot, vals) in model.params_mut().into_iter().zip(values) {
        slot.copy_from_slice(&vals);
    }
    Ok((model, meta))
}
