//! On-disk dataset container for clean/noisy beat pairs.
//!
//! The file layout is little-endian throughout and fully specified so other
//! tools can read it:
//!
//! ```text
//! magic    4 bytes  "DFDS"
//! version  u32      currently 1
//! seed     u64      generation seed, for provenance
//! count    u64      number of beat pair records
//! per record, 8228 bytes each:
//!   record id        16 bytes  ASCII name, zero padded on the right
//!   channel          u16
//!   beat_index       u32
//!   original_length  u32       samples before zero padding, at most 512
//!   split            u8        0 train, 1 validation, 2 test
//!   degenerate       u8        1 when the clean beat peak was zero
//!   alpha            f64       noise amplitude factor used at injection
//!   clean            512 x f64
//!   noisy            512 x f64
//! ```
//!
//! Loads are strict: wrong magic or version, a short file, trailing bytes,
//! an unknown split byte, or an over-long `original_length` all fail.

use std::fs;
use std::path::Path;

use crate::data::beats::{BeatSegment, Split, SplitCounts};
use crate::data::noise::BeatPair;
use crate::error::{Error, Result};
use crate::model::BEAT_LEN;

const MAGIC: &[u8; 4] = b"DFDS";
const VERSION: u32 = 1;
const NAME_BYTES: usize = 16;
const RECORD_BYTES: usize = NAME_BYTES + 2 + 4 + 4 + 1 + 1 + 8 + 2 * BEAT_LEN * 8;
const HEADER_BYTES: usize = 4 + 4 + 8 + 8;

/// A full prepared dataset: every pair, with split labels carried on the
/// clean beats.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub seed: u64,
    pub pairs: Vec<BeatPair>,
}

impl Dataset {
    /// Pairs belonging to one split, in stored order.
    pub fn split(&self, split: Split) -> Vec<&BeatPair> {
        self.pairs
            .iter()
            .filter(|p| p.clean.split == split)
            .collect()
    }

    pub fn split_counts(&self) -> SplitCounts {
        SplitCounts {
            train: self.split(Split::Train).len(),
            val: self.split(Split::Val).len(),
            test: self.split(Split::Test).len(),
        }
    }
}

fn format_err(detail: impl Into<String>) -> Error {
    Error::Format {
        format: "dataset",
        detail: detail.into(),
    }
}

fn split_byte(split: Split) -> u8 {
    match split {
        Split::Train => 0,
        Split::Val => 1,
        Split::Test => 2,
    }
}

fn split_from_byte(b: u8) -> Result<Split> {
    match b {
        0 => Ok(Split::Train),
        1 => Ok(Split::Val),
        2 => Ok(Split::Test),
        other => Err(format_err(format!("unknown split byte {other}"))),
    }
}

/// Serialize the dataset to `path`. Record names longer than 16 bytes or
/// containing non-ASCII characters are rejected.
pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    for p in &dataset.pairs {
        let name = &p.clean.record;
        if name.len() > NAME_BYTES || !name.is_ascii() {
            return Err(format_err(format!(
                "record name {name:?} does not fit 16 ASCII bytes"
            )));
        }
        debug_assert_eq!(p.clean.samples.len(), BEAT_LEN);
        debug_assert_eq!(p.noisy.len(), BEAT_LEN);
    }
    let mut buf = Vec::with_capacity(HEADER_BYTES + dataset.pairs.len() * RECORD_BYTES);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&dataset.seed.to_le_bytes());
    buf.extend_from_slice(&(dataset.pairs.len() as u64).to_le_bytes());
    for p in &dataset.pairs {
        let mut name = [0u8; NAME_BYTES];
        name[..p.clean.record.len()].copy_from_slice(p.clean.record.as_bytes());
        buf.extend_from_slice(&name);
        buf.extend_from_slice(&p.clean.channel.to_le_bytes());
        buf.extend_from_slice(&p.clean.beat_index.to_le_bytes());
        buf.extend_from_slice(&(p.clean.original_length as u32).to_le_bytes());
        buf.push(split_byte(p.clean.split));
        buf.push(u8::from(p.degenerate));
        buf.extend_from_slice(&p.alpha.to_le_bytes());
        for v in &p.clean.samples {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in &p.noisy {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
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

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
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
}

/// Load a dataset saved by [`save_dataset`], verifying the layout exactly.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        at: 0,
    };
    if r.take(4)? != MAGIC {
        return Err(format_err("bad magic, not a dataset file"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format_err(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let seed = r.u64()?;
    let count = r.u64()? as usize;
    let expected = HEADER_BYTES + count * RECORD_BYTES;
    if bytes.len() != expected {
        return Err(format_err(format!(
            "file is {} bytes but {count} records need exactly {expected}",
            bytes.len()
        )));
    }
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let name_raw = r.take(NAME_BYTES)?;
        let end = name_raw
            .iter()
            .position(|&b| b == 0)
            .unwrap_or(NAME_BYTES);
        if name_raw[end..].iter().any(|&b| b != 0) {
            return Err(format_err("record name has bytes after the zero padding"));
        }
        let record = std::str::from_utf8(&name_raw[..end])
            .ok()
            .filter(|s| s.is_ascii())
            .ok_or_else(|| format_err("record name is not ASCII"))?
            .to_string();
        let channel = r.u16()?;
        let beat_index = r.u32()?;
        let original_length = r.u32()? as usize;
        if original_length > BEAT_LEN {
            return Err(format_err(format!(
                "original_length {original_length} exceeds the {BEAT_LEN}-sample window"
            )));
        }
        let split = split_from_byte(r.take(1)?[0])?;
        let degenerate = match r.take(1)?[0] {
            0 => false,
            1 => true,
            other => return Err(format_err(format!("unknown degenerate byte {other}"))),
        };
        let alpha = r.f64()?;
        let mut clean = Vec::with_capacity(BEAT_LEN);
        for _ in 0..BEAT_LEN {
            clean.push(r.f64()?);
        }
        let mut noisy = Vec::with_capacity(BEAT_LEN);
        for _ in 0..BEAT_LEN {
            noisy.push(r.f64()?);
        }
        pairs.push(BeatPair {
            clean: BeatSegment {
                samples: clean,
                original_length,
                record,
                channel,
                beat_index,
                split,
            },
            noisy,
            alpha,
            degenerate,
        });
    }
    Ok(Dataset { seed, pairs })
}
