//! Readers for the subset of the WFDB format family this suite needs:
//! `.hea` text headers, `.dat` sample files in formats 212 and 16, and
//! MIT-format annotation files.
//!
//! Format 212 packs two 12-bit two's-complement samples into three bytes:
//! `s1 = b0 | (b1 & 0x0F) << 8` and `s2 = b2 | (b1 >> 4) << 8`. Format 16
//! is plain little-endian `i16`. Samples convert to physical units as
//! `(adu − baseline) / gain`. Annotation files are a stream of 2-byte
//! little-endian words holding a 6-bit type code and a 10-bit time delta,
//! with a handful of special codes that modify the following annotation
//! rather than standing alone.

use crate::error::{Error, Result};

/// Per-channel description from a header.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub file_name: String,
    /// Storage format code; 212 and 16 are supported.
    pub format: u32,
    /// ADC gain in adu per millivolt.
    pub gain: f64,
    /// ADC baseline in adu.
    pub baseline: i32,
    pub units: String,
}

/// Parsed record header.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub record: String,
    pub fs_hz: f64,
    pub samples_per_channel: usize,
    pub channels: Vec<ChannelSpec>,
}

/// WFDB default gain when a header omits it.
pub const DEFAULT_GAIN: f64 = 200.0;

fn parse_field<T: std::str::FromStr>(tok: &str, line_no: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Format {
        format: "hea",
        detail: format!("line {line_no}: cannot parse {what} from '{tok}'"),
    })
}

/// Parse a `.hea` header text.
///
/// The first non-comment line carries `name nsig fs nsamp`; each following
/// line describes one channel as `file format gain(baseline)/units …`.
/// Omitted gain defaults to 200 adu/mV and omitted baseline to 0.
pub fn parse_header(text: &str) -> Result<RecordHeader> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, first) = lines.next().ok_or(Error::Format {
        format: "hea",
        detail: "empty header".into(),
    })?;
    let toks: Vec<&str> = first.split_whitespace().collect();
    if toks.len() < 4 {
        return Err(Error::Format {
            format: "hea",
            detail: format!("line {line_no}: record line needs name, channels, fs, samples"),
        });
    }
    // Record name may carry a segment suffix ("name/n"); keep the name part.
    let record = toks[0].split('/').next().unwrap_or(toks[0]).to_string();
    let n_channels: usize = parse_field(toks[1], line_no, "channel count")?;
    // Sampling frequency may carry a counter spec ("250/cc"); keep the rate.
    let fs_tok = toks[2].split('/').next().unwrap_or(toks[2]);
    let fs_hz: f64 = parse_field(fs_tok, line_no, "sampling frequency")?;
    let samples_per_channel: usize = parse_field(toks[3], line_no, "sample count")?;
    if n_channels == 0 {
        return Err(Error::Format {
            format: "hea",
            detail: format!("line {line_no}: channel count must be at least 1"),
        });
    }
    if fs_hz <= 0.0 {
        return Err(Error::Format {
            format: "hea",
            detail: format!("line {line_no}: sampling frequency must be positive"),
        });
    }

    let mut channels = Vec::with_capacity(n_channels);
    for _ in 0..n_channels {
        let (line_no, line) = lines.next().ok_or(Error::Format {
            format: "hea",
            detail: format!("expected {n_channels} channel lines, found {}", channels.len()),
        })?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::Format {
                format: "hea",
                detail: format!("line {line_no}: channel line needs file and format"),
            });
        }
        // Format token may carry "xN", ":N", "+N" modifiers; parse the
        // leading integer.
        let fmt_digits: String = toks[1].chars().take_while(|c| c.is_ascii_digit()).collect();
        let format: u32 = parse_field(&fmt_digits, line_no, "format code")?;
        if format != 212 && format != 16 {
            return Err(Error::Format {
                format: "hea",
                detail: format!("line {line_no}: unsupported storage format {format}"),
            });
        }

        // Optional third token: gain(baseline)/units.
        let (gain, baseline, units) = match toks.get(2) {
            None => (DEFAULT_GAIN, 0, "mV".to_string()),
            Some(spec) => {
                let (gain_part, units) = match spec.split_once('/') {
                    Some((g, u)) => (g, u.to_string()),
                    None => (*spec, "mV".to_string()),
                };
                let (gain_str, baseline) = match gain_part.split_once('(') {
                    Some((g, rest)) => {
                        let b = rest.trim_end_matches(')');
                        (g, parse_field(b, line_no, "baseline")?)
                    }
                    None => (gain_part, 0),
                };
                let gain: f64 = parse_field(gain_str, line_no, "gain")?;
                let gain = if gain == 0.0 { DEFAULT_GAIN } else { gain };
                (gain, baseline, units)
            }
        };
        channels.push(ChannelSpec {
            file_name: toks[0].to_string(),
            format,
            gain,
            baseline,
            units,
        });
    }

    Ok(RecordHeader {
        record,
        fs_hz,
        samples_per_channel,
        channels,
    })
}

/// Decode a format-212 byte stream into `total` adu samples.
fn decode_212(bytes: &[u8], total: usize) -> Result<Vec<i32>> {
    let full_pairs = total / 2;
    let needed = full_pairs * 3 + if total % 2 == 1 { 2 } else { 0 };
    if bytes.len() < needed {
        return Err(Error::Format {
            format: "dat(212)",
            detail: format!("need {needed} bytes for {total} samples, have {}", bytes.len()),
        });
    }
    let sign12 = |v: i32| if v >= 2048 { v - 4096 } else { v };
    let mut out = Vec::with_capacity(total);
    for chunk in bytes[..full_pairs * 3].chunks_exact(3) {
        let b0 = chunk[0] as i32;
        let b1 = chunk[1] as i32;
        let b2 = chunk[2] as i32;
        out.push(sign12(b0 | (b1 & 0x0F) << 8));
        out.push(sign12(b2 | (b1 >> 4) << 8));
    }
    if total % 2 == 1 {
        // A trailing lone sample occupies the first two bytes of a final
        // triplet; its pair slot is ignored.
        let b0 = bytes[full_pairs * 3] as i32;
        let b1 = bytes[full_pairs * 3 + 1] as i32;
        out.push(sign12(b0 | (b1 & 0x0F) << 8));
    }
    Ok(out)
}

/// Decode little-endian 16-bit samples.
fn decode_16(bytes: &[u8], total: usize) -> Result<Vec<i32>> {
    if bytes.len() < total * 2 {
        return Err(Error::Format {
            format: "dat(16)",
            detail: format!("need {} bytes for {total} samples, have {}", total * 2, bytes.len()),
        });
    }
    Ok(bytes[..total * 2]
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as i32)
        .collect())
}

/// Read a `.dat` byte stream into per-channel physical signals (mV).
///
/// Channels are interleaved sample by sample in the file; all channels of
/// one file must share a format. Values convert as `(adu − baseline)/gain`.
pub fn read_samples(header: &RecordHeader, bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let n_ch = header.channels.len();
    let format = header.channels[0].format;
    if header.channels.iter().any(|c| c.format != format) {
        return Err(Error::Format {
            format: "dat",
            detail: "channels of one signal file must share a storage format".into(),
        });
    }
    let total = header.samples_per_channel * n_ch;
    let adu = match format {
        212 => decode_212(bytes, total)?,
        16 => decode_16(bytes, total)?,
        other => {
            return Err(Error::Format {
                format: "dat",
                detail: format!("unsupported storage format {other}"),
            })
        }
    };
    let mut out = vec![Vec::with_capacity(header.samples_per_channel); n_ch];
    for (i, &v) in adu.iter().enumerate() {
        let ch = &header.channels[i % n_ch];
        out[i % n_ch].push((v - ch.baseline) as f64 / ch.gain);
    }
    Ok(out)
}

/// One annotation: absolute sample index and type code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annotation {
    pub sample: u64,
    pub code: u8,
}

const CODE_SKIP: u8 = 59;
const CODE_NUM: u8 = 60;
const CODE_SUB: u8 = 61;
const CODE_CHN: u8 = 62;
const CODE_AUX: u8 = 63;

/// Parse an MIT-format annotation stream into absolute-time annotations.
///
/// Special codes (SKIP, NUM, SUB, CHN, AUX) are consumed as modifiers and
/// not emitted; every other code is passed through with its cumulative
/// sample index. The stream must end with the 0/0 terminator word.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    let mut at = 0usize;
    let mut time: i64 = 0;
    let mut pending_skip: i64 = 0;

    let next_word = |at: &mut usize| -> Result<u16> {
        if *at + 2 > bytes.len() {
            return Err(Error::Format {
                format: "annotation",
                detail: format!("truncated word at byte {at}", at = *at),
            });
        }
        let w = u16::from_le_bytes([bytes[*at], bytes[*at + 1]]);
        *at += 2;
        Ok(w)
    };

    loop {
        let w = next_word(&mut at)?;
        let code = (w >> 10) as u8;
        let delta = (w & 0x3FF) as i64;
        match code {
            0 if delta == 0 => return Ok(out),
            CODE_SKIP => {
                // Interval in the next two words, high half first; applies
                // to the next annotation's time.
                let hi = next_word(&mut at)? as i64;
                let lo = next_word(&mut at)? as i64;
                let mut interval = (hi << 16) | lo;
                // Sign-extend the 32-bit interval.
                if interval >= 1 << 31 {
                    interval -= 1 << 32;
                }
                pending_skip += interval;
            }
            CODE_NUM | CODE_SUB | CODE_CHN => {
                // Modifier fields for the previous annotation; opaque here.
            }
            CODE_AUX => {
                // Delta counts aux bytes, padded to an even length.
                let len = (delta as usize + 1) & !1;
                if at + len > bytes.len() {
                    return Err(Error::Format {
                        format: "annotation",
                        detail: format!("aux string of {len} bytes overruns the stream"),
                    });
                }
                at += len;
            }
            _ => {
                time += pending_skip + delta;
                pending_skip = 0;
                if time < 0 {
                    return Err(Error::Format {
                        format: "annotation",
                        detail: format!("annotation time went negative ({time})"),
                    });
                }
                out.push(Annotation {
                    sample: time as u64,
                    code,
                });
            }
        }
    }
}
