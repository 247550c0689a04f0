//! Method specs: turning `--model` flags and `name=checkpoint` strings
//! into runnable denoisers, plus file hashing for provenance headers.

use std::path::{Path, PathBuf};

use blwfilter::checkpoint::checkpoint_load;
use blwfilter::error::{Error, Result};
use blwfilter::eval::Denoiser;
use blwfilter::filters::fir::{design_fir_highpass, FirParams};
use blwfilter::filters::iir::{design_iir_highpass, IirParams};
use blwfilter::filters::zero_phase::ClassicalFilter;
use blwfilter::model::ModelKind;
use sha2::{Digest, Sha256};

/// One denoising method as named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSource {
    /// A trained model restored from a checkpoint file.
    Model { kind: ModelKind, checkpoint: PathBuf },
    Fir,
    Iir,
    Identity,
    Oracle,
}

impl MethodSource {
    /// The label this method reports itself under in tables.
    pub fn label(&self) -> &'static str {
        match self {
            MethodSource::Model { kind, .. } => kind.as_str(),
            MethodSource::Fir => "fir",
            MethodSource::Iir => "iir",
            MethodSource::Identity => "identity",
            MethodSource::Oracle => "oracle",
        }
    }

    /// Checkpoint path, for methods that have one.
    pub fn checkpoint(&self) -> Option<&Path> {
        match self {
            MethodSource::Model { checkpoint, .. } => Some(checkpoint),
            _ => None,
        }
    }
}

/// Build a method from a bare name plus an optional `--checkpoint` flag.
///
/// Trained-model names require the checkpoint; the classical and
/// reference methods refuse one, so a stray flag cannot be silently
/// ignored.
pub fn method_from_name(name: &str, checkpoint: Option<PathBuf>) -> Result<MethodSource> {
    if let Ok(kind) = name.parse::<ModelKind>() {
        let Some(checkpoint) = checkpoint else {
            return Err(Error::Config(format!(
                "model {name} needs --checkpoint <file> with trained parameters"
            )));
        };
        return Ok(MethodSource::Model { kind, checkpoint });
    }
    let source = match name {
        "fir" => MethodSource::Fir,
        "iir" => MethodSource::Iir,
        "identity" => MethodSource::Identity,
        "oracle" => MethodSource::Oracle,
        other => {
            return Err(Error::Config(format!(
                "unknown method {other:?}; expected one of deepfilter, vanilla-l, \
                 vanilla-nl, multibranch, fir, iir, identity, oracle"
            )))
        }
    };
    if let Some(path) = checkpoint {
        return Err(Error::Config(format!(
            "method {name} takes no checkpoint, but {} was given",
            path.display()
        )));
    }
    Ok(source)
}

/// Parse one entry of a `--methods` list: `fir` or `deepfilter=ckpt.dfck`.
pub fn parse_method_spec(spec: &str) -> Result<MethodSource> {
    match spec.split_once('=') {
        Some((name, path)) if !path.is_empty() => {
            method_from_name(name.trim(), Some(PathBuf::from(path)))
        }
        Some((name, _)) => Err(Error::Config(format!(
            "method spec {name}= names an empty checkpoint path"
        ))),
        None => method_from_name(spec.trim(), None),
    }
}

/// Instantiate the denoiser a method names.
pub fn build_denoiser(source: &MethodSource) -> Result<Denoiser> {
    Ok(match source {
        MethodSource::Model { kind, checkpoint } => {
            let (model, _meta) = checkpoint_load(checkpoint, Some(*kind))?;
            Denoiser::Model(model)
        }
        MethodSource::Fir => {
            Denoiser::Classical(ClassicalFilter::Fir(design_fir_highpass(&FirParams::default())?))
        }
        MethodSource::Iir => {
            Denoiser::Classical(ClassicalFilter::Iir(design_iir_highpass(&IirParams::default())?))
        }
        MethodSource::Identity => Denoiser::Identity,
        MethodSource::Oracle => Denoiser::Oracle,
    })
}

/// SHA-256 of a file, as lowercase hex. Stamped into report headers so a
/// table is traceable to the exact dataset and checkpoint bytes.
pub fn file_sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

/// Format `path (sha256:…)` for a header value.
pub fn path_with_sha(path: &Path) -> Result<String> {
    Ok(format!("{} (sha256:{})", path.display(), file_sha256_hex(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_names_parse_to_methods() {
        assert_eq!(parse_method_spec("fir").unwrap(), MethodSource::Fir);
        assert_eq!(parse_method_spec("iir").unwrap(), MethodSource::Iir);
        assert_eq!(parse_method_spec("identity").unwrap(), MethodSource::Identity);
        assert_eq!(parse_method_spec("oracle").unwrap(), MethodSource::Oracle);
    }

    #[test]
    fn model_specs_carry_their_checkpoint() {
        let m = parse_method_spec("deepfilter=weights.dfck").unwrap();
        assert_eq!(
            m,
            MethodSource::Model {
                kind: ModelKind::DeepFilter,
                checkpoint: PathBuf::from("weights.dfck"),
            }
        );
        assert_eq!(m.label(), "deepfilter");
    }

    #[test]
    fn model_without_checkpoint_is_rejected() {
        assert!(parse_method_spec("vanilla-l").is_err());
        assert!(parse_method_spec("deepfilter=").is_err());
    }

    #[test]
    fn classical_with_checkpoint_is_rejected() {
        assert!(parse_method_spec("fir=weights.dfck").is_err());
        assert!(method_from_name("identity", Some(PathBuf::from("x"))).is_err());
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(parse_method_spec("wavelet").is_err());
    }

    #[test]
    fn sha256_matches_a_known_vector() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, b"abc").unwrap();
        assert_eq!(
            file_sha256_hex(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
