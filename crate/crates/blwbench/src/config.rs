//! Run configuration: defaults, the flat `key = value` config file, and
//! the header echo that stamps every report.
//!
//! Precedence is defaults, then the `--config` file, then explicit flags.
//! Every field is echoed into the header of whatever a command writes, so
//! a report can always be traced back to the exact settings that made it.

use std::fmt;
use std::path::Path;

use blwfilter::error::{Error, Result};
use blwfilter::metrics::PrdForm;

/// Settings shared by every subcommand.
///
/// `deterministic` is echoed for provenance: all computation in the
/// benchmark is single-threaded and seeded, so reruns with equal flags
/// produce byte-identical datasets, checkpoints, and tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Default trained-model choice for commands that take one.
    pub model: String,
    pub batch_size: usize,
    pub initial_lr: f64,
    /// Weight of the worst-sample term in the training loss.
    pub lambda: f64,
    pub max_epochs: u64,
    pub seed: u64,
    pub prd_form: PrdForm,
    /// Score only the first `original_length` samples of each beat.
    pub restrict_to_original: bool,
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "deepfilter".to_string(),
            batch_size: 32,
            initial_lr: 1e-3,
            lambda: blwfilter::loss::DEFAULT_LAMBDA,
            max_epochs: 100_000,
            seed: 42,
            prd_form: PrdForm::Printed,
            restrict_to_original: false,
            deterministic: true,
        }
    }
}

/// Name a PRD form the way config files and headers spell it.
pub fn prd_form_name(form: PrdForm) -> &'static str {
    match form {
        PrdForm::Printed => "printed",
        PrdForm::Conventional => "conventional",
    }
}

/// Parse the config-file / flag spelling of a PRD form.
pub fn parse_prd_form(s: &str) -> Result<PrdForm> {
    match s {
        "printed" => Ok(PrdForm::Printed),
        "conventional" => Ok(PrdForm::Conventional),
        other => Err(Error::Config(format!(
            "unknown prd_form {other:?}, expected printed or conventional"
        ))),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!(
            "config key {key} expects true or false, got {other:?}"
        ))),
    }
}

fn parse_num<T>(key: &str, value: &str) -> Result<T>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("config key {key}: cannot parse {value:?}: {e}")))
}

impl RunConfig {
    /// Apply one flat config file on top of `self`.
    ///
    /// Format: one `key = value` pair per line; blank lines and lines
    /// starting with `#` are skipped. Unknown keys and malformed lines are
    /// errors rather than warnings so a typo cannot silently fall back to
    /// a default.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "config line {}: expected key = value, got {line:?}",
                    no + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "model" => self.model = value.to_string(),
                "batch_size" => self.batch_size = parse_num(key, value)?,
                "initial_lr" => self.initial_lr = parse_num(key, value)?,
                "lambda" => self.lambda = parse_num(key, value)?,
                "max_epochs" => self.max_epochs = parse_num(key, value)?,
                "seed" => self.seed = parse_num(key, value)?,
                "prd_form" => self.prd_form = parse_prd_form(value)?,
                "restrict_to_original" => self.restrict_to_original = parse_bool(key, value)?,
                "deterministic" => self.deterministic = parse_bool(key, value)?,
                other => {
                    return Err(Error::Config(format!(
                        "config line {}: unknown key {other:?}",
                        no + 1
                    )))
                }
            }
        }
        Ok(())
    }

    /// Load and apply a config file from disk.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_file_text(&text)
    }

    /// All settings as ordered key/value pairs for report headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("model".into(), self.model.clone()),
            ("batch_size".into(), self.batch_size.to_string()),
            ("initial_lr".into(), format!("{:e}", self.initial_lr)),
            ("lambda".into(), format!("{}", self.lambda)),
            ("max_epochs".into(), self.max_epochs.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("prd_form".into(), prd_form_name(self.prd_form).into()),
            (
                "restrict_to_original".into(),
                self.restrict_to_original.to_string(),
            ),
            ("deterministic".into(), self.deterministic.to_string()),
        ]
    }
}
