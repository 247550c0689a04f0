//! Benchmark CLI for ECG baseline-wander removal.
//!
//! Subcommands cover the whole pipeline: `prepare` builds beat datasets
//! (real WFDB records or synthetic), `train` fits a denoising model,
//! `evaluate` scores one method per beat, `compare` renders a multi-method
//! table with significance stars, `time` measures single-beat latency,
//! and `report` merges per-beat metric files produced by separate runs.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.
//! Failures print one machine-readable JSON line to stderr, for example
//! `{"error":"config","message":"invalid configuration: ..."}`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod methods;

use clap::Parser;

use blwfilter::error::Error;

/// Stable machine-readable code for each error variant.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::ShapeMismatch { .. } => "shape-mismatch",
        Error::UndefinedMetric { .. } => "undefined-metric",
        Error::InsufficientData { .. } => "insufficient-data",
        Error::NonFiniteGradient { .. } => "non-finite-gradient",
        Error::NonFiniteLoss { .. } => "non-finite-loss",
        Error::NonFinite { .. } => "non-finite",
        Error::Config(_) => "config",
        Error::Format { .. } => "format",
        Error::ModelKindMismatch { .. } => "model-kind-mismatch",
        Error::MissingRecord(_) => "missing-record",
        Error::Io { .. } => "io",
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// The one-line error report printed to stderr on failure.
pub fn error_line(e: &Error) -> String {
    format!(
        "{{\"error\":\"{}\",\"message\":\"{}\"}}",
        error_code(e),
        json_escape(&e.to_string())
    )
}

/// Parse and run the CLI; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            eprintln!(
                "{{\"error\":\"usage\",\"message\":\"{}\"}}",
                json_escape(&format!("{:?}", e.kind()))
            );
            return 2;
        }
    };
    match commands::dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}
