//! Subcommand implementations.
//!
//! Each command resolves its configuration (defaults, then the config
//! file, then flags), does its work through the library, writes outputs
//! with full provenance headers, and prints a short machine-readable
//! summary to stdout. All paths are seeded and single-threaded, so equal
//! invocations produce byte-identical output files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use blwfilter::data::beats::Split;
use blwfilter::data::dataset::{load_dataset, save_dataset, Dataset};
use blwfilter::data::noise::BeatPair;
use blwfilter::data::prepare::{prepare_dataset, PrepareConfig};
use blwfilter::data::synth::{build_synthetic_corpus_with, SynthCorpusParams};
use blwfilter::error::{Error, Result};
use blwfilter::eval::{beat_id, evaluate_method, time_denoiser, EvalOptions};
use blwfilter::model::{build_model, ModelKind};
use blwfilter::report::{
    aggregate_summary, parse_beat_metrics_csv, render_beat_metrics_csv, render_csv,
    render_markdown, MethodResult, REFERENCE_ROWS,
};
use blwfilter::train::{render_train_log_csv, train_model_with_progress, TrainConfig};
use std::io::Write as _;

use crate::cli::{
    Cmd, CommonArgs, CompareArgs, EvaluateArgs, PrepareArgs, ReportArgs, SplitArg, TimeArgs,
    TrainArgs,
};
use crate::config::RunConfig;
use crate::methods::{
    build_denoiser, method_from_name, parse_method_spec, path_with_sha, MethodSource,
};

/// Run one parsed subcommand.
pub fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Prepare(args) => cmd_prepare(&args),
        Cmd::Train(args) => cmd_train(&args),
        Cmd::Evaluate(args) => cmd_evaluate(&args),
        Cmd::Compare(args) => cmd_compare(&args),
        Cmd::Time(args) => cmd_time(&args),
        Cmd::Report(args) => cmd_report(&args),
    }
}

fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn select_pairs<'a>(ds: &'a Dataset, split: SplitArg) -> Vec<&'a BeatPair> {
    match split.split() {
        Some(s) => ds.split(s),
        None => ds.pairs.iter().collect(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `BASE` plus an extension, without clobbering dots already in `BASE`.
fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_prepare(args: &PrepareArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let ds = if args.synthetic {
        if !args.record_names.is_empty()
            || !args.test_names.is_empty()
            || args.noise_record.is_some()
            || args.annotation_ext.is_some()
        {
            return Err(Error::Config(
                "--record-names, --test-names, --noise-record, and --annotation-ext \
                 apply only to --data-dir mode"
                    .into(),
            ));
        }
        let mut p = SynthCorpusParams::default();
        if let Some(n) = args.synth_records {
            p.records = n;
        }
        if let Some(n) = args.synth_beats {
            p.beats_per_record = n;
        }
        if let Some(n) = args.synth_test_records {
            p.test_records = n;
        }
        build_synthetic_corpus_with(cfg.seed, &p)?
    } else {
        let Some(dir) = &args.data_dir else {
            return Err(Error::Config(
                "prepare needs --synthetic or --data-dir <dir>".into(),
            ));
        };
        if args.synth_records.is_some()
            || args.synth_beats.is_some()
            || args.synth_test_records.is_some()
        {
            return Err(Error::Config(
                "--synth-records, --synth-beats, and --synth-test-records apply only \
                 to --synthetic mode"
                    .into(),
            ));
        }
        let mut p = PrepareConfig {
            data_dir: dir.clone(),
            seed: cfg.seed,
            scale_mode: args.scale_mode.into(),
            ..PrepareConfig::default()
        };
        if !args.record_names.is_empty() {
            p.record_names = args.record_names.clone();
        }
        if !args.test_names.is_empty() {
            p.test_records = args.test_names.clone();
        }
        if let Some(n) = &args.noise_record {
            p.noise_record = n.clone();
        }
        if let Some(e) = &args.annotation_ext {
            p.annotation_ext = e.clone();
        }
        prepare_dataset(&p)?
    };
    save_dataset(&ds, &args.out)?;
    let counts = ds.split_counts();
    let degenerate = ds.pairs.iter().filter(|p| p.degenerate).count();
    println!("wrote {}", path_with_sha(&args.out)?);
    println!(
        "pairs={} train={} val={} test={} degenerate={} seed={}",
        ds.pairs.len(),
        counts.train,
        counts.val,
        counts.test,
        degenerate,
        ds.seed
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(m) = &args.model {
        cfg.model = m.clone();
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.initial_lr {
        cfg.initial_lr = v;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.max_epochs {
        cfg.max_epochs = v;
    }
    let kind: ModelKind = cfg.model.parse()?;
    let ds = load_dataset(&args.dataset)?;

    for (k, v) in cfg.echo() {
        println!("{k}={v}");
    }
    println!("dataset={}", path_with_sha(&args.dataset)?);

    let mut model = build_model(kind, cfg.seed);
    let tc = TrainConfig {
        batch_size: cfg.batch_size,
        initial_lr: cfg.initial_lr,
        lambda: cfg.lambda,
        max_epochs: cfg.max_epochs,
        seed: cfg.seed,
    };
    // Stream each epoch as it finishes; a run can take an hour, and stdout
    // is block-buffered when redirected to a file.
    let summary = train_model_with_progress(&mut model, &ds, &tc, Some(&args.out), |e| {
        println!(
            "epoch={} train_loss={:e} val_ssd={:e} lr={:e} saved={}",
            e.epoch, e.train_loss, e.val_metric, e.learning_rate, e.saved
        );
        let _ = std::io::stdout().flush();
    })?;

    println!(
        "best_epoch={} best_val_ssd={:e} epochs_run={} stopped_early={}",
        summary.best_epoch, summary.best_val_metric, summary.epochs_run, summary.stopped_early
    );
    if let Some(log_path) = &args.log {
        let mut text = String::new();
        for (k, v) in cfg.echo() {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        text.push_str(&render_train_log_csv(&summary.log));
        write_text(log_path, &text)?;
        println!("wrote log {}", log_path.display());
    }
    println!("wrote checkpoint {}", path_with_sha(&args.out)?);
    Ok(())
}

fn eval_options(cfg: &RunConfig) -> EvalOptions {
    EvalOptions {
        prd_form: cfg.prd_form,
        batch_size: cfg.batch_size,
        restrict_to_original: cfg.restrict_to_original,
    }
}

fn nonempty_pairs<'a>(
    ds: &'a Dataset,
    split: SplitArg,
    dataset_path: &Path,
) -> Result<Vec<&'a BeatPair>> {
    let pairs = select_pairs(ds, split);
    if pairs.is_empty() {
        return Err(Error::Config(format!(
            "split {} of {} holds no beats",
            split.name(),
            dataset_path.display()
        )));
    }
    Ok(pairs)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(f) = args.prd_form {
        cfg.prd_form = f.into();
    }
    if args.restrict {
        cfg.restrict_to_original = true;
    }
    let name = args.model.clone().unwrap_or_else(|| cfg.model.clone());
    let source = method_from_name(&name, args.checkpoint.clone())?;
    cfg.model = source.label().to_string();

    let ds = load_dataset(&args.dataset)?;
    let pairs = nonempty_pairs(&ds, args.split, &args.dataset)?;
    let denoiser = build_denoiser(&source)?;
    let result = evaluate_method(&denoiser, &pairs, &eval_options(&cfg))?;

    let mut header: Vec<(String, String)> = vec![
        ("command".into(), "evaluate".into()),
        ("dataset".into(), path_with_sha(&args.dataset)?),
        ("split".into(), args.split.name().into()),
    ];
    if let Some(ck) = source.checkpoint() {
        header.push(("checkpoint".into(), path_with_sha(ck)?));
    }
    header.extend(cfg.echo());
    write_text(&args.out, &render_beat_metrics_csv(&result, &header))?;

    let summary = aggregate_summary(std::slice::from_ref(&result), &result.method)?;
    let row = &summary.methods[0];
    println!(
        "method={} beats={} ssd_mean={:e} ssd_std={:e} mad_mean={:e} prd_mean={:e} \
         prd_undefined={} cos_sim_x100_mean={:e} cos_undefined={}",
        row.method,
        row.beats,
        row.ssd.mean,
        row.ssd.std,
        row.mad.mean,
        row.prd.mean,
        row.prd.undefined,
        row.cos_sim_x100.mean,
        row.cos_sim_x100.undefined
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Default proposed method: `deepfilter` when present, otherwise the
/// first method given.
fn default_proposed(labels: &[&str]) -> String {
    if labels.contains(&"deepfilter") {
        "deepfilter".to_string()
    } else {
        labels[0].to_string()
    }
}

fn reject_duplicate_methods(labels: &[&str]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(*l) {
            return Err(Error::Config(format!(
                "method {l} appears more than once; each method can appear only once"
            )));
        }
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(f) = args.prd_form {
        cfg.prd_form = f.into();
    }
    if args.restrict {
        cfg.restrict_to_original = true;
    }
    if args.methods.len() < 2 {
        return Err(Error::Config(
            "compare needs at least two methods".into(),
        ));
    }
    let sources: Vec<MethodSource> = args
        .methods
        .iter()
        .map(|s| parse_method_spec(s))
        .collect::<Result<_>>()?;
    let labels: Vec<&str> = sources.iter().map(|s| s.label()).collect();
    reject_duplicate_methods(&labels)?;
    let proposed = args
        .proposed
        .clone()
        .unwrap_or_else(|| default_proposed(&labels));
    cfg.model = proposed.clone();

    let ds = load_dataset(&args.dataset)?;
    let pairs = nonempty_pairs(&ds, args.split, &args.dataset)?;
    let opts = eval_options(&cfg);
    let mut results = Vec::with_capacity(sources.len());
    for source in &sources {
        let denoiser = build_denoiser(source)?;
        results.push(evaluate_method(&denoiser, &pairs, &opts)?);
    }
    let summary = aggregate_summary(&results, &proposed)?;

    let mut header: Vec<(String, String)> = vec![
        ("command".into(), "compare".into()),
        ("dataset".into(), path_with_sha(&args.dataset)?),
        ("split".into(), args.split.name().into()),
        ("methods".into(), labels.join(",")),
        ("proposed".into(), proposed.clone()),
    ];
    for source in &sources {
        if let Some(ck) = source.checkpoint() {
            header.push((format!("checkpoint_{}", source.label()), path_with_sha(ck)?));
        }
    }
    header.extend(cfg.echo());

    let csv_path = with_suffix(&args.out, ".csv");
    let md_path = with_suffix(&args.out, ".md");
    write_text(&csv_path, &render_csv(&summary, &REFERENCE_ROWS, &header))?;
    let md = render_markdown(&summary, &REFERENCE_ROWS, &header);
    write_text(&md_path, &md)?;
    print!("{md}");
    println!("wrote {}", csv_path.display());
    println!("wrote {}", md_path.display());
    Ok(())
}

fn cmd_time(args: &TimeArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let name = args.model.clone().unwrap_or_else(|| cfg.model.clone());
    let source = method_from_name(&name, args.checkpoint.clone())?;
    let denoiser = build_denoiser(&source)?;

    let beat: BeatPair = match &args.dataset {
        Some(path) => {
            let ds = load_dataset(path)?;
            let test = ds.split(Split::Test);
            match test.first() {
                Some(p) => (*p).clone(),
                None => ds
                    .pairs
                    .first()
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("{} holds no beats", path.display())))?,
            }
        }
        None => {
            let corpus = SynthCorpusParams {
                records: 1,
                beats_per_record: 1,
                test_records: 1,
                noise_len: 8192,
            };
            let ds = build_synthetic_corpus_with(cfg.seed, &corpus)?;
            ds.pairs.into_iter().next().expect("one-beat corpus")
        }
    };

    let stats = time_denoiser(&denoiser, &beat, args.runs, args.warmup)?;
    let line = format!(
        "method={} median_ms={:.6} p95_ms={:.6} runs={} warmup={} beat={}",
        source.label(),
        stats.median_ms,
        stats.p95_ms,
        stats.runs,
        args.warmup,
        beat_id(&beat.clean)
    );
    println!("{line}");
    if let Some(out) = &args.out {
        write_text(out, &format!("{line}\n"))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

/// Leading `# key: value` header pairs of a metrics CSV.
fn csv_header_pairs(text: &str) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            break;
        };
        if let Some((k, v)) = rest.split_once(": ") {
            pairs.push((k.to_string(), v.to_string()));
        }
    }
    pairs
}

fn header_value<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let mut results: Vec<MethodResult> = Vec::with_capacity(args.inputs.len());
    let mut input_headers = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut result = parse_beat_metrics_csv(&text)?;
        // Merged inputs may list beats in any order; a canonical sort keeps
        // the per-beat pairing aligned across methods.
        result.beats.sort_by(|a, b| a.beat_id.cmp(&b.beat_id));
        input_headers.push(csv_header_pairs(&text));
        results.push(result);
    }
    let labels: Vec<&str> = results.iter().map(|r| r.method.as_str()).collect();
    reject_duplicate_methods(&labels)?;

    let prd_forms: BTreeSet<&str> = input_headers
        .iter()
        .filter_map(|h| header_value(h, "prd_form"))
        .collect();
    if prd_forms.len() > 1 {
        return Err(Error::Config(format!(
            "inputs disagree on prd_form: {:?}; rerun evaluations with one form",
            prd_forms.into_iter().collect::<Vec<_>>()
        )));
    }

    let proposed = args
        .proposed
        .clone()
        .unwrap_or_else(|| default_proposed(&labels));
    let summary = aggregate_summary(&results, &proposed)?;

    let mut header: Vec<(String, String)> = vec![
        ("command".into(), "report".into()),
        ("proposed".into(), proposed.clone()),
    ];
    if let Some(form) = prd_forms.into_iter().next() {
        header.push(("prd_form".into(), form.to_string()));
    }
    for (path, (pairs, result)) in args
        .inputs
        .iter()
        .zip(input_headers.iter().zip(results.iter()))
    {
        header.push((format!("input_{}", result.method), path_with_sha(path)?));
        let seed = header_value(pairs, "seed").unwrap_or("unknown");
        header.push((format!("seed_{}", result.method), seed.to_string()));
    }

    let csv_path = with_suffix(&args.out, ".csv");
    let md_path = with_suffix(&args.out, ".md");
    write_text(&csv_path, &render_csv(&summary, &REFERENCE_ROWS, &header))?;
    let md = render_markdown(&summary, &REFERENCE_ROWS, &header);
    write_text(&md_path, &md)?;
    print!("{md}");
    println!("wrote {}", csv_path.display());
    println!("wrote {}", md_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_append_rather_than_replace() {
        assert_eq!(
            with_suffix(Path::new("out/report.v2"), ".csv"),
            PathBuf::from("out/report.v2.csv")
        );
    }

    #[test]
    fn header_scan_stops_at_the_column_row() {
        let pairs = csv_header_pairs("# a: 1\n# b: two words\nbeat_id,ssd\n# c: 3\n");
        assert_eq!(
            pairs,
            vec![
                ("a".to_string(), "1".to_string()),
                ("b".to_string(), "two words".to_string())
            ]
        );
    }

    #[test]
    fn duplicate_methods_are_rejected() {
        assert!(reject_duplicate_methods(&["fir", "iir"]).is_ok());
        assert!(reject_duplicate_methods(&["fir", "fir"]).is_err());
    }

    #[test]
    fn proposed_defaults_to_deepfilter_when_present() {
        assert_eq!(default_proposed(&["fir", "deepfilter"]), "deepfilter");
        assert_eq!(default_proposed(&["fir", "iir"]), "fir");
    }
}
