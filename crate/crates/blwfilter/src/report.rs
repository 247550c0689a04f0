//! Aggregation of per-beat metrics into a cross-method comparison table,
//! with serialization to CSV and Markdown.
//!
//! Rows show mean ± population standard deviation per metric, cosine
//! similarity scaled by 100. Each non-reference method is compared to the
//! designated proposed method with a two-sided Wilcoxon signed-rank test
//! per metric; cells earn a `*` at p < 0.01. Published results from other
//! work can be appended as reference rows, labeled as reported rather than
//! reproduced.

use crate::error::{Error, Result};
use crate::metrics::{mean, population_std, MetricsRecord};
use crate::stats::wilcoxon_signed_rank;

/// Two-sided significance threshold for the comparison stars.
pub const SIGNIFICANCE_P: f64 = 0.01;

/// Table header shared by the CSV and Markdown renderings.
pub const TABLE_COLUMNS: [&str; 6] = [
    "Method",
    "SSD (au)",
    "MAD (au)",
    "PRD (%)",
    "Cosine Sim ×100 (%)",
    "p vs proposed (SSD)",
];

/// Metrics for one identified beat.
#[derive(Debug, Clone)]
pub struct BeatMetrics {
    /// Stable beat identity, e.g. `record:channel:index`. Aggregation
    /// requires every method to carry the identical identity sequence.
    pub beat_id: String,
    pub metrics: MetricsRecord,
}

/// All per-beat results for one method.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: String,
    pub beats: Vec<BeatMetrics>,
}

/// Mean/std aggregate of one metric for one method.
#[derive(Debug, Clone, Copy)]
pub struct MetricAggregate {
    pub mean: f64,
    pub std: f64,
    /// Beats excluded because the metric was undefined for them.
    pub undefined: usize,
    /// Two-sided Wilcoxon p versus the proposed method; `None` for the
    /// proposed method itself or when too few non-zero differences exist.
    pub p_vs_proposed: Option<f64>,
}

impl MetricAggregate {
    /// Whether the difference from the proposed method is significant.
    /// `None` when no p-value exists.
    pub fn significant(&self) -> Option<bool> {
        self.p_vs_proposed.map(|p| p < SIGNIFICANCE_P)
    }
}

/// One method's aggregated row.
#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: String,
    pub beats: usize,
    pub ssd: MetricAggregate,
    pub mad: MetricAggregate,
    pub prd: MetricAggregate,
    /// Cosine similarity scaled by 100, as reported.
    pub cos_sim_x100: MetricAggregate,
}

/// The full comparison: one row per evaluated method.
#[derive(Debug, Clone)]
pub struct ComparisonSummary {
    /// Name of the method the p-values compare against.
    pub proposed: String,
    pub methods: Vec<MethodSummary>,
}

/// A published result carried for context, not measured by this suite.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceRow {
    pub method: &'static str,
    pub ssd: (f64, f64),
    pub mad: (f64, f64),
    pub prd: (f64, f64),
    pub cos_sim_x100: (f64, f64),
}

/// Published comparison rows (reported values, not reproduced here):
/// a recurrent denoiser, a convolutional denoising autoencoder, and the
/// multipath model's originally reported result.
pub const REFERENCE_ROWS: [ReferenceRow; 3] = [
    ReferenceRow {
        method: "DRNN",
        ssd: (5.85, 8.93),
        mad: (0.44, 0.30),
        prd: (49.91, 26.92),
        cos_sim_x100: (89.48, 10.28),
    },
    ReferenceRow {
        method: "FCN-DAE",
        ssd: (6.79, 8.29),
        mad: (0.48, 0.31),
        prd: (62.18, 34.54),
        cos_sim_x100: (83.27, 16.58),
    },
    ReferenceRow {
        method: "deepfilter-original",
        ssd: (4.29, 6.35),
        mad: (0.34, 0.25),
        prd: (45.35, 29.69),
        cos_sim_x100: (91.46, 8.61),
    },
];

/// Marker appended to reference-row method names in rendered tables.
pub const REFERENCE_LABEL: &str = "paper-reported, not reproduced";

fn aggregate_always_defined(values: &[f64], p: Option<f64>) -> MetricAggregate {
    MetricAggregate {
        mean: mean(values),
        std: population_std(values),
        undefined: 0,
        p_vs_proposed: p,
    }
}

/// Paired Wilcoxon p-value, with insufficient data collapsed to `None`.
fn paired_p(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    match wilcoxon_signed_rank(a, b) {
        Ok(p) => Ok(Some(p)),
        Err(Error::InsufficientData { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Defined-value pairs of an optional metric across two methods, keeping
/// only beats where both sides are defined.
fn defined_pairs(
    a: &[BeatMetrics],
    b: &[BeatMetrics],
    get: impl Fn(&MetricsRecord) -> Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (ba, bb) in a.iter().zip(b.iter()) {
        if let (Some(x), Some(y)) = (get(&ba.metrics), get(&bb.metrics)) {
            xs.push(x);
            ys.push(y);
        }
    }
    (xs, ys)
}

/// Aggregate per-method per-beat metrics into the comparison table.
///
/// Every method must carry the identical beat-identity sequence (same
/// beats, same order); `proposed` names the method the p-values compare
/// against. Undefined PRD or cosine values are excluded from their
/// aggregates and counted.
pub fn aggregate_summary(methods: &[MethodResult], proposed: &str) -> Result<ComparisonSummary> {
    if methods.is_empty() {
        return Err(Error::Config("no methods to aggregate".into()));
    }
    let reference = &methods[0];
    if reference.beats.is_empty() {
        return Err(Error::Config("no beats to aggregate".into()));
    }
    for m in methods.iter().skip(1) {
        if m.beats.len() != reference.beats.len() {
            return Err(Error::ShapeMismatch {
                context: "aggregate_summary",
                expected: format!("{} beats as in '{}'", reference.beats.len(), reference.method),
                got: format!("{} beats in '{}'", m.beats.len(), m.method),
            });
        }
        for (i, (ra, rb)) in reference.beats.iter().zip(m.beats.iter()).enumerate() {
            if ra.beat_id != rb.beat_id {
                return Err(Error::ShapeMismatch {
                    context: "aggregate_summary",
                    expected: format!("beat '{}' at index {i} as in '{}'", ra.beat_id, reference.method),
                    got: format!("beat '{}' in '{}'", rb.beat_id, m.method),
                });
            }
        }
    }
    let prop = methods
        .iter()
        .find(|m| m.method == proposed)
        .ok_or_else(|| {
            let names: Vec<&str> = methods.iter().map(|m| m.method.as_str()).collect();
            Error::Config(format!(
                "proposed method '{proposed}' not among evaluated methods {names:?}"
            ))
        })?;

    let mut rows = Vec::with_capacity(methods.len());
    for m in methods {
        let is_proposed = m.method == prop.method;

        let ssd: Vec<f64> = m.beats.iter().map(|b| b.metrics.ssd).collect();
        let mad: Vec<f64> = m.beats.iter().map(|b| b.metrics.mad).collect();
        let prd: Vec<f64> = m.beats.iter().filter_map(|b| b.metrics.prd).collect();
        let cos: Vec<f64> = m
            .beats
            .iter()
            .filter_map(|b| b.metrics.cos_sim.map(|c| c * 100.0))
            .collect();

        let (p_ssd, p_mad, p_prd, p_cos) = if is_proposed {
            (None, None, None, None)
        } else {
            let ssd_prop: Vec<f64> = prop.beats.iter().map(|b| b.metrics.ssd).collect();
            let mad_prop: Vec<f64> = prop.beats.iter().map(|b| b.metrics.mad).collect();
            let (prd_m, prd_p) = defined_pairs(&m.beats, &prop.beats, |r| r.prd);
            let (cos_m, cos_p) = defined_pairs(&m.beats, &prop.beats, |r| r.cos_sim);
            (
                paired_p(&ssd, &ssd_prop)?,
                paired_p(&mad, &mad_prop)?,
                paired_p(&prd_m, &prd_p)?,
                paired_p(&cos_m, &cos_p)?,
            )
        };

        let n = m.beats.len();
        rows.push(MethodSummary {
            method: m.method.clone(),
            beats: n,
            ssd: aggregate_always_defined(&ssd, p_ssd),
            mad: aggregate_always_defined(&mad, p_mad),
            prd: MetricAggregate {
                mean: mean(&prd),
                std: population_std(&prd),
                undefined: n - prd.len(),
                p_vs_proposed: p_prd,
            },
            cos_sim_x100: MetricAggregate {
                mean: mean(&cos),
                std: population_std(&cos),
                undefined: n - cos.len(),
                p_vs_proposed: p_cos,
            },
        });
    }

    Ok(ComparisonSummary {
        proposed: prop.method.clone(),
        methods: rows,
    })
}

fn cell(agg: &MetricAggregate) -> String {
    let star = match agg.significant() {
        Some(true) => "*",
        _ => "",
    };
    format!("{:.2} ± {:.2}{star}", agg.mean, agg.std)
}

fn ref_cell(pair: (f64, f64)) -> String {
    format!("{:.2} ± {:.2}", pair.0, pair.1)
}

fn p_cell(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.3e}"),
        None => "—".to_string(),
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn table_rows(summary: &ComparisonSummary, reference: &[ReferenceRow]) -> Vec<[String; 6]> {
    let mut rows = Vec::new();
    for m in &summary.methods {
        rows.push([
            m.method.clone(),
            cell(&m.ssd),
            cell(&m.mad),
            cell(&m.prd),
            cell(&m.cos_sim_x100),
            p_cell(m.ssd.p_vs_proposed),
        ]);
    }
    for r in reference {
        rows.push([
            format!("{} ({REFERENCE_LABEL})", r.method),
            ref_cell(r.ssd),
            ref_cell(r.mad),
            ref_cell(r.prd),
            ref_cell(r.cos_sim_x100),
            "—".to_string(),
        ]);
    }
    rows
}

fn undefined_notes(summary: &ComparisonSummary) -> Vec<String> {
    let mut notes = Vec::new();
    for m in &summary.methods {
        if m.prd.undefined > 0 {
            notes.push(format!(
                "{}: {} beats with undefined PRD excluded",
                m.method, m.prd.undefined
            ));
        }
        if m.cos_sim_x100.undefined > 0 {
            notes.push(format!(
                "{}: {} beats with undefined cosine similarity excluded",
                m.method, m.cos_sim_x100.undefined
            ));
        }
    }
    notes
}

/// Render the comparison as CSV: `# key: value` header comments, the fixed
/// column row, then one line per method and reference row.
pub fn render_csv(
    summary: &ComparisonSummary,
    reference: &[ReferenceRow],
    header: &[(String, String)],
) -> String {
    let mut out = String::new();
    for (k, v) in header {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    for note in undefined_notes(summary) {
        out.push_str(&format!("# note: {note}\n"));
    }
    out.push_str(&TABLE_COLUMNS.join(","));
    out.push('\n');
    for row in table_rows(summary, reference) {
        let line: Vec<String> = row.iter().map(|c| csv_escape(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Render the comparison as a Markdown table with the header echoed as a
/// bullet list and footnotes for stars and reference rows.
pub fn render_markdown(
    summary: &ComparisonSummary,
    reference: &[ReferenceRow],
    header: &[(String, String)],
) -> String {
    let mut out = String::new();
    out.push_str("# Benchmark comparison\n\n");
    for (k, v) in header {
        out.push_str(&format!("- {k}: {v}\n"));
    }
    if !header.is_empty() {
        out.push('\n');
    }
    out.push_str(&format!("| {} |\n", TABLE_COLUMNS.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(TABLE_COLUMNS.len())));
    for row in table_rows(summary, reference) {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out.push('\n');
    out.push_str(&format!(
        "\\* p < {SIGNIFICANCE_P} versus `{}` (two-sided Wilcoxon signed-rank, per metric); — means no p-value (proposed row, reference row, or too few non-zero differences).\n",
        summary.proposed
    ));
    for note in undefined_notes(summary) {
        out.push_str(&format!("Note: {note}.\n"));
    }
    out
}

/// Schema tag written into (and required from) per-beat CSV files.
pub const BEAT_CSV_SCHEMA: &str = "beat-metrics/1";

/// Render one method's per-beat metrics as CSV. Undefined metrics become
/// empty fields. `header` key/value pairs are echoed as `# key: value`
/// comment lines.
pub fn render_beat_metrics_csv(result: &MethodResult, header: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema: {BEAT_CSV_SCHEMA}\n"));
    out.push_str(&format!("# method: {}\n", result.method));
    for (k, v) in header {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str("beat_id,ssd,mad,prd,cos_sim\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
    for b in &result.beats {
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{},{}\n",
            csv_escape(&b.beat_id),
            b.metrics.ssd,
            b.metrics.mad,
            opt(b.metrics.prd),
            opt(b.metrics.cos_sim),
        ));
    }
    out
}

/// Parse a per-beat CSV written by [`render_beat_metrics_csv`].
///
/// The schema line must match [`BEAT_CSV_SCHEMA`] exactly; files from a
/// different schema version fail rather than being half-read.
pub fn parse_beat_metrics_csv(text: &str) -> Result<MethodResult> {
    let format_err = |detail: String| Error::Format {
        format: "beat-metrics csv",
        detail,
    };
    let mut schema = None;
    let mut method = None;
    let mut beats = Vec::new();
    let mut saw_header_row = false;
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("schema:") {
                schema = Some(v.trim().to_string());
            } else if let Some(v) = rest.strip_prefix("method:") {
                method = Some(v.trim().to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !saw_header_row {
            if line != "beat_id,ssd,mad,prd,cos_sim" {
                return Err(format_err(format!(
                    "line {line_no}: expected the column header, got {line:?}"
                )));
            }
            saw_header_row = true;
            continue;
        }
        // Beat ids never contain commas in practice (record:channel:index),
        // so a plain split is exact for files this module wrote.
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format_err(format!(
                "line {line_no}: expected 5 fields, got {}",
                fields.len()
            )));
        }
        let req = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| format_err(format!("line {line_no}: bad {what} value {s:?}")))
        };
        let opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                req(s, what).map(Some)
            }
        };
        beats.push(BeatMetrics {
            beat_id: fields[0].to_string(),
            metrics: MetricsRecord {
                ssd: req(fields[1], "ssd")?,
                mad: req(fields[2], "mad")?,
                prd: opt(fields[3], "prd")?,
                cos_sim: opt(fields[4], "cos_sim")?,
            },
        });
    }
    match schema {
        None => return Err(format_err("missing '# schema:' line".into())),
        Some(s) if s != BEAT_CSV_SCHEMA => {
            return Err(format_err(format!(
                "schema {s:?} does not match {BEAT_CSV_SCHEMA:?}"
            )))
        }
        Some(_) => {}
    }
    let method = method.ok_or_else(|| format_err("missing '# method:' line".into()))?;
    if !saw_header_row {
        return Err(format_err("missing column header row".into()));
    }
    Ok(MethodResult { method, beats })
}
