//! Signal-fidelity metrics between a clean reference and a filtered signal.
//!
//! For reference `s1` and candidate `s2`:
//!
//! * SSD — sum of squared distances, `Σ(s2 − s1)²` (arbitrary units).
//! * MAD — maximum absolute distance, `max|s1 − s2|`.
//! * PRD — percentage RMS difference. The printed form divides by
//!   `Σ(s2 − mean(s1))²`, centering the *candidate* on the reference mean;
//!   the conventional form divides by `Σ(s1 − mean(s1))²`. The printed form
//!   is the default and every report records which form it used.
//! * Cosine similarity — `⟨s1, s2⟩ / (‖s1‖·‖s2‖)`, in [−1, 1]; reports
//!   scale it by 100.
//!
//! A zero denominator makes PRD or cosine similarity undefined for that
//! beat. The record stores `None`, the strict accessors surface an
//! undefined-metric error, and aggregation excludes those beats per metric
//! while counting the exclusions.

use crate::error::{Error, Result};

/// Which PRD denominator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrdForm {
    /// Candidate centered on the reference mean: `Σ(s2 − mean(s1))²`.
    Printed,
    /// Reference-centered energy: `Σ(s1 − mean(s1))²`.
    Conventional,
}

impl PrdForm {
    pub fn as_str(self) -> &'static str {
        match self {
            PrdForm::Printed => "printed",
            PrdForm::Conventional => "conventional",
        }
    }
}

/// Metric values for one beat. `None` marks an undefined metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub ssd: f64,
    pub mad: f64,
    pub prd: Option<f64>,
    pub cos_sim: Option<f64>,
}

impl MetricsRecord {
    /// PRD, or an undefined-metric error when the denominator was zero.
    pub fn prd_strict(&self) -> Result<f64> {
        self.prd.ok_or(Error::UndefinedMetric {
            metric: "PRD",
            reason: "zero denominator".into(),
        })
    }

    /// Cosine similarity, or an undefined-metric error on a zero-norm input.
    pub fn cos_sim_strict(&self) -> Result<f64> {
        self.cos_sim.ok_or(Error::UndefinedMetric {
            metric: "cosine similarity",
            reason: "zero-norm signal".into(),
        })
    }
}

/// Compute all four metrics between equal-length signals.
pub fn compute_metrics(s1: &[f64], s2: &[f64], form: PrdForm) -> Result<MetricsRecord> {
    if s1.len() != s2.len() || s1.is_empty() {
        return Err(Error::ShapeMismatch {
            context: "metrics",
            expected: format!("two equal non-empty lengths, reference has {}", s1.len()),
            got: format!("candidate length {}", s2.len()),
        });
    }
    let n = s1.len() as f64;
    let mean1: f64 = s1.iter().sum::<f64>() / n;

    let mut ssd = 0.0;
    let mut mad = 0.0f64;
    let mut denom = 0.0;
    let mut dot = 0.0;
    let mut norm1 = 0.0;
    let mut norm2 = 0.0;
    for (&a, &b) in s1.iter().zip(s2) {
        let d = b - a;
        ssd += d * d;
        mad = mad.max(d.abs());
        let centered = match form {
            PrdForm::Printed => b - mean1,
            PrdForm::Conventional => a - mean1,
        };
        denom += centered * centered;
        dot += a * b;
        norm1 += a * a;
        norm2 += b * b;
    }

    let prd = if denom > 0.0 {
        Some((ssd / denom).sqrt() * 100.0)
    } else {
        None
    };
    let cos_sim = if norm1 > 0.0 && norm2 > 0.0 {
        Some(dot / (norm1.sqrt() * norm2.sqrt()))
    } else {
        None
    };
    Ok(MetricsRecord {
        ssd,
        mad,
        prd,
        cos_sim,
    })
}

/// Mean of a slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divides by N, not N−1); the reports state
/// this choice in their headers.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}
