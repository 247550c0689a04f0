//! Evaluation protocol: run a denoising method over test beats and score
//! each beat with the similarity metrics.
//!
//! Neural models see each 512-sample window as trained. Classical filters
//! instead follow the stream protocol: each record/channel's beats are
//! trimmed to their original lengths, concatenated into one continuous
//! signal, filtered once with zero phase, then split back apart and
//! re-padded — matching how such filters process a recording in practice
//! and sparing them edge transients at every beat boundary.

use std::time::Instant;

use crate::data::beats::BeatSegment;
use crate::data::noise::BeatPair;
use crate::error::{Error, Result};
use crate::filters::ClassicalFilter;
use crate::metrics::{compute_metrics, PrdForm};
use crate::model::ModelGraph;
use crate::report::{BeatMetrics, MethodResult};
use crate::tensor::Tensor;

/// A method under evaluation.
pub enum Denoiser {
    Model(ModelGraph),
    Classical(ClassicalFilter),
    /// Pass-through of the noisy input: the do-nothing baseline every
    /// method must beat.
    Identity,
    /// Returns the clean signal: the unreachable upper bound.
    Oracle,
}

impl Denoiser {
    pub fn label(&self) -> &'static str {
        match self {
            Denoiser::Model(m) => m.kind().as_str(),
            Denoiser::Classical(ClassicalFilter::Fir(_)) => "fir",
            Denoiser::Classical(ClassicalFilter::Iir(_)) => "iir",
            Denoiser::Identity => "identity",
            Denoiser::Oracle => "oracle",
        }
    }
}

/// Metric and batching choices for one evaluation run.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub prd_form: PrdForm,
    pub batch_size: usize,
    /// Score only the first `original_length` samples of each beat instead
    /// of the full padded window.
    pub restrict_to_original: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            prd_form: PrdForm::Printed,
            batch_size: 32,
            restrict_to_original: false,
        }
    }
}

/// Stable beat identity used to align methods in a comparison.
pub fn beat_id(beat: &BeatSegment) -> String {
    format!("{}:{}:{}", beat.record, beat.channel, beat.beat_index)
}

fn model_outputs(
    model: &ModelGraph,
    pairs: &[&BeatPair],
    batch_size: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut outputs = Vec::with_capacity(pairs.len());
    for chunk in pairs.chunks(batch_size.max(1)) {
        let len = chunk[0].noisy.len();
        let mut data = Vec::with_capacity(chunk.len() * len);
        for p in chunk {
            data.extend_from_slice(&p.noisy);
        }
        let batch = Tensor::from_vec(chunk.len(), 1, len, data);
        let out = model.forward(&batch)?;
        for b in 0..chunk.len() {
            outputs.push(out.channel(b, 0).to_vec());
        }
    }
    Ok(outputs)
}

fn classical_outputs(filter: &ClassicalFilter, pairs: &[&BeatPair]) -> Vec<Vec<f64>> {
    // Group by (record, channel) in first-seen order, remembering each
    // pair's position so outputs land back in input order.
    let mut groups: Vec<((String, u16), Vec<usize>)> = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let key = (p.clean.record.clone(), p.clean.channel);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((key, vec![i])),
        }
    }

    let mut outputs = vec![Vec::new(); pairs.len()];
    for (_, indices) in &groups {
        let mut stream = Vec::new();
        for &i in indices {
            let p = pairs[i];
            stream.extend_from_slice(&p.noisy[..p.clean.original_length]);
        }
        let filtered = filter.zero_phase(&stream);
        let mut at = 0;
        for &i in indices {
            let p = pairs[i];
            let len = p.clean.original_length;
            let mut out = vec![0.0; p.noisy.len()];
            out[..len].copy_from_slice(&filtered[at..at + len]);
            at += len;
            outputs[i] = out;
        }
    }
    outputs
}

/// Produce the denoised signal for every pair, one output per input, in
/// input order. Outputs always span the full padded window.
pub fn denoise_all(
    denoiser: &Denoiser,
    pairs: &[&BeatPair],
    opts: &EvalOptions,
) -> Result<Vec<Vec<f64>>> {
    if pairs.is_empty() {
        return Err(Error::Config("no beats to evaluate".into()));
    }
    Ok(match denoiser {
        Denoiser::Model(m) => model_outputs(m, pairs, opts.batch_size)?,
        Denoiser::Classical(f) => classical_outputs(f, pairs),
        Denoiser::Identity => pairs.iter().map(|p| p.noisy.clone()).collect(),
        Denoiser::Oracle => pairs.iter().map(|p| p.clean.samples.clone()).collect(),
    })
}

/// Denoise and score every pair. Beat identities come out in input order,
/// so two methods evaluated on the same slice always align.
pub fn evaluate_method(
    denoiser: &Denoiser,
    pairs: &[&BeatPair],
    opts: &EvalOptions,
) -> Result<MethodResult> {
    let outputs = denoise_all(denoiser, pairs, opts)?;
    let mut beats = Vec::with_capacity(pairs.len());
    for (p, out) in pairs.iter().zip(&outputs) {
        let window = if opts.restrict_to_original {
            p.clean.original_length
        } else {
            p.clean.samples.len()
        };
        let metrics = compute_metrics(&p.clean.samples[..window], &out[..window], opts.prd_form)?;
        beats.push(BeatMetrics {
            beat_id: beat_id(&p.clean),
            metrics,
        });
    }
    Ok(MethodResult {
        method: denoiser.label().to_string(),
        beats,
    })
}

/// Wall-clock latency of single-beat denoising.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub median_ms: f64,
    pub p95_ms: f64,
    pub runs: usize,
}

/// Time single-beat denoising over `runs` measured repetitions after
/// `warmup` unmeasured ones, single-threaded.
pub fn time_denoiser(
    denoiser: &Denoiser,
    beat: &BeatPair,
    runs: usize,
    warmup: usize,
) -> Result<TimingStats> {
    if runs == 0 {
        return Err(Error::Config("timing needs at least one run".into()));
    }
    let opts = EvalOptions {
        batch_size: 1,
        ..EvalOptions::default()
    };
    let single = [beat];
    for _ in 0..warmup {
        denoise_all(denoiser, &single, &opts)?;
    }
    let mut samples_ms = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        let out = denoise_all(denoiser, &single, &opts)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        debug_assert_eq!(out.len(), 1);
        samples_ms.push(elapsed);
    }
    samples_ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_ms = if runs % 2 == 1 {
        samples_ms[runs / 2]
    } else {
        0.5 * (samples_ms[runs / 2 - 1] + samples_ms[runs / 2])
    };
    let p95_idx = ((runs as f64 * 0.95).ceil() as usize).clamp(1, runs) - 1;
    Ok(TimingStats {
        median_ms,
        p95_ms: samples_ms[p95_idx],
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::beats::Split;
    use crate::filters::{design_fir_highpass, FirParams};
    use crate::model::{build_model_custom, ModelKind, BEAT_LEN};

    fn pair(record: &str, channel: u16, beat_index: u32, len: usize, phase: f64) -> BeatPair {
        let mut clean = vec![0.0; BEAT_LEN];
        for (t, c) in clean.iter_mut().enumerate().take(len) {
            *c = (t as f64 * 0.05 + phase).sin();
        }
        let mut noisy = clean.clone();
        for (t, n) in noisy.iter_mut().enumerate().take(len) {
            *n += 0.4 * (t as f64 * 0.002 + phase).cos();
        }
        BeatPair {
            clean: BeatSegment {
                samples: clean,
                original_length: len,
                record: record.to_string(),
                channel,
                beat_index,
                split: Split::Test,
            },
            noisy,
            alpha: 1.0,
            degenerate: false,
        }
    }

    fn small_fir() -> ClassicalFilter {
        ClassicalFilter::Fir(
            design_fir_highpass(&FirParams {
                num_taps: 801,
                ..FirParams::default()
            })
            .unwrap(),
        )
    }

    #[test]
    fn identity_scores_the_raw_noise() {
        let p = pair("recA", 0, 0, 400, 0.0);
        let pairs = [&p];
        let result = evaluate_method(&Denoiser::Identity, &pairs, &EvalOptions::default()).unwrap();
        let direct =
            compute_metrics(&p.clean.samples, &p.noisy, PrdForm::Printed).unwrap();
        assert_eq!(result.beats[0].metrics, direct);
        assert_eq!(result.method, "identity");
    }

    #[test]
    fn oracle_is_a_perfect_score() {
        let p = pair("recA", 0, 0, 400, 0.3);
        let pairs = [&p];
        let result = evaluate_method(&Denoiser::Oracle, &pairs, &EvalOptions::default()).unwrap();
        let m = result.beats[0].metrics;
        assert_eq!(m.ssd, 0.0);
        assert_eq!(m.mad, 0.0);
        assert_eq!(m.prd, Some(0.0));
        let cos = m.cos_sim.unwrap();
        assert!((cos - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beat_ids_are_record_channel_index() {
        let p = pair("sel123", 1, 7, 300, 0.0);
        assert_eq!(beat_id(&p.clean), "sel123:1:7");
    }

    #[test]
    fn classical_protocol_concatenates_per_record_and_channel() {
        // Two beats of one record/channel plus one from another channel.
        let a0 = pair("recA", 0, 0, 300, 0.0);
        let a1 = pair("recA", 0, 1, 350, 1.0);
        let b0 = pair("recA", 1, 0, 400, 2.0);
        let pairs = [&a0, &b0, &a1]; // interleaved input order
        let filter = small_fir();
        let outputs = denoise_all(
            &Denoiser::Classical(filter.clone()),
            &pairs,
            &EvalOptions::default(),
        )
        .unwrap();

        // Manual protocol for the (recA, 0) group.
        let mut stream = a0.noisy[..300].to_vec();
        stream.extend_from_slice(&a1.noisy[..350]);
        let filtered = filter.zero_phase(&stream);
        assert_eq!(&outputs[0][..300], &filtered[..300]);
        assert_eq!(&outputs[2][..350], &filtered[300..650]);
        assert!(outputs[0][300..].iter().all(|&v| v == 0.0));
        assert!(outputs[2][350..].iter().all(|&v| v == 0.0));

        // The lone (recA, 1) beat is its own stream.
        let solo = filter.zero_phase(&b0.noisy[..400]);
        assert_eq!(&outputs[1][..400], &solo[..]);
    }

    #[test]
    fn classical_filtering_actually_removes_wander() {
        // One long baseline-heavy beat: after the highpass the SSD against
        // clean must be far below the identity baseline's.
        let p = pair("recA", 0, 0, BEAT_LEN, 0.0);
        let pairs = [&p];
        let opts = EvalOptions::default();
        let fir = evaluate_method(&Denoiser::Classical(small_fir()), &pairs, &opts).unwrap();
        let id = evaluate_method(&Denoiser::Identity, &pairs, &opts).unwrap();
        assert!(
            fir.beats[0].metrics.ssd < 0.5 * id.beats[0].metrics.ssd,
            "fir {} vs identity {}",
            fir.beats[0].metrics.ssd,
            id.beats[0].metrics.ssd
        );
    }

    #[test]
    fn model_evaluation_is_deterministic() {
        let model = build_model_custom(ModelKind::VanillaL, &[4], BEAT_LEN, 3).unwrap();
        let p0 = pair("recA", 0, 0, 300, 0.0);
        let p1 = pair("recA", 0, 1, 400, 1.5);
        let pairs = [&p0, &p1];
        let opts = EvalOptions::default();
        let d = Denoiser::Model(model);
        let a = evaluate_method(&d, &pairs, &opts).unwrap();
        let b = evaluate_method(&d, &pairs, &opts).unwrap();
        for (x, y) in a.beats.iter().zip(&b.beats) {
            assert_eq!(x.metrics, y.metrics);
            assert_eq!(x.beat_id, y.beat_id);
        }
    }

    #[test]
    fn restricting_to_original_length_drops_tail_error() {
        let model = build_model_custom(ModelKind::VanillaNl, &[4], BEAT_LEN, 5).unwrap();
        let p = pair("recA", 0, 0, 300, 0.0);
        let pairs = [&p];
        let full = evaluate_method(
            &Denoiser::Model(model),
            &pairs,
            &EvalOptions::default(),
        )
        .unwrap();
        let model2 = build_model_custom(ModelKind::VanillaNl, &[4], BEAT_LEN, 5).unwrap();
        let restricted = evaluate_method(
            &Denoiser::Model(model2),
            &pairs,
            &EvalOptions {
                restrict_to_original: true,
                ..EvalOptions::default()
            },
        )
        .unwrap();
        // Full-window SSD adds the padded tail's squared error on top.
        assert!(full.beats[0].metrics.ssd >= restricted.beats[0].metrics.ssd);
    }

    #[test]
    fn empty_beat_list_is_rejected() {
        let err = evaluate_method(&Denoiser::Identity, &[], &EvalOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn timing_reports_ordered_positive_stats() {
        let p = pair("recA", 0, 0, 400, 0.0);
        let stats = time_denoiser(&Denoiser::Identity, &p, 21, 2).unwrap();
        assert_eq!(stats.runs, 21);
        assert!(stats.median_ms > 0.0);
        assert!(stats.p95_ms >= stats.median_ms);
        assert!(stats.median_ms.is_finite());
    }
}
