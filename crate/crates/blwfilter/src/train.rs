//! Training loop: shuffled mini-batches, Adam, plateau schedule, best-model
//! tracking.
//!
//! Each epoch shuffles the training pairs with a generator derived from the
//! run seed and the epoch number, steps Adam on every batch with the
//! peak-weighted loss, then measures mean validation SSD. The schedule
//! halves the learning rate after every 2 consecutive epochs without
//! improvement and stops after 10; whenever validation improves, the
//! parameters are snapshotted (and optionally checkpointed to disk), and
//! the best snapshot is restored into the model before returning.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checkpoint::{checkpoint_save, CheckpointMeta};
use crate::data::noise::BeatPair;
use crate::error::{Error, Result};
use crate::loss::{filtering_loss_backward, DEFAULT_LAMBDA};
use crate::model::ModelGraph;
use crate::nn::adam::{adam_step, OptimizerState};
use crate::nn::schedule::{ScheduleAction, ScheduleState};
use crate::tensor::Tensor;

/// Hyperparameters for one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub initial_lr: f64,
    /// Weight of the worst-sample term in the loss.
    pub lambda: f64,
    /// Hard ceiling; practical runs end earlier via the plateau schedule.
    pub max_epochs: u64,
    /// Drives batch shuffling and is recorded in checkpoints.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            initial_lr: 1e-3,
            lambda: DEFAULT_LAMBDA,
            max_epochs: 100_000,
            seed: 42,
        }
    }
}

/// One epoch's line in the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: u64,
    pub train_loss: f64,
    pub val_metric: f64,
    pub learning_rate: f64,
    /// True when this epoch improved the best validation metric (and the
    /// parameter snapshot / checkpoint was taken).
    pub saved: bool,
}

/// Outcome of a training run.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub epochs_run: u64,
    pub best_val_metric: f64,
    pub best_epoch: u64,
    /// True when the plateau schedule stopped the run before `max_epochs`.
    pub stopped_early: bool,
    pub log: Vec<EpochLog>,
}

/// Stack pairs into `(batch, 1, len)` clean and noisy tensors.
fn batch_tensors(pairs: &[&BeatPair]) -> (Tensor, Tensor) {
    let len = pairs[0].clean.samples.len();
    let mut clean = Vec::with_capacity(pairs.len() * len);
    let mut noisy = Vec::with_capacity(pairs.len() * len);
    for p in pairs {
        clean.extend_from_slice(&p.clean.samples);
        noisy.extend_from_slice(&p.noisy);
    }
    (
        Tensor::from_vec(pairs.len(), 1, len, clean),
        Tensor::from_vec(pairs.len(), 1, len, noisy),
    )
}

/// Mean per-beat SSD of the model's denoised output against the clean
/// signal, over the full padded window.
pub fn mean_model_ssd(
    model: &ModelGraph,
    pairs: &[&BeatPair],
    batch_size: usize,
) -> Result<f64> {
    debug_assert!(!pairs.is_empty());
    let mut total = 0.0;
    for chunk in pairs.chunks(batch_size.max(1)) {
        let (clean, noisy) = batch_tensors(chunk);
        let out = model.forward(&noisy)?;
        for (c, o) in clean.data().iter().zip(out.data()) {
            total += (c - o) * (c - o);
        }
    }
    Ok(total / pairs.len() as f64)
}

struct Optimizers {
    states: Vec<OptimizerState>,
    names: Vec<String>,
}

impl Optimizers {
    fn new(model: &ModelGraph, lr: f64) -> Optimizers {
        Optimizers {
            states: model
                .params()
                .iter()
                .map(|p| OptimizerState::new(p.len(), lr))
                .collect(),
            names: model.param_names(),
        }
    }

    fn set_learning_rate(&mut self, lr: f64) {
        for s in &mut self.states {
            s.learning_rate = lr;
        }
    }
}

/// Train until the schedule stops or `max_epochs` is hit, monitoring the
/// supplied validation metric. Used directly by tests that stub the metric;
/// [`train_model`] wires in the real one.
fn train_loop<F, P>(
    model: &mut ModelGraph,
    train_pairs: &[&BeatPair],
    config: &TrainConfig,
    checkpoint_path: Option<&Path>,
    mut val_metric: F,
    mut progress: P,
) -> Result<TrainSummary>
where
    F: FnMut(&ModelGraph) -> Result<f64>,
    P: FnMut(&EpochLog),
{
    if train_pairs.is_empty() {
        return Err(Error::Config("no training beats in the dataset".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }

    let mut optim = Optimizers::new(model, config.initial_lr);
    let mut schedule = ScheduleState::new(config.initial_lr);
    let mut log = Vec::new();
    let mut best_params: Option<Vec<Vec<f64>>> = None;
    let mut best_epoch = 0u64;
    let mut stopped_early = false;

    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    for epoch in 1..=config.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(epoch));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        for (batch_no, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&BeatPair> = chunk.iter().map(|&i| train_pairs[i]).collect();
            let (clean, noisy) = batch_tensors(&batch);
            let cache = model.forward_train(&noisy)?;
            let (loss, grad) = filtering_loss_backward(&clean, cache.output(), config.lambda)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch as usize,
                    batch: batch_no,
                });
            }
            let (grads, _) = model.backward(&cache, &grad)?;
            for ((param, grad), (state, name)) in model
                .params_mut()
                .into_iter()
                .zip(&grads.0)
                .zip(optim.states.iter_mut().zip(&optim.names))
            {
                adam_step(param, grad, state, name)?;
            }
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train_pairs.len() as f64;

        let metric = val_metric(model)?;
        let action = schedule.update(metric);
        let saved = schedule.improved_last_epoch();
        if saved {
            best_params = Some(model.params().iter().map(|p| p.to_vec()).collect());
            best_epoch = epoch;
            if let Some(path) = checkpoint_path {
                let meta = CheckpointMeta {
                    epoch,
                    best_val_ssd: metric,
                    seed: config.seed,
                };
                checkpoint_save(model, &meta, path)?;
            }
        }
        let line = EpochLog {
            epoch,
            train_loss,
            val_metric: metric,
            learning_rate: schedule.learning_rate(),
            saved,
        };
        progress(&line);
        log.push(line);
        match action {
            ScheduleAction::Continue => {}
            ScheduleAction::ReduceLr(lr) => optim.set_learning_rate(lr),
            ScheduleAction::Stop => {
                stopped_early = true;
                break;
            }
        }
    }

    // Leave the caller holding the best-validation model, matching what the
    // checkpoint file contains.
    if let Some(best) = best_params {
        for (param, stored) in model.params_mut().into_iter().zip(&best) {
            param.copy_from_slice(stored);
        }
    }
    Ok(TrainSummary {
        epochs_run: log.len() as u64,
        best_val_metric: schedule.best_metric(),
        best_epoch,
        stopped_early,
        log,
    })
}

/// Train on a dataset's train split, monitoring mean SSD on its validation
/// split (or on the train split itself when the dataset has no validation
/// beats, as in tiny overfit runs).
///
/// On return the model holds the best-validation parameters; when
/// `checkpoint_path` is given, the same parameters are on disk along with
/// the epoch and metric that produced them.
pub fn train_model(
    model: &mut ModelGraph,
    dataset: &crate::data::dataset::Dataset,
    config: &TrainConfig,
    checkpoint_path: Option<&Path>,
) -> Result<TrainSummary> {
    train_model_with_progress(model, dataset, config, checkpoint_path, |_| {})
}

/// [`train_model`] with an observer called after every epoch, so callers can
/// stream progress from runs that take minutes to hours.
pub fn train_model_with_progress(
    model: &mut ModelGraph,
    dataset: &crate::data::dataset::Dataset,
    config: &TrainConfig,
    checkpoint_path: Option<&Path>,
    progress: impl FnMut(&EpochLog),
) -> Result<TrainSummary> {
    use crate::data::beats::Split;
    let train_pairs = dataset.split(Split::Train);
    let val_pairs = dataset.split(Split::Val);
    let batch = config.batch_size;
    let monitor = if val_pairs.is_empty() {
        train_pairs.clone()
    } else {
        val_pairs
    };
    train_loop(
        model,
        &train_pairs,
        config,
        checkpoint_path,
        |m| mean_model_ssd(m, &monitor, batch),
        progress,
    )
}

/// Render the run log as CSV with a header row.
pub fn render_train_log_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,train_loss,val_ssd,learning_rate,saved\n");
    for e in log {
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e},{}\n",
            e.epoch, e.train_loss, e.val_metric, e.learning_rate, e.saved
        ));
    }
    out
}
