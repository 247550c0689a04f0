//! Plateau learning-rate schedule with early stopping.
//!
//! The monitored metric is validation SSD; an epoch "improves" only when the
//! metric is strictly lower than the best seen. The learning rate halves
//! every 2 consecutive stale epochs (floored at 1e-10) and training stops
//! after 10 consecutive stale epochs.

/// What the trainer should do after reporting an epoch's validation metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleAction {
    /// Keep training at the current learning rate.
    Continue,
    /// Keep training; the learning rate was just reduced to the given value.
    ReduceLr(f64),
    /// Stop training; the patience budget is exhausted.
    Stop,
}

/// Tracks the best validation metric and the staleness counter.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    best_metric: f64,
    epochs_since_improvement: u32,
    learning_rate: f64,
    pub patience_lr: u32,
    pub patience_stop: u32,
    pub lr_factor: f64,
    pub min_lr: f64,
}

impl ScheduleState {
    pub fn new(initial_lr: f64) -> Self {
        assert!(initial_lr > 0.0);
        ScheduleState {
            best_metric: f64::INFINITY,
            epochs_since_improvement: 0,
            learning_rate: initial_lr,
            patience_lr: 2,
            patience_stop: 10,
            lr_factor: 0.5,
            min_lr: 1e-10,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn best_metric(&self) -> f64 {
        self.best_metric
    }

    /// True immediately after an [`update`](Self::update) that improved.
    pub fn improved_last_epoch(&self) -> bool {
        self.epochs_since_improvement == 0 && self.best_metric.is_finite()
    }

    pub fn epochs_since_improvement(&self) -> u32 {
        self.epochs_since_improvement
    }

    /// Record one epoch's validation metric and decide how to proceed.
    ///
    /// The staleness counter resets to zero exactly when the metric strictly
    /// improves; it never resets on a learning-rate reduction, so the rate
    /// keeps halving every `patience_lr` stale epochs until either an
    /// improvement arrives or `patience_stop` is reached.
    pub fn update(&mut self, val_metric: f64) -> ScheduleAction {
        assert!(val_metric.is_finite(), "validation metric must be finite");
        if val_metric < self.best_metric {
            self.best_metric = val_metric;
            self.epochs_since_improvement = 0;
            return ScheduleAction::Continue;
        }
        self.epochs_since_improvement += 1;
        if self.epochs_since_improvement >= self.patience_stop {
            return ScheduleAction::Stop;
        }
        if self.epochs_since_improvement % self.patience_lr == 0 {
            self.learning_rate = (self.learning_rate * self.lr_factor).max(self.min_lr);
            return ScheduleAction::ReduceLr(self.learning_rate);
        }
        ScheduleAction::Continue
    }
}
