//! Layer primitives, optimizer, and training schedule.

pub mod activation;
pub mod adam;
pub mod conv;
pub mod schedule;

pub use activation::{activation, activation_backward, Activation};
pub use adam::{adam_step, OptimizerState};
pub use conv::{conv1d, conv1d_backward, ConvGrads, ConvParams};
pub use schedule::{ScheduleAction, ScheduleState};
