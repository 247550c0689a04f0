//! Removal of baseline wander from ECG signals.
//!
//! Baseline wander is the low-frequency (0.05–3 Hz) drift that breathing,
//! motion, and electrode impedance superimpose on an electrocardiogram. This
//! crate implements, end to end, a benchmark for removing it from
//! single-beat windows:
//!
//! * a small deterministic tensor engine with dilated 1-D convolutions and
//!   their adjoints ([`nn`]),
//! * the multipath convolutional denoising models and their checkpoint
//!   format ([`model`], [`checkpoint`]),
//! * the composite training loss, the four signal-fidelity metrics, and the
//!   Wilcoxon signed-rank test ([`loss`], [`metrics`], [`stats`]),
//! * classical high-pass FIR/IIR baselines applied with zero phase
//!   ([`filters`]),
//! * the data pipeline: WFDB parsing, resampling, beat segmentation, noise
//!   injection, and synthetic generators ([`data`]),
//! * training, evaluation, and report assembly ([`train`], [`eval`],
//!   [`report`]).
//!
//! ```
//! use blwfilter::nn::{conv1d, ConvParams};
//! use blwfilter::tensor::Tensor;
//!
//! // A three-tap averaging kernel smooths a five-sample signal.
//! let mut params = ConvParams::new(1, 1, 3, 0)?;
//! params.weight.copy_from_slice(&[1.0 / 3.0; 3]);
//! let x = Tensor::from_vec(1, 1, 5, vec![3.0, 0.0, 3.0, 0.0, 3.0]);
//! let y = conv1d(&x, &params)?;
//! assert_eq!(y.len(), 5);
//! assert!((y.at(0, 0, 2) - 1.0).abs() < 1e-12);
//! # Ok::<(), blwfilter::Error>(())
//! ```

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod filters;
pub mod gradcheck;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod report;
pub mod stats;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
