//! Classical baseline-removal filters: a windowed-sinc high-pass FIR and a
//! Butterworth high-pass IIR, both applied forward-backward for zero phase,
//! plus frequency-response evaluation and coefficient export.

pub mod coeff;
pub mod fir;
pub mod iir;
pub mod response;
pub mod zero_phase;

pub use coeff::{coefficients_text, save_coefficients};
pub use fir::{design_fir_highpass, FirDesign, FirParams};
pub use iir::{design_iir_highpass, IirDesign, IirParams};
pub use response::{frequency_response, frequency_response_ba};
pub use zero_phase::{fft_convolve, lfilter, lfilter_zi, ClassicalFilter};
