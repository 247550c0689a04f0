//! Text export of filter coefficients for external verification: a
//! commented header with the design parameters, then one coefficient per
//! line in full round-trippable precision. IIR designs carry two sections
//! (numerator, then denominator) introduced by section markers.

use crate::error::{Error, Result};
use crate::filters::zero_phase::ClassicalFilter;
use std::fmt::Write as _;
use std::path::Path;

/// Render the coefficient file contents.
pub fn coefficients_text(filter: &ClassicalFilter) -> String {
    let mut out = String::new();
    match filter {
        ClassicalFilter::Fir(d) => {
            let p = &d.params;
            let _ = writeln!(out, "# filter: fir-highpass");
            let _ = writeln!(out, "# fs_hz: {}", p.fs_hz);
            let _ = writeln!(out, "# cutoff_hz: {}", p.cutoff_hz);
            let _ = writeln!(out, "# kaiser_beta: {}", p.kaiser_beta);
            let _ = writeln!(out, "# num_taps: {}", p.num_taps);
            let _ = writeln!(out, "# transition_width_hz: {}", p.transition_width_hz);
            let _ = writeln!(out, "# stopband_atten_db: {}", p.stopband_atten_db);
            let _ = writeln!(out, "# section: taps");
            for t in &d.taps {
                let _ = writeln!(out, "{t:?}");
            }
        }
        ClassicalFilter::Iir(d) => {
            let p = &d.params;
            let _ = writeln!(out, "# filter: iir-butterworth-highpass");
            let _ = writeln!(out, "# fs_hz: {}", p.fs_hz);
            let _ = writeln!(out, "# cutoff_hz: {}", p.cutoff_hz);
            let _ = writeln!(out, "# order: {}", p.order);
            let _ = writeln!(out, "# section: b");
            for c in &d.b {
                let _ = writeln!(out, "{c:?}");
            }
            let _ = writeln!(out, "# section: a");
            for c in &d.a {
                let _ = writeln!(out, "{c:?}");
            }
        }
    }
    out
}

/// Write the coefficient file to disk.
pub fn save_coefficients(filter: &ClassicalFilter, path: &Path) -> Result<()> {
    std::fs::write(path, coefficients_text(filter)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::fir::{design_fir_highpass, FirParams};
    use crate::filters::iir::{design_iir_highpass, IirParams};

    fn parse_floats(text: &str) -> Vec<f64> {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| l.trim().parse().unwrap())
            .collect()
    }

    #[test]
    fn fir_export_round_trips_bitwise() {
        let d = design_fir_highpass(&FirParams {
            num_taps: 101,
            ..FirParams::default()
        })
        .unwrap();
        let text = coefficients_text(&ClassicalFilter::Fir(d.clone()));
        assert!(text.contains("# num_taps: 101"));
        let parsed = parse_floats(&text);
        assert_eq!(parsed.len(), 101);
        for (p, t) in parsed.iter().zip(d.taps.iter()) {
            assert_eq!(p.to_bits(), t.to_bits());
        }
    }

    #[test]
    fn iir_export_keeps_both_sections_in_order() {
        let d = design_iir_highpass(&IirParams::default()).unwrap();
        let text = coefficients_text(&ClassicalFilter::Iir(d.clone()));
        let b_pos = text.find("# section: b").unwrap();
        let a_pos = text.find("# section: a").unwrap();
        assert!(b_pos < a_pos);
        let parsed = parse_floats(&text);
        assert_eq!(parsed.len(), 10);
        let want: Vec<f64> = d.b.iter().chain(d.a.iter()).copied().collect();
        for (p, w) in parsed.iter().zip(want.iter()) {
            assert_eq!(p.to_bits(), w.to_bits());
        }
    }

    #[test]
    fn save_writes_a_readable_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fir.txt");
        let d = design_fir_highpass(&FirParams {
            num_taps: 21,
            ..FirParams::default()
        })
        .unwrap();
        save_coefficients(&ClassicalFilter::Fir(d), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(parse_floats(&text).len(), 21);
    }
}
