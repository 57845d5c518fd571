//! Deterministic number formatting for the CSV outputs.
//!
//! Floats are printed with 17 significant digits in scientific notation so
//! that parsing the text back recovers the exact bit pattern.

use std::fmt::Write;

/// Appends a float with 17 significant digits.
pub fn push_f64(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").expect("string write");
}

/// Formats a float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        for &x in &[
            0.1,
            -3.5e-7,
            1.0 / 3.0,
            2.0_f64.sqrt(),
            6.02214076e23,
            -0.0,
            5e-324,
        ] {
            let s = format_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
