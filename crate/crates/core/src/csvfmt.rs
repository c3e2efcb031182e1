//! Fixed numeric formatting for CSV output: scientific notation with 17
//! significant digits, so identical runs diff cleanly and values round-trip.

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Empty cell for `None`.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}
