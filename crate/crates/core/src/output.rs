//! Locale-free, byte-stable number formatting for CSV output.

/// Shortest representation that parses back to the same `f64`.
///
/// Uses exponent notation for very small or large magnitudes, so values
/// such as 1e-300 stay short.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}
