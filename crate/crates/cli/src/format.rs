//! Number formatting and significance stars.

/// Six significant digits, written without an exponent for moderate
/// magnitudes.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Shortest representation that parses back to the same value.
pub fn full(v: f64) -> String {
    format!("{v}")
}

/// `***` below 1%, `**` below 5%, `*` below 10%.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Printed-table cell such as `0.1844***(12.2650)`.
pub fn coefficient_cell(estimate: f64, t: f64, p: f64) -> String {
    format!("{estimate:.4}{}({t:.4})", stars(p))
}
