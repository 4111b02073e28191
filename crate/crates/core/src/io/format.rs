/// Rounds to 10 significant digits and prints the shortest decimal that
/// reads back to the rounded value. Infinities print as `inf`/`-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

/// Shortest decimal that reads back to exactly `x`; used for data files,
/// where the 10-digit rounding of result tables would lose precision.
pub(crate) fn format_exact(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x}")
}

/// Parses a float with a dot decimal separator; accepts `inf`/`-inf`.
pub(crate) fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ if t.contains(',') => None,
        _ => t.parse().ok().filter(|v: &f64| !v.is_nan()),
    }
}
