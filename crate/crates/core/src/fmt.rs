//! Deterministic numeric formatting for CSV output.

/// Format with nine significant digits, positional where reasonable and
/// scientific for extreme magnitudes. Output is locale-independent and
/// stable across runs.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        format!("{x:.8e}")
    } else {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    }
}
