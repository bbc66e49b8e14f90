//! Deterministic number formatting for emitted artifacts.

/// Formats `x` with `sig` significant digits, decimal notation in the
/// human-friendly magnitude range and scientific notation outside it, with
/// trailing zeros trimmed. The mapping is a pure function of the bits of
/// `x`, which is what makes repeated runs byte-identical.
pub fn format_sig(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if exponent < -4 || exponent >= sig as i32 {
        trim_scientific(&format!("{:.*e}", sig - 1, x))
    } else {
        let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
        trim_decimal(&format!("{:.*}", decimals, x))
    }
}

fn trim_decimal(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn trim_scientific(s: &str) -> String {
    match s.split_once('e') {
        Some((mantissa, exponent)) => format!("{}e{exponent}", trim_decimal(mantissa)),
        None => s.to_string(),
    }
}
