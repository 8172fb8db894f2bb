//! Canonical float formatting for byte-reproducible CSV and JSON output:
//! round to 12 significant digits, then print the shortest string that
//! round-trips.

/// Rounds `x` to 12 significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn fmt_canonical(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    // normalize negative zero
    if r == 0.0 {
        return "0".into();
    }
    format!("{r}")
}

/// Recursively rounds every float in a JSON value.
pub fn canonicalize_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(canonicalize_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(canonicalize_json),
        _ => {}
    }
}

/// Pretty JSON with canonical floats.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize_json(&mut v);
    serde_json::to_string_pretty(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(fmt_canonical(0.1 + 0.2), "0.3");
        assert_eq!(fmt_canonical(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_canonical(-0.0), "0");
        assert_eq!(fmt_canonical(2.5e-17), "0.000000000000000025");
        assert_eq!(fmt_canonical(123456789.123456789), "123456789.123");
    }

    #[test]
    fn json_floats_rounded() {
        let s = to_canonical_json(&serde_json::json!({"a": [0.1 + 0.2, 3], "b": {"c": 1.0 / 3.0}})).unwrap();
        assert!(s.contains("0.3"));
        assert!(s.contains("0.333333333333"));
        assert!(!s.contains("0.30000000000000004"));
    }
}
