//! Canonical JSON emission.
//!
//! All exported documents and reports go through this writer so that two
//! invocations over the same data produce byte-identical output: object keys
//! sorted, no insignificant whitespace, and every float rounded to 12
//! significant digits before formatting.

use serde_json::{Number, Value};

/// Significant decimal digits kept in canonical float output.
pub const FLOAT_SIG_DIGITS: i32 = 12;

/// Round `x` to `sig` significant decimal digits.
pub fn round_sig(x: f64, sig: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(sig - 1 - magnitude);
    (x * scale).round() / scale
}

fn canonicalize_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let f = round_sig(n.as_f64().unwrap(), FLOAT_SIG_DIGITS);
                // NaN/inf must never reach an export; undefined values are
                // modeled as null upstream.
                Value::Number(Number::from_f64(f).expect("finite float"))
            } else {
                Value::Number(n)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, canonicalize_numbers(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Serialize a JSON value in canonical form.
///
/// serde_json's default map is a BTreeMap, so keys come out sorted; the
/// compact writer emits no insignificant whitespace.
pub fn to_canonical_string(v: &Value) -> String {
    serde_json::to_string(&canonicalize_numbers(v.clone())).expect("serializable value")
}

/// Format a float the way canonical JSON would (12 significant digits,
/// shortest round-trip decimal). Used for CSV cells so both formats agree.
pub fn format_float(x: f64) -> String {
    format!("{}", round_sig(x, FLOAT_SIG_DIGITS))
}
