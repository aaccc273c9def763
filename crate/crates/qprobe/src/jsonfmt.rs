//! JSON encoding helpers for numeric artifacts.
//!
//! Every float written to a dataset, model or metrics file is encoded with
//! 17 significant decimal digits, which round-trips `f64` bit-exactly. Values
//! are assembled as `serde_json::Value` trees (keys serialize in sorted
//! order), so identical inputs produce byte-identical files.

use serde_json::{Number, Value};

use crate::error::{Error, Result};

/// Render a finite double with 17 significant digits (round-trips bit-exactly).
pub fn format17(x: f64) -> String {
    debug_assert!(x.is_finite(), "artifact floats must be finite");
    format!("{x:.16e}")
}

/// Encode a finite double with 17 significant digits.
pub fn number(x: f64) -> Value {
    let n: Number = format17(x)
        .parse()
        .expect("17-digit float literal is valid JSON");
    Value::Number(n)
}

/// Encode a slice of doubles.
pub fn number_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| number(x)).collect())
}

/// Extract a finite f64 from a JSON value.
pub fn as_f64(v: &Value, context: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("{context}: expected a finite number, got {v}")))
}

/// Extract an f64 array from a JSON value.
pub fn as_f64_array(v: &Value, context: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{context}: expected an array")))?
        .iter()
        .map(|x| as_f64(x, context))
        .collect()
}
