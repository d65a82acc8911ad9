//! Canonical JSON and request-shape helpers.

use serde::Serialize;
use serde_json::Value;

/// Compact JSON with object keys sorted at every level and floats in
/// shortest round-trip form.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(v, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Returns the dotted path of the first key in `input` that `parsed` (the
/// re-serialized typed value) does not know.
pub fn unknown_key(input: &Value, parsed: &impl Serialize, prefix: &str) -> Option<String> {
    let known = serde_json::to_value(parsed).ok()?;
    first_unknown(input, &known, prefix)
}

fn first_unknown(input: &Value, known: &Value, prefix: &str) -> Option<String> {
    let (Value::Object(a), Value::Object(b)) = (input, known) else {
        return None;
    };
    let mut keys: Vec<&String> = a.keys().collect();
    keys.sort();
    for k in keys {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match b.get(k) {
            None => return Some(path),
            Some(inner) => {
                if let Some(p) = first_unknown(&a[k], inner, &path) {
                    return Some(p);
                }
            }
        }
    }
    None
}
