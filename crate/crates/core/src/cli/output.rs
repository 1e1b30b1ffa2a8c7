//! Table and document rendering shared by the subcommands.

use serde::Serialize;
use serde_json::{Map, Value};

/// Shortest decimal form that re-parses to the same `f64`, switching to
/// exponent notation far from unit scale.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Empty cell for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `# key=value` lines for a metadata block.
pub fn comment_block<T: Serialize>(meta: &T) -> String {
    let mut out = String::new();
    if let Ok(Value::Object(map)) = serde_json::to_value(meta) {
        for (k, v) in map {
            let text = match v {
                Value::String(s) => s,
                Value::Null => String::new(),
                Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k}={text}\n"));
        }
    }
    out
}

/// CSV document: metadata comments, header, rows.
pub fn csv<T: Serialize>(meta: &T, header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = comment_block(meta);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// JSON document `{"metadata": .., <key>: ..}`.
pub fn json<M: Serialize, B: Serialize>(meta: &M, key: &str, body: &B) -> String {
    let mut doc = Map::new();
    doc.insert(
        "metadata".into(),
        serde_json::to_value(meta).unwrap_or(Value::Null),
    );
    doc.insert(
        key.into(),
        serde_json::to_value(body).unwrap_or(Value::Null),
    );
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).unwrap_or_default();
    s.push('\n');
    s
}
