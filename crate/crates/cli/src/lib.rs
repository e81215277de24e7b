//! Batch front end for `pickforge-core`: JSON problem files in, JSON
//! reports (and an optional CSV of sampled kernel eigenvalues) out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod encode;
pub mod schema;

pub use commands::{run_check, run_solve, run_verify, CliError, Outcome, ParamSource, RunOptions};

use serde_json::Value;

/// Indented JSON with arrays of scalars kept on one line, plus a trailing
/// newline.
pub fn render(report: &Value) -> String {
    let mut out = String::new();
    write_value(report, 0, &mut out);
    out.push('\n');
    out
}

fn scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(scalar) => {
            let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn render_round_trips_and_inlines_pairs() {
        let v = json!({"b": [[1.5, -0.0], [2.0, 3.0]], "a": {"x": [], "y": null}, "s": "q\"r"});
        let text = render(&v);
        assert!(text.contains("[1.5, -0.0]"));
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), v);
    }
}
