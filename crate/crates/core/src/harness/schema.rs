//! The report schemas shipped with the crate and a checker for the subset
//! of JSON Schema they use: type, required, properties,
//! additionalProperties (false only), items, enum and minimum.

use super::HarnessError;
use serde_json::Value;

pub const MODEL: &str = include_str!("../../schemas/model.schema.json");
pub const TRANSCRIPT_REPORT: &str = include_str!("../../schemas/transcript_report.schema.json");
pub const EXPERIMENT_REPORT: &str = include_str!("../../schemas/experiment_report.schema.json");
pub const LEAKAGE_REPORT: &str = include_str!("../../schemas/leakage_report.schema.json");

pub fn parse(schema: &str) -> Value {
    serde_json::from_str(schema).expect("bundled schema is valid JSON")
}

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
        _ => false,
    }
}

/// Returns every violation as "path: message".
pub fn violations(schema: &Value, doc: &Value) -> Vec<String> {
    let mut out = Vec::new();
    walk(schema, doc, "$", &mut out);
    out
}

pub fn validate(schema: &str, doc: &Value) -> Result<(), HarnessError> {
    let v = violations(&parse(schema), doc);
    if v.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Schema(v.join("; ")))
    }
}

fn walk(s: &Value, v: &Value, path: &str, out: &mut Vec<String>) {
    let Some(s) = s.as_object() else { return };
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_ok(t, v),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_ok(t, v)),
            _ => true,
        };
        if !ok {
            out.push(format!("{path}: expected type {t}, got {v}"));
            return;
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            out.push(format!("{path}: {v} not in {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            out.push(format!("{path}: {x} below minimum {min}"));
        }
    }
    if let Some(obj) = v.as_object() {
        if let Some(Value::Array(req)) = s.get("required") {
            for r in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(r) {
                    out.push(format!("{path}: missing required {r:?}"));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        if let Some(props) = props {
            for (k, sub) in props {
                if let Some(x) = obj.get(k) {
                    walk(sub, x, &format!("{path}.{k}"), out);
                }
            }
        }
        if s.get("additionalProperties") == Some(&Value::Bool(false)) {
            for k in obj.keys() {
                if !props.is_some_and(|p| p.contains_key(k)) {
                    out.push(format!("{path}: unexpected property {k:?}"));
                }
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            walk(items, x, &format!("{path}[{i}]"), out);
        }
    }
}
