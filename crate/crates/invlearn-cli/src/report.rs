//! Machine-readable run reports.
//!
//! The report body is a deterministic function of the effective config and
//! seed: JSON objects are sorted-key maps and every number is either tagged
//! exact (a rational string) or carries its sample count and confidence
//! radius. Wall-clock time lives outside the body so reruns are
//! byte-identical.

use std::collections::BTreeMap;

use invlearn::stats::DistanceReport;
use serde_json::{json, Value};

/// The JSON form of a distance measurement: exact values carry the rational,
/// estimates carry their sample count and confidence radius.
pub fn distance_to_json(report: &DistanceReport) -> Value {
    let mut value = json!({
        "exact": report.exact,
        "value": report.value,
        "radius": report.radius,
    });
    if let Some(rational) = &report.exact_value {
        value["value_exact"] = json!(format!("{}/{}", rational.numer(), rational.denom()));
    }
    if let Some(samples) = report.samples {
        value["samples"] = json!(samples);
    }
    value
}

/// A completed run: deterministic body plus timing metadata.
pub struct Report {
    pub body: Value,
    pub wall_ms: u128,
    /// Whether any configured bound was violated (exit code 3).
    pub violation: bool,
}

impl Report {
    pub fn new(
        command: &str,
        config_echo: BTreeMap<String, String>,
        results: Value,
        warnings: Vec<String>,
        violations: Vec<String>,
    ) -> Self {
        let violation = !violations.is_empty();
        let body = json!({
            "command": command,
            "config": config_echo,
            "results": results,
            "warnings": warnings,
            "violations": violations,
        });
        Self {
            body,
            wall_ms: 0,
            violation,
        }
    }

    pub fn to_json_string(&self) -> String {
        let full = json!({
            "body": self.body,
            "meta": { "wall_ms": self.wall_ms as u64 },
        });
        serde_json::to_string_pretty(&full).expect("report serializes")
    }

    /// Flat `path,value` summary rows, body only.
    pub fn to_csv_string(&self) -> String {
        let mut rows = vec!["key,value".to_string()];
        flatten("", &self.body, &mut rows);
        rows.push(format!("meta.wall_ms,{}", self.wall_ms));
        let mut text = rows.join("\n");
        text.push('\n');
        text
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, child, rows);
            }
        }
        Value::Array(items) => {
            for (idx, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{idx}]"), child, rows);
            }
        }
        leaf => rows.push(format!("{prefix},{}", csv_escape(leaf))),
    }
}

fn csv_escape(value: &Value) -> String {
    let text = match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}
