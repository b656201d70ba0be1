use li_core::decimal::format_significant;
use serde_json::{Map, Number, Value};

use crate::args::Format;

/// Numbers rounded half-even to a fixed count of significant digits.
#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub digits: usize,
}

impl Numbers {
    pub fn num(&self, x: f64) -> Value {
        let text = format_significant(x, self.digits);
        match text.parse::<Number>() {
            Ok(n) => Value::Number(n),
            Err(_) => Value::Null,
        }
    }

    pub fn list(&self, xs: &[f64]) -> Value {
        Value::Array(xs.iter().map(|&x| self.num(x)).collect())
    }
}

pub fn object<const N: usize>(fields: [(&str, Value); N]) -> Value {
    let mut map = Map::new();
    for (k, v) in fields {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
        Format::Table => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let width = rows
                .iter()
                .map(|(k, _)| k.chars().count())
                .max()
                .unwrap_or(0);
            rows.iter()
                .map(|(k, v)| format!("{k:<width$}  {v}\n"))
                .collect()
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) => {
            if let Some(parts) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                rows.push((prefix.to_string(), parts.join(", ")));
            } else {
                for (i, v) in items.iter().enumerate() {
                    flatten(&format!("{prefix}[{i}]"), v, rows);
                }
            }
        }
        other => rows.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}
