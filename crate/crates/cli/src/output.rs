use serde_json::{Map, Value};

use crate::args::Format;
use crate::CliError;

pub const SCHEMA: u64 = 1;
/// `value` fields are null below this log value.
pub const LOG_VALUE_FLOOR: f64 = -700.0;

pub fn value_or_null(log_value: f64) -> Value {
    if log_value < LOG_VALUE_FLOOR || !log_value.is_finite() {
        Value::Null
    } else {
        Value::from(log_value.exp())
    }
}

/// Object with `"schema"` first, then the fields of `body`.
pub fn with_schema(body: Value) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), SCHEMA.into());
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    Value::Object(map)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// A single result as JSON, or as a one-row CSV of its top-level fields.
pub fn render(value: &Value, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(format!(
            "{}\n",
            serde_json::to_string_pretty(value).expect("serialisable")
        )),
        Format::Csv => {
            let obj = value
                .as_object()
                .ok_or_else(|| CliError::config("result is not an object"))?;
            let header: Vec<&str> = obj.keys().map(String::as_str).collect();
            let row: Vec<String> = obj.values().map(cell).collect();
            csv_text(&header, &[row])
        }
    }
}

pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError {
        code: crate::EXIT_NUMERIC,
        message: format!("csv: {e}"),
    };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError {
        code: crate::EXIT_NUMERIC,
        message: format!("csv: {e}"),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Shortest round-trip text for a number, empty when absent or non-finite.
pub fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:?}"),
        Some(x) if x == f64::NEG_INFINITY => "-inf".into(),
        _ => String::new(),
    }
}
