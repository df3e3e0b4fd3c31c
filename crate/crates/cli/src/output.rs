//! Pinned number formatting and CSV/JSON emission.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::config_err;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Scientific notation with 17 significant digits; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number, or the string sentinel for non-finite values.
pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(sci(x)),
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s += &r.join(",");
            s.push('\n');
        }
        s
    }

    /// Rows as JSON objects. Cells that parse as numbers become numbers.
    pub fn json_rows(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(k, v)| {
                        let cell = match v.parse::<f64>() {
                            Ok(x) if x.is_finite() => num(x),
                            _ => Value::String(v.clone()),
                        };
                        (k.to_string(), cell)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Top-level object tagged with the schema version and command name.
pub fn document(command: &str, mut fields: Map<String, Value>) -> Value {
    fields.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    fields.insert("command".into(), Value::from(command));
    Value::Object(fields)
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// Write to `path`, or standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| config_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sci(1.0), "1.0000000000000000e0");
        assert_eq!(sci(-0.1), "-1.0000000000000001e-1");
        assert_eq!(sci(f64::INFINITY), "inf");
        let x = 0.1 + 0.2;
        assert_eq!(sci(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn non_finite_json() {
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(num(2.5), serde_json::json!(2.5));
    }
}
