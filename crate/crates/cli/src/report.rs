//! Canonical report envelope and CSV tables.

use std::io::Write;

use serde_json::{Map, Value};

/// Report key order is fixed: `command`, `config`, `results`, `version`,
/// then `seed` for stochastic commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub seed: Option<u64>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(self.command.clone()));
        map.insert("config".into(), self.config.clone());
        map.insert("results".into(), self.results.clone());
        map.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        if let Some(seed) = self.seed {
            map.insert("seed".into(), Value::from(seed));
        }
        Value::Object(map)
    }

    pub fn to_json(&self) -> String {
        canonical_json(&self.to_value())
    }
}

/// Pretty-printed with a trailing newline; floats in shortest round-trip form.
pub fn canonical_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, out: &mut dyn Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Same digits as the JSON report; non-finite values spelled out.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number, or `null` when not finite.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}
