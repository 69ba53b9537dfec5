//! Report rendering: stable JSON schema and CSV tables.
//!
//! Every report serializes as
//! `{"protocol": ..., "inputs_digest": ..., "values": {...},
//!   "diagnostics": {...}}`. Numeric fields are finite JSON numbers or
//! the string `"inf"` / `"-inf"`; CSV output always carries a header
//! row.

use serde_json::{json, Map, Value};

const LN_2: f64 = std::f64::consts::LN_2;

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A report under construction: scalar values plus diagnostics.
pub struct Report {
    protocol: String,
    digest: String,
    values: Vec<(String, f64)>,
    diagnostics: Map<String, Value>,
    /// Indices of `values` that are logarithmic quantities and respond
    /// to the `--bits` display flag.
    log_scaled: Vec<usize>,
    /// Optional long table (e.g. exponent grids): header plus rows.
    table: Option<(Vec<String>, Vec<Vec<f64>>)>,
}

impl Report {
    pub fn new(protocol: &str, digest: &str) -> Self {
        Report {
            protocol: protocol.to_string(),
            digest: digest.to_string(),
            values: Vec::new(),
            diagnostics: Map::new(),
            log_scaled: Vec::new(),
            table: None,
        }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.push((key.to_string(), v));
        self
    }

    /// A value in nats that the `--bits` flag rescales at display time.
    pub fn log_value(mut self, key: &str, v: f64) -> Self {
        self.values.push((key.to_string(), v));
        self.log_scaled.push(self.values.len() - 1);
        self
    }

    pub fn diagnostic_bool(mut self, key: &str, v: bool) -> Self {
        self.diagnostics.insert(key.to_string(), Value::Bool(v));
        self
    }

    pub fn diagnostic_num(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), number(v));
        self
    }

    pub fn diagnostic_text(mut self, key: &str, v: &str) -> Self {
        self.diagnostics
            .insert(key.to_string(), Value::String(v.to_string()));
        self
    }

    pub fn table(mut self, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.table = Some((header.iter().map(|s| s.to_string()).collect(), rows));
        self
    }

    pub fn render(&self, format: Format, bits: bool) -> String {
        match format {
            Format::Json => self.render_json(bits),
            Format::Csv => self.render_csv(bits),
        }
    }

    fn scaled(&self, index: usize, bits: bool) -> f64 {
        let v = self.values[index].1;
        if bits && self.log_scaled.contains(&index) {
            v / LN_2
        } else {
            v
        }
    }

    fn render_json(&self, bits: bool) -> String {
        let mut values = Map::new();
        for (i, (k, _)) in self.values.iter().enumerate() {
            values.insert(k.clone(), number(self.scaled(i, bits)));
        }
        let mut root = json!({
            "protocol": self.protocol,
            "inputs_digest": self.digest,
            "values": Value::Object(values),
            "diagnostics": Value::Object(self.diagnostics.clone()),
        });
        if let Some((header, rows)) = &self.table {
            let table: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (h, &v) in header.iter().zip(row) {
                        obj.insert(h.clone(), number(v));
                    }
                    Value::Object(obj)
                })
                .collect();
            root.as_object_mut()
                .expect("root is an object")
                .insert("grid".to_string(), Value::Array(table));
        }
        serde_json::to_string_pretty(&root).expect("report serialization cannot fail")
    }

    fn render_csv(&self, bits: bool) -> String {
        if let Some((header, rows)) = &self.table {
            let mut out = header.join(",");
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| csv_number(*v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            return out;
        }
        let header: Vec<&str> = ["protocol", "inputs_digest"]
            .into_iter()
            .chain(self.values.iter().map(|(k, _)| k.as_str()))
            .collect();
        let mut cells = vec![self.protocol.clone(), self.digest.clone()];
        for i in 0..self.values.len() {
            cells.push(csv_number(self.scaled(i, bits)));
        }
        format!("{}\n{}\n", header.join(","), cells.join(","))
    }
}

fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        Value::String("inf".to_string())
    } else {
        Value::String("-inf".to_string())
    }
}

fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
