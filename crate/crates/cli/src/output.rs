//! CSV documents with `#` header comments.

use std::io::Write;
use std::path::Path;

use crate::config::RunConfig;
use crate::{CliError, VERSION};

/// Shortest representation that parses back to the same `f64`.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Parses a field written by [`float`].
pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    columns: Option<String>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let mut header = vec![format!("polariton-lab {VERSION}"), format!("command = {command}")];
        header.extend(cfg.echo().into_iter().map(|(k, v)| format!("{k} = {v}")));
        if cfg.g_override() {
            header.push("note = g_a != -g_b (Lande factors overridden)".to_string());
        }
        Table { header, columns: None, rows: Vec::new() }
    }

    /// Adds a derived `key = value` line to the header.
    pub fn note(&mut self, key: &str, value: &str) {
        self.header.push(format!("{key} = {value}"));
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.columns = Some(names.join(","));
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn finish(self) -> String {
        let mut out = String::new();
        for h in self.header {
            out.push_str("# ");
            out.push_str(&h);
            out.push('\n');
        }
        if let Some(c) = self.columns {
            out.push_str(&c);
            out.push('\n');
        }
        for r in self.rows {
            out.push_str(&r);
            out.push('\n');
        }
        out
    }
}

/// Writes `doc` to `path`, or standard output.
pub fn write(path: Option<&Path>, doc: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, doc).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(doc.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

/// A parsed CSV document: header comment lines, column names, data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Document {
    pub fn parse(text: &str) -> Document {
        let mut header = Vec::new();
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(h) = line.strip_prefix("# ") {
                header.push(h.to_string());
            } else if columns.is_empty() {
                columns = line.split(',').map(String::from).collect();
            } else {
                rows.push(line.split(',').map(String::from).collect());
            }
        }
        Document { header, columns, rows }
    }

    /// Value of a `key = value` header line.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find_map(|h| h.strip_prefix(key)?.strip_prefix(" = "))
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| parse_float(r.get(i)?)).collect()
    }
}
