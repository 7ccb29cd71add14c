use crate::CliError;
use serde_json::{json, Map, Value};

/// Numeric table written as CSV: header row, comma delimiter, LF endings,
/// floats with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn from_columns(header: &[&str], cols: &[&[f64]]) -> Table {
        let len = cols.iter().map(|c| c.len()).min().unwrap_or(0);
        let mut t = Table::new(header);
        t.rows = (0..len).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        t
    }

    pub fn write(&self, path: &str) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Result of one command before serialization.
#[derive(Debug, Default)]
pub struct Report {
    pub config: Map<String, Value>,
    pub results: Map<String, Value>,
    /// Named checks; a false entry makes the run exit with code 1.
    pub invariants: Vec<(String, bool)>,
    pub tables: Vec<(String, Table)>,
}

impl Report {
    pub fn config(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.config.insert(key.into(), v.into());
        self
    }

    pub fn result(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.results.insert(key.into(), v.into());
        self
    }

    pub fn invariant(&mut self, name: &str, ok: bool) -> &mut Self {
        self.invariants.push((name.into(), ok));
        self
    }

    pub fn table(&mut self, path: Option<&String>, t: Table) -> &mut Self {
        if let Some(p) = path {
            self.tables.push((p.clone(), t));
        }
        self
    }

    pub fn write_tables(&self) -> Result<(), CliError> {
        for (p, t) in &self.tables {
            t.write(p)?;
        }
        Ok(())
    }

    pub fn failed_invariant(&self) -> Option<&str> {
        self.invariants.iter().find(|(_, ok)| !ok).map(|(n, _)| n.as_str())
    }

    pub fn document(&self, command: &str) -> String {
        let mut results = self.results.clone();
        if !self.invariants.is_empty() {
            let inv: Map<String, Value> = self.invariants.iter().map(|(n, ok)| (n.clone(), json!(ok))).collect();
            results.insert("invariants".into(), Value::Object(inv));
        }
        let doc = json!({"command": command, "config": self.config, "results": results});
        serde_json::to_string_pretty(&doc).expect("JSON values always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 2.0 / std::f64::consts::PI, 1e-300, -3.5] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(3.0), "3.0000000000000000e0");
    }
}
