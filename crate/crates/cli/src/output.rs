use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use odm_core::precision::fmt_float;
use odm_core::OdmError;
use rug::{Complex, Float};
use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: flags, values or files.
    Usage(String),
    /// A computation failed.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<OdmError> for CliError {
    fn from(e: OdmError) -> Self {
        match e {
            OdmError::InvalidArgument(_) | OdmError::Parse { .. } | OdmError::Schema { .. } | OdmError::Io(_) => {
                CliError::Usage(e.to_string())
            }
            OdmError::BranchAmbiguity(_) => CliError::Usage(format!("{e} (use --side above|below)")),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn num(x: &Float, digits: usize) -> String {
    fmt_float(x, digits)
}

pub fn parts(z: &Complex, digits: usize) -> [String; 2] {
    [fmt_float(z.real(), digits), fmt_float(z.imag(), digits)]
}

/// Rows of string cells rendered as CSV with a header, or as JSON records.
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(kind: &'static str, columns: &[&'static str]) -> Self {
        Table { kind, columns: columns.to_vec(), rows: Vec::new(), meta: Map::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_meta(mut self, key: &str, value: Value) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Numeric(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numeric(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Numeric(format!("csv: {e}")))
    }

    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), if v.is_empty() { Value::Null } else { json!(v) }))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("kind".into(), json!(self.kind));
        for (k, v) in &self.meta {
            doc.insert(k.clone(), v.clone());
        }
        doc.insert("records".into(), Value::Array(records));
        serde_json::to_string_pretty(&Value::Object(doc)).expect("json rendering is infallible") + "\n"
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
