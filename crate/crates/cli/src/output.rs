//! CSV and JSON emission.
//!
//! Every command builds a [`Report`]: one JSON document plus one or more
//! tables. In CSV mode the main table goes to the output path (or stdout)
//! and each extra table to `<stem>.<name>.csv` next to it (or stderr when
//! writing to stdout).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Bumped whenever a column or JSON field changes meaning.
pub const SCHEMA_VERSION: &str = "1.0";

/// Placeholder for quantities that are undefined at a row.
pub const NA: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_to<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), num)
}

pub struct Report {
    pub json: Value,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new<T: Serialize>(command: &str, body: &T, tables: Vec<Table>) -> Self {
        let mut json = serde_json::to_value(body).expect("report bodies serialize");
        if let Value::Object(map) = &mut json {
            map.insert("schema_version".into(), SCHEMA_VERSION.into());
            map.insert("command".into(), command.into());
        }
        Report { json, tables }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        match format {
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&self.json).expect("valid JSON");
                text.push('\n');
                match out {
                    Some(p) => write_file(p, |f| f.write_all(text.as_bytes()).map_err(Into::into)),
                    None => std::io::stdout()
                        .write_all(text.as_bytes())
                        .map_err(|e| io_error("<stdout>", e)),
                }
            }
            Format::Csv => {
                let (main, extra) = self.tables.split_first().expect("at least one table");
                match out {
                    Some(p) => {
                        write_file(p, |f| main.write_to(f))?;
                        for t in extra {
                            write_file(&sibling(p, t.name), |f| t.write_to(f))?;
                        }
                        Ok(())
                    }
                    None => {
                        main.write_to(std::io::stdout().lock())
                            .map_err(|e| io_error("<stdout>", e.into()))?;
                        for t in extra {
                            t.write_to(std::io::stderr().lock())
                                .map_err(|e| io_error("<stderr>", e.into()))?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

/// `out/curves.csv` + `summary` -> `out/curves.summary.csv`.
pub fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{name}.csv"))
}

fn io_error(path: &str, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_string(),
        source,
    }
}

fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), csv::Error>,
{
    let file = std::fs::File::create(path).map_err(|e| io_error(&path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w).map_err(|e| io_error(&path.display().to_string(), e.into()))?;
    w.flush().map_err(|e| io_error(&path.display().to_string(), e))
}
