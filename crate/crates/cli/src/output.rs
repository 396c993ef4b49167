//! File writers. Every file carries the resolved config: CSV files in a
//! leading `# config=` comment line, JSON files in a `config` field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::failure::CmdResult;

pub const TOOL: &str = "memdim";

/// `{:.16e}`: 17 significant digits, round-trip safe, locale free.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct CsvWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path, command: &str, config: &RunConfig, header: &[&str]) -> CmdResult<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# {TOOL} {} {command}", memdim_core::VERSION)?;
        writeln!(out, "# config={}", serde_json::to_string(config)?)?;
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter { out, path: path.to_path_buf() })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> std::io::Result<()> {
        let line: Vec<String> = fields.iter().map(|f| escape(f.as_ref())).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    pub fn finish(mut self) -> CmdResult<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// Header plus rows of already-formatted fields; written as CSV or as a JSON
/// array of objects (numeric-looking fields become numbers, empty ones null).
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, stem: &str, format: Format, command: &str, config: &RunConfig) -> CmdResult<PathBuf> {
        match format {
            Format::Csv => {
                let mut w = CsvWriter::create(&dir.join(format!("{stem}.csv")), command, config, &self.columns)?;
                for r in &self.rows {
                    w.row(r)?;
                }
                w.finish()
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj = self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), json_cell(v))).collect();
                        Value::Object(obj)
                    })
                    .collect();
                write_json(dir, stem, command, config, &rows)
            }
        }
    }
}

fn json_cell(v: &str) -> Value {
    if v.is_empty() {
        return Value::Null;
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => Value::String(v.to_string()),
    }
}

/// Writes `{stem}.json` as `{tool, version, command, config, result}`.
pub fn write_json<T: Serialize + ?Sized>(
    dir: &Path,
    stem: &str,
    command: &str,
    config: &RunConfig,
    result: &T,
) -> CmdResult<PathBuf> {
    let doc = json!({
        "tool": TOOL,
        "version": memdim_core::VERSION,
        "command": command,
        "config": config,
        "result": result,
    });
    let path = dir.join(format!("{stem}.json"));
    let mut out = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(path)
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
