//! Output formats: versioned JSON documents, CSV with round-trip-safe reals,
//! and plain `key  value` text.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Args;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliResult;

/// Version of every JSON document's layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FormatArgs {
    /// Emit a JSON document (top-level "schemaVersion": 1).
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV with a header row and 17 significant digits for reals.
    #[arg(long)]
    csv: bool,
}

impl FormatArgs {
    /// The requested format, or `default` if neither flag is set.
    pub fn format(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            default
        }
    }
}

/// Stdout, or the file named by `--out`.
pub fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// A real with 17 significant digits, `.` as decimal separator.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn versioned(body: Value) -> Value {
    let mut doc = Map::new();
    doc.insert("schemaVersion".into(), Value::from(SCHEMA_VERSION));
    match body {
        Value::Object(m) => doc.extend(m),
        other => {
            doc.insert("data".into(), other);
        }
    }
    Value::Object(doc)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output types serialize to JSON")
}

/// Flattens nested objects and arrays into `(key, leaf)` pairs; nested keys
/// are joined with `_`, array positions appended as indices.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}_{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

fn cell(v: &Value, csv: bool) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(f)) if csv => real(f),
            (_, _, Some(f)) => f.to_string(),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes one record.
pub fn emit<T: Serialize>(doc: &T, format: Format, out: Option<&Path>) -> CliResult<()> {
    let value = to_value(doc);
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &versioned(value)).map_err(io::Error::from)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut fields = Vec::new();
            flatten("", &value, &mut fields);
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(fields.iter().map(|(k, _)| k.as_str()))?;
            csv.write_record(fields.iter().map(|(_, v)| cell(v, true)))?;
            csv.flush()?;
            return Ok(());
        }
        Format::Text => {
            let mut fields = Vec::new();
            flatten("", &value, &mut fields);
            let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in &fields {
                let c = cell(v, false);
                writeln!(w, "{k:<width$}  {}", if c.is_empty() { "-" } else { &c })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a list of records. Text and CSV put one record per row under a
/// shared header; JSON wraps the records under `key`.
pub fn emit_table<T: Serialize>(
    key: &str,
    meta: Value,
    rows: &[T],
    format: Format,
    out: Option<&Path>,
) -> CliResult<()> {
    let mut w = sink(out)?;
    if format == Format::Json {
        let mut body = match meta {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        body.insert(key.into(), Value::Array(rows.iter().map(to_value).collect()));
        serde_json::to_writer_pretty(&mut w, &versioned(Value::Object(body))).map_err(io::Error::from)?;
        writeln!(w)?;
        w.flush()?;
        return Ok(());
    }
    let flat: Vec<Vec<(String, Value)>> = rows
        .iter()
        .map(|r| {
            let mut f = Vec::new();
            flatten("", &to_value(r), &mut f);
            f
        })
        .collect();
    let header: Vec<&str> = flat.first().map_or_else(Vec::new, |f| f.iter().map(|(k, _)| k.as_str()).collect());
    if format == Format::Csv {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&header)?;
        for row in &flat {
            csv.write_record(row.iter().map(|(_, v)| cell(v, true)))?;
        }
        csv.flush()?;
        return Ok(());
    }
    let cells: Vec<Vec<String>> = flat
        .iter()
        .map(|row| {
            row.iter()
                .map(|(_, v)| {
                    let c = cell(v, false);
                    if c.is_empty() {
                        "-".to_string()
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|j| cells.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |items: Vec<&str>| -> String {
        items
            .iter()
            .zip(&widths)
            .map(|(s, &wd)| format!("{s:<wd$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(w, "{}", line(header.clone()))?;
    for r in &cells {
        writeln!(w, "{}", line(r.iter().map(String::as_str).collect()))?;
    }
    w.flush()?;
    Ok(())
}
