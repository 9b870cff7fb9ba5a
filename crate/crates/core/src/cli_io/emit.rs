use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

use super::{Format, Payload, ResultEnvelope};
use crate::error::{Error, Result};

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => number(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => quote(s),
        other => quote(&other.to_string()),
    }
}

/// CSV of the payload only, so repeated runs are byte-identical.
pub fn to_csv(env: &ResultEnvelope) -> String {
    let mut out = String::new();
    match &env.payload {
        Payload::Scan(scan) => {
            let header: Vec<String> = std::iter::once(scan.index_name.clone())
                .chain(scan.columns.iter().map(|c| quote(c)))
                .collect();
            let _ = writeln!(out, "{}", header.join(","));
            for row in &scan.rows {
                let cells: Vec<String> = std::iter::once(row.index.to_string())
                    .chain(row.values.iter().map(|v| v.map(number).unwrap_or_default()))
                    .collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        Payload::Fields(fields) => {
            out.push_str("field,value\n");
            for (k, v) in fields {
                let _ = writeln!(out, "{},{}", quote(k), cell(v));
            }
        }
    }
    out
}

pub fn to_json(env: &ResultEnvelope) -> Result<String> {
    Ok(serde_json::to_string_pretty(env)? + "\n")
}

/// Writes the envelope to `path`, or to standard output.
pub fn emit(env: &ResultEnvelope, format: Format, path: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(env),
        Format::Json => to_json(env)?,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}
