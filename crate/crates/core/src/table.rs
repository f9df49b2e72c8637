//! Typed result tables and their CSV form.
//!
//! Files start with a `# config_hash=..., seed=..., version=...` comment line, then
//! the header row, then data. Floats are written with 17 significant digits so
//! they parse back to the same double. Line endings are LF.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:.16e}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
        }
    }
}

impl Value {
    /// Inverse of `Display` for the cell shapes this module writes.
    fn parse(s: &str) -> Value {
        if let Ok(v) = s.parse::<i64>() {
            return Value::Int(v);
        }
        match s {
            "true" => return Value::Bool(true),
            "false" => return Value::Bool(false),
            _ => {}
        }
        let looks_float = s.contains(['e', 'E']) || matches!(s, "NaN" | "inf" | "-inf");
        match s.parse::<f64>() {
            Ok(v) if looks_float => Value::Float(v),
            _ => Value::Text(s.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Header comment contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new<C: Serialize>(config: &C, seed: u64) -> Self {
        Provenance {
            config_hash: config_hash(config),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// First 16 hex digits of SHA-256 over the config's JSON form.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&json);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn emit_csv<W: Write>(table: &Table, prov: &Provenance, out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: "<stream>".into(),
        message: e.to_string(),
    };
    let mut out = out;
    writeln!(
        out,
        "# config_hash={}, seed={}, version={}",
        prov.config_hash, prov.seed, prov.version
    )
    .map_err(io)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::Io {
        path: "<stream>".into(),
        message: e.to_string(),
    };
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn to_csv_string(table: &Table, prov: &Provenance) -> String {
    let mut buf = Vec::new();
    emit_csv(table, prov, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn write_csv(table: &Table, prov: &Provenance, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    emit_csv(table, prov, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { message, .. } => Error::Io {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

/// Parses text produced by `emit_csv`.
pub fn parse_csv(text: &str) -> Result<(Provenance, Table)> {
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::Parse("missing header comment".into()))?;
    let prov = parse_provenance(first)?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(rest.as_bytes());
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        table.rows.push(rec.iter().map(Value::parse).collect());
    }
    Ok((prov, table))
}

fn parse_provenance(line: &str) -> Result<Provenance> {
    let body = line
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("header comment must start with '# '".into()))?;
    let mut hash = None;
    let mut seed = None;
    let mut version = None;
    for part in body.split(", ") {
        match part.split_once('=') {
            Some(("config_hash", v)) => hash = Some(v.to_string()),
            Some(("seed", v)) => seed = v.parse().ok(),
            Some(("version", v)) => version = Some(v.to_string()),
            _ => return Err(Error::Parse(format!("unexpected header field {part:?}"))),
        }
    }
    match (hash, seed, version) {
        (Some(config_hash), Some(seed), Some(version)) => Ok(Provenance {
            config_hash,
            seed,
            version,
        }),
        _ => Err(Error::Parse(
            "header comment lacks config_hash, seed or version".into(),
        )),
    }
}
