use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Rounds to 12 significant digits and prints the shortest representation.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    // avoid "-0"
    if rounded == 0.0 {
        return "0".into();
    }
    if rounded.abs() < 1e-6 || rounded.abs() >= 1e16 {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A cell of a table: numbers keep 12 significant digits in both formats.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    OptNum(Option<f64>),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => num(*x),
            Cell::OptNum(x) => opt_num(*x),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => json_num(*x),
            Cell::OptNum(x) => x.map_or(Value::Null, json_num),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

pub fn json_num(x: f64) -> Value {
    num(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

/// Column names plus rows, in a fixed column order.
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        Ok(w.into_inner().context("flushing csv buffer")?)
    }

    fn to_json(&self) -> Result<Vec<u8>> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut bytes = serde_json::to_vec_pretty(&rows)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Collects the files of one command run and finishes with its manifest.
pub struct Run {
    dir: PathBuf,
    format: Format,
    command: &'static str,
    started: DateTime<Utc>,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn start(dir: &Path, format: Format, command: &'static str) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            command,
            started: Utc::now(),
            outputs: Vec::new(),
        })
    }

    /// Writes `stem.csv` or `stem.json` depending on the chosen format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(format!("{stem}.{}", self.format.extension()));
        let bytes = match self.format {
            Format::Csv => table.to_csv()?,
            Format::Json => table.to_json()?,
        };
        write_atomic(&path, &bytes)?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn json(&mut self, stem: &str, value: &Value) -> Result<()> {
        let path = self.dir.join(format!("{stem}.json"));
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        self.outputs.push(path);
        Ok(())
    }

    /// Writes `<command>_manifest.json` describing every file of this run.
    pub fn finish(self, config: Value, seed: u64, extra: Map<String, Value>) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}_manifest.json", self.command));
        let mut manifest = Map::new();
        manifest.insert("tool".into(), Value::from(env!("CARGO_PKG_NAME")));
        manifest.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        manifest.insert("command".into(), Value::from(self.command));
        manifest.insert("format".into(), Value::from(self.format.extension()));
        manifest.insert("seed".into(), Value::from(seed));
        manifest.insert("config".into(), config);
        manifest.insert("started_at".into(), Value::from(self.started.to_rfc3339()));
        manifest.insert("finished_at".into(), Value::from(Utc::now().to_rfc3339()));
        manifest.insert(
            "outputs".into(),
            Value::from(
                self.outputs
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        manifest.extend(extra);
        let mut bytes = serde_json::to_vec_pretty(&Value::Object(manifest))?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}
