use crate::UsageError;
use anyhow::{Context, Result};
use baryclust::data::DataError;
use baryclust::{Dataset, Partition, RawTable, VariableSchema};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub fn read_schema(path: &Path) -> Result<VariableSchema> {
    let text = fs::read_to_string(path).with_context(|| format!("reading schema {}", path.display()))?;
    let schema: VariableSchema =
        serde_json::from_str(&text).with_context(|| format!("parsing schema {}", path.display()))?;
    schema.validate()?;
    Ok(schema)
}

pub fn read_raw(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(RawTable { header, rows })
}

/// Typed table plus the 0-based input row of every kept row.
pub fn read_table(data: &Path, schema: &VariableSchema, drop_incomplete: bool) -> Result<(Dataset, Vec<usize>)> {
    let raw = read_raw(data)?;
    raw.typed_with_rows(schema, drop_incomplete)
        .map_err(|e: DataError| anyhow::Error::new(e))
        .with_context(|| format!("loading {}", data.display()))
}

pub fn read_partition(path: &Path) -> Result<(Vec<usize>, Vec<usize>)> {
    let raw = read_raw(path)?;
    if raw.header != ["row_id", "cluster"] {
        return Err(UsageError(format!("{}: expected header row_id,cluster", path.display())).into());
    }
    let mut ids = Vec::with_capacity(raw.rows.len());
    let mut labels = Vec::with_capacity(raw.rows.len());
    for (i, r) in raw.rows.iter().enumerate() {
        let parse = |s: &str, what: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| UsageError(format!("{} row {}: bad {what} `{s}`", path.display(), i + 1)))
        };
        ids.push(parse(&r[0], "row_id")?);
        labels.push(parse(&r[1], "cluster")?);
    }
    Ok((ids, labels))
}

pub fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

pub fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_json(out: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(out, name, text)
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

pub fn partition_csv(row_ids: &[usize], p: &Partition) -> Result<String> {
    csv_text(
        &["row_id", "cluster"],
        row_ids
            .iter()
            .zip(p.labels())
            .map(|(id, l)| vec![id.to_string(), l.to_string()]),
    )
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Run record written next to the outputs. Holds no timestamps, so a rerun
/// with the same arguments and inputs reproduces it byte for byte.
pub struct Manifest {
    command: &'static str,
    argv: Vec<String>,
    config: Value,
    seeds: Value,
    inputs: Vec<Value>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str, argv: &[String], config: Value) -> Self {
        Manifest {
            command,
            argv: argv.to_vec(),
            config,
            seeds: Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seeds(&mut self, seeds: Value) {
        self.seeds = seeds;
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(json!({
            "path": path.display().to_string(),
            "sha256": sha256_file(path)?,
        }));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.outputs.push(name);
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        let value = json!({
            "tool": "baryclust",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "argv": self.argv,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        write_json(out, "manifest.json", &value)?;
        Ok(())
    }
}
