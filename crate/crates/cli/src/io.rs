//! CSV ingestion and atomic output.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Serialize};
use srfe::PointSet;

use crate::error::{CliError, CliResult};

/// A numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(CliError::Data(format!(
            "{}: a header row is required",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .zip(&header)
            .map(|(field, name)| {
                let v: f64 = field.trim().parse().map_err(|_| {
                    CliError::Data(format!(
                        "{}: line {line}: column `{name}`: `{field}` is not a number",
                        path.display()
                    ))
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(CliError::Data(format!(
                        "{}: line {line}: column `{name}` is not finite",
                        path.display()
                    )))
                }
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Index of the target column: `name` if given (a header name or a
/// zero-based index), otherwise the last column.
pub fn target_index(table: &Table, name: Option<&str>) -> CliResult<usize> {
    match name {
        None => Ok(table.header.len() - 1),
        Some(n) => table
            .header
            .iter()
            .position(|h| h == n)
            .or_else(|| n.parse::<usize>().ok().filter(|&i| i < table.header.len()))
            .ok_or_else(|| {
                CliError::Data(format!(
                    "target column `{n}` not found in {:?}",
                    table.header
                ))
            }),
    }
}

/// Inputs and targets, with the target column removed from the inputs.
pub fn split_target(table: &Table, target: usize) -> CliResult<(PointSet<f64>, Vec<f64>)> {
    if table.header.len() < 2 {
        return Err(CliError::Data(
            "need at least one input column and a target column".into(),
        ));
    }
    let dim = table.header.len() - 1;
    let mut coords = Vec::with_capacity(table.rows.len() * dim);
    let mut y = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        for (i, &v) in row.iter().enumerate() {
            if i == target {
                y.push(v);
            } else {
                coords.push(v);
            }
        }
    }
    Ok((PointSet::new(dim, coords, srfe::Provenance::External)?, y))
}

pub fn points(table: &Table) -> CliResult<PointSet<f64>> {
    let dim = table.header.len();
    let coords = table.rows.iter().flatten().copied().collect();
    Ok(PointSet::new(dim, coords, srfe::Provenance::External)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Writes via a temporary file in the same directory and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let internal = |e: std::io::Error| CliError::Internal(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(internal)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(internal)?;
    tmp.write_all(bytes).map_err(internal)?;
    tmp.as_file().sync_all().map_err(internal)?;
    tmp.persist(path).map_err(|e| internal(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// CSV text from a header and equally long columns.
pub fn csv_columns(header: &[&str], columns: &[&[f64]]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    let n = columns.first().map_or(0, |c| c.len());
    for k in 0..n {
        w.write_record(columns.iter().map(|c| c[k].to_string()))
            .map_err(internal)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}
