use std::fs;
use std::path::Path;

use dpca::Dataset;
use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::error::{CliError, CliResult};

fn reader(path: &Path) -> CliResult<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Reads a numeric matrix. A first row that does not parse as numbers is
/// taken as a header; anywhere else it is an error.
pub fn read_matrix(path: &Path) -> CliResult<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader(path)?.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if i == 0 && parsed.iter().any(Result::is_err) {
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (j, (v, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match v {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(CliError::Parse {
                        path: path.to_path_buf(),
                        row: i + 1,
                        col: j + 1,
                        message: format!("not a finite number: {raw:?}"),
                    })
                }
            }
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    row: i + 1,
                    col: row.len().min(w) + 1,
                    message: format!("expected {w} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    let width = width.ok_or_else(|| CliError::Csv {
        path: path.to_path_buf(),
        message: "no data rows".into(),
    })?;
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Array2::from_shape_vec((rows.len(), width), flat).expect("rectangular rows"))
}

pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    Ok(Dataset::from_rows(read_matrix(path)?)?)
}

/// Reads one non-negative integer label per row (optional header).
pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let mut labels = Vec::new();
    for (i, record) in reader(path)?.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = record.get(0).unwrap_or("");
        match field.parse::<usize>() {
            Ok(v) => labels.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    row: i + 1,
                    col: 1,
                    message: format!("not a non-negative integer label: {field:?}"),
                })
            }
        }
    }
    Ok(labels)
}

fn create(path: &Path) -> CliResult<fs::File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

/// Writes a matrix with the given header; values keep 17 significant digits.
pub fn write_matrix(path: &Path, header: &[String], data: ArrayView2<f64>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in data.outer_iter() {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_labels(path: &Path, labels: &[usize]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["label"]).map_err(|e| csv_error(path, e))?;
    for l in labels {
        w.write_record([l.to_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn component_header(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn rows_of(a: ArrayView2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}
