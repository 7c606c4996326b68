//! Numeric CSV files: comma separated, header row required, no blank cells.

use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn ncols(&self) -> usize {
        self.header.len()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.ncols())
            .map(|j| self.rows.iter().map(|r| r[j]).collect())
            .collect()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if let csv::ErrorKind::Io(_) = e.kind() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => {
                return CliError::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
            _ => unreachable!(),
        }
    }
    CliError::data(path, e.to_string())
}

pub fn read(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(CliError::data(path, "missing header row"));
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(r + 2, |p| p.line() as usize);
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let at = || format!("line {line}, column {} ({:?})", c + 1, header[c]);
                if cell.is_empty() {
                    return Err(CliError::data(path, format!("{}: blank cell", at())));
                }
                match cell.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(CliError::data(
                        path,
                        format!("{}: {cell:?} is not a finite number", at()),
                    )),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn write(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(f64::to_string))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(io)
}
