//! CSV ingestion and output formatting shared by the subcommands.
//!
//! Numbers are written with Rust's default float formatting, which is
//! the shortest decimal string that parses back to the same bits, so
//! our own CSV output round-trips exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use sireg_core::linalg::Matrix;

use crate::failure::{CliResult, Failure};

fn open_reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path)
        .map_err(|e| Failure::validation(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn parse_cell(field: &str, path: &Path, row: usize, col: usize) -> CliResult<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Failure::validation(format!(
            "{}: row {}, column {}: not a number: {:?}",
            path.display(),
            row + 1,
            col + 1,
            field
        ))
    })
}

/// Reads a numeric matrix from CSV. A first row that does not parse as
/// numbers is treated as a header and skipped.
pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let mut reader = open_reader(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| Failure::validation(format!("{}: row {}: {e}", path.display(), idx + 1)))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let looks_like_header =
            idx == 0 && record.iter().any(|f| f.trim().parse::<f64>().is_err());
        if looks_like_header {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            row.push(parse_cell(field, path, idx, col)?);
        }
        if rows.is_empty() {
            width = row.len();
        } else if row.len() != width {
            return Err(Failure::validation(format!(
                "{}: row {} has {} columns, expected {}",
                path.display(),
                idx + 1,
                row.len(),
                width
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Failure::validation(format!(
            "{}: no numeric rows found",
            path.display()
        )));
    }
    Matrix::from_rows(&rows).map_err(Failure::from)
}

/// Reads a single-column CSV as a vector (multi-column files are
/// rejected so a transposed input fails loudly).
pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Failure::validation(format!(
            "{}: expected a single column, found {}",
            path.display(),
            m.ncols()
        )));
    }
    Ok((0..m.nrows()).map(|i| m.row(i)[0]).collect())
}

/// Output sink: a file when `--out` is given, stdout otherwise.
pub fn open_sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| {
                Failure::runtime(format!("cannot create {}: {e}", path.display()))
            })?;
            Ok(Box::new(f))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}

/// Writes rows as CSV with a header row.
pub fn write_csv(sink: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let emit = |w: &mut dyn Write, fields: &[String]| -> std::io::Result<()> {
        writeln!(w, "{}", fields.join(","))
    };
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    emit(sink, &header)
        .and_then(|_| rows.iter().try_for_each(|r| emit(sink, r)))
        .map_err(|e| Failure::runtime(format!("write failed: {e}")))
}

/// Writes rows as a plain-text table with aligned columns.
pub fn write_table(sink: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut line = |fields: &[String]| -> std::io::Result<()> {
        let mut out = String::new();
        for c in 0..cols {
            if c > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:<width$}", fields[c], width = widths[c]));
        }
        writeln!(sink, "{}", out.trim_end())
    };
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    line(&header)
        .and_then(|_| rows.iter().try_for_each(|r| line(r)))
        .map_err(|e| Failure::runtime(format!("write failed: {e}")))
}

/// Shortest round-tripping decimal representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Table,
}

impl OutputFormat {
    pub fn write(
        &self,
        sink: &mut dyn Write,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> CliResult<()> {
        match self {
            OutputFormat::Csv => write_csv(sink, header, rows),
            OutputFormat::Table => write_table(sink, header, rows),
        }
    }
}
