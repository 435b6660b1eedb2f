//! Design CSV files: header `x1,...,xK`, one run per row, values written with
//! 17 significant digits so every `f64` round-trips exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn design_to_csv_string(design: &DesignMatrix) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=design.k()).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in design.rows() {
        let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_design_csv(path: &Path, design: &DesignMatrix) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(design_to_csv_string(design).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_design_csv(path: &Path) -> Result<DesignMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_design_csv(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

/// Parses design CSV text; errors name the offending line and column.
pub fn parse_design_csv(text: &str) -> std::result::Result<DesignMatrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format!("header: {e}"))?.clone();
    let k = header.len();
    if k == 0 {
        return Err("empty header".into());
    }
    for (j, name) in header.iter().enumerate() {
        let want = format!("x{}", j + 1);
        if name != want {
            return Err(format!("header column {}: expected `{want}`, found `{name}`", j + 1));
        }
    }
    let mut data = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => format!("line {}: {e}", pos.line()),
            None => e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != k {
            return Err(format!(
                "line {line}: expected {k} columns, found {}",
                record.len()
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| format!("line {line}, column x{}: cannot parse `{cell}`", j + 1))?;
            if !v.is_finite() {
                return Err(format!("line {line}, column x{}: value is not finite", j + 1));
            }
            data.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err("design has no rows".into());
    }
    DesignMatrix::from_row_major(n, k, data).map_err(|e| e.to_string())
}
