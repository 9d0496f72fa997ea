//! CSV formats.
//!
//! Curves: the first row holds the abscissae, every following row one
//! observation sampled at them. Responses and predictions: one value per
//! row, same order as the curves; a non-numeric first row is read as a
//! header. Separator `,`, decimal point `.`, values written with 17
//! significant digits.

use std::fs;
use std::path::Path;

use flrd::SampledCurve;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn parse_row(path: &Path, row: usize, line: &str) -> CliResult<Vec<f64>> {
    line.split(',')
        .enumerate()
        .map(|(col, field)| {
            let field = field.trim();
            field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Parse {
                path: path.to_path_buf(),
                row,
                column: col + 1,
                message: format!("`{field}` is not a finite number"),
            })
        })
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_curves(path: &Path, text: &str) -> CliResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut lines = data_lines(text);
    let (row, first) = lines.next().ok_or_else(|| CliError::Parse {
        path: path.to_path_buf(),
        row: 1,
        column: 1,
        message: "file is empty; expected a row of abscissae".into(),
    })?;
    let abscissae = parse_row(path, row, first)?;
    let mut rows = Vec::new();
    for (row, line) in lines {
        let values = parse_row(path, row, line)?;
        if values.len() != abscissae.len() {
            return Err(CliError::Mismatch(format!(
                "{}: row {row} has {} values but there are {} abscissae",
                path.display(),
                values.len(),
                abscissae.len()
            )));
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            row: row + 1,
            column: 1,
            message: "no observations after the abscissae row".into(),
        });
    }
    Ok((abscissae, rows))
}

pub fn read_curves(path: &Path) -> CliResult<(Vec<f64>, Vec<SampledCurve>)> {
    let (abscissae, rows) = parse_curves(path, &read_text(path)?)?;
    let curves = rows
        .into_iter()
        .map(|v| SampledCurve::new(abscissae.clone(), v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((abscissae, curves))
}

pub fn parse_column(path: &Path, text: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, (row, line)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                row,
                column: 2,
                message: format!("expected a single column, found {}", fields.len()),
            });
        }
        match parse_row(path, row, line) {
            Ok(v) => out.push(v[0]),
            Err(_) if idx == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            row: 1,
            column: 1,
            message: "no values".into(),
        });
    }
    Ok(out)
}

pub fn read_column(path: &Path) -> CliResult<Vec<f64>> {
    parse_column(path, &read_text(path)?)
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_curves(abscissae: &[f64], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in std::iter::once(abscissae).chain(rows.iter().map(Vec::as_slice)) {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn render_column(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v) + "\n").collect()
}
