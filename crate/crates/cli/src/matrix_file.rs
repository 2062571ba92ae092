//! Plain-text matrices: a `rows cols` header, then row-major `re im` pairs.

use std::path::Path;

use haarint::ComplexMatrix;
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

pub fn parse(text: &str) -> CliResult<ComplexMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(CliError::MatrixFile { line: 1, message: "empty file".into() })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let bad = |line: usize, message: String| CliError::MatrixFile { line: line + 1, message };
    if dims.len() != 2 {
        return Err(bad(hline, format!("expected `rows cols`, found {header:?}")));
    }
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|e| bad(hline, format!("{s:?}: {e}")));
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut numbers = Vec::with_capacity(2 * rows * cols);
    for (idx, line) in lines {
        for tok in line.split_whitespace() {
            numbers.push(tok.parse::<f64>().map_err(|e| bad(idx, format!("{tok:?}: {e}")))?);
        }
    }
    if numbers.len() != 2 * rows * cols {
        return Err(CliError::MatrixFile {
            line: 0,
            message: format!("expected {} numbers for a {rows} x {cols} matrix, found {}", 2 * rows * cols, numbers.len()),
        });
    }
    let entries = numbers.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    Ok(ComplexMatrix::from_row_major(rows, cols, entries)?)
}

pub fn read(path: &Path) -> CliResult<ComplexMatrix> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn format(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:?} {:?}", m.get(i, j).re, m.get(i, j).im)).collect();
        out.push_str(&row.join("  "));
        out.push('\n');
    }
    out
}
