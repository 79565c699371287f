//! Matrix Market `array real general` files.
//!
//! Values are written column-major in `{:.16e}` form (17 significant digits),
//! which reproduces every finite `f64` bit for bit on read.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rowsketch::DenseMatrix;

use crate::error::{BenchError, Result};

const HEADER: &str = "%%MatrixMarket matrix array real general";

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(32 * m.data().len() + 64);
    out.push_str(HEADER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for v in m.data() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| BenchError::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}

/// Parses array-format text; `origin` names the source in error messages.
pub fn parse_matrix(text: &str, origin: &str) -> Result<DenseMatrix> {
    let err = |line: usize, message: String| BenchError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(err(1, format!("not a Matrix Market header: {header:?}")));
    }
    if fields[2] != "array" {
        return Err(err(
            1,
            format!("unsupported format {:?}, expected array", fields[2]),
        ));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(err(1, format!("unsupported field {:?}", fields[3])));
    }
    if fields[4] != "general" {
        return Err(err(1, format!("unsupported symmetry {:?}", fields[4])));
    }

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body
        .next()
        .ok_or_else(|| err(2, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(size_line, format!("bad size line {size:?}: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(err(
            size_line,
            format!("size line needs 2 integers, got {size:?}"),
        ));
    };
    if rows == 0 || cols == 0 {
        return Err(err(size_line, format!("empty matrix {rows}x{cols}")));
    }

    let expected = rows * cols;
    let mut data = Vec::with_capacity(expected);
    let mut last_line = size_line;
    for (line, content) in body {
        last_line = line;
        for tok in content.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(line, format!("invalid number {tok:?}")))?;
            if !v.is_finite() {
                return Err(err(line, format!("non-finite value {tok:?}")));
            }
            if data.len() == expected {
                return Err(err(line, format!("more than {expected} values")));
            }
            data.push(v);
        }
    }
    if data.len() != expected {
        return Err(err(
            last_line,
            format!("expected {expected} values, found {}", data.len()),
        ));
    }
    Ok(DenseMatrix::new(rows, cols, data)?)
}
