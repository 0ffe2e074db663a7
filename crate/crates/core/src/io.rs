//! Plain-text formats.
//!
//! Matrices: one row per line, comma-separated decimal literals, no header.
//! Values are written with 17 significant digits so they re-parse exactly.
//!
//! Observed entries: one `row,col,value` triplet per line, 0-indexed.
//!
//! Blank lines are ignored by both readers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{}` is not a decimal number", field.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse { line, message: format!("non-finite value `{}`", field.trim()) });
    }
    Ok(value)
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut cols = None;
    let mut rows = 0;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let before = entries.len();
        for field in line.split(',') {
            entries.push(parse_number(field, lineno)?);
        }
        let width = entries.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {c} columns, found {width}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse { line: 0, message: "matrix file is empty".into() })?;
    DenseMatrix::from_row_major(rows, cols, entries)
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:.16e}", m.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(format_matrix(m).as_bytes())?;
    Ok(())
}

/// An observed entry `(row, col, value)`.
pub type Observation = (usize, usize, f64);

pub fn parse_observed(text: &str) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `row,col,value`, found {} fields", fields.len()),
            });
        }
        let index = |f: &str| {
            f.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{}` is not a nonnegative integer index", f.trim()),
            })
        };
        out.push((index(fields[0])?, index(fields[1])?, parse_number(fields[2], lineno)?));
    }
    Ok(out)
}

pub fn format_observed(observed: &[Observation]) -> String {
    observed.iter().map(|(i, j, v)| format!("{i},{j},{v:.16e}\n")).collect()
}

pub fn read_observed(path: impl AsRef<Path>) -> Result<Vec<Observation>> {
    parse_observed(&fs::read_to_string(path)?)
}

pub fn write_observed(path: impl AsRef<Path>, observed: &[Observation]) -> Result<()> {
    fs::write(path, format_observed(observed))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_matrix() {
        let m = parse_matrix("1, 2.5,-3\n4e-1,5,6\n\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.get(0, 1), 2.5);
        assert_eq!(m.get(1, 0), 0.4);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(parse_matrix("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("1,x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("1,NaN\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_matrix(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn writes_seventeen_digits() {
        let m = DenseMatrix::from_row_major(1, 2, vec![0.1, -2.5]).unwrap();
        assert_eq!(format_matrix(&m), "1.0000000000000001e-1,-2.5000000000000000e0\n");
    }

    #[test]
    fn parses_observed() {
        let obs = parse_observed("0,1,2.5\n 3 , 0 , -1\n").unwrap();
        assert_eq!(obs, vec![(0, 1, 2.5), (3, 0, -1.0)]);
        assert!(matches!(parse_observed("0,1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_observed("0,-1,2\n"), Err(Error::Parse { .. })));
    }

    proptest! {
        #[test]
        fn matrix_text_round_trip(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(-1e6f64..1e6, 16)) {
            let entries: Vec<f64> = (0..rows * cols).map(|k| seed[k] / (k as f64 + 0.37)).collect();
            let m = DenseMatrix::from_row_major(rows, cols, entries).unwrap();
            let back = parse_matrix(&format_matrix(&m)).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn observed_text_round_trip(obs in proptest::collection::vec((0usize..100, 0usize..100, -1e3f64..1e3), 0..20)) {
            prop_assert_eq!(parse_observed(&format_observed(&obs)).unwrap(), obs);
        }
    }
}
