//! ITK-style 4×4 matrix text files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub type Matrix4 = [[f64; 4]; 4];

const WHAT: &str = "ITK matrix";
pub const ITK_MATRIX_HEADER: &str = "# itkMatrix 4 x 4";

pub fn read_itk_matrix(path: impl AsRef<Path>) -> Result<Matrix4> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_itk_matrix(&text)
}

pub fn parse_itk_matrix(text: &str) -> Result<Matrix4> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(l) if l.trim_start().starts_with('#') => {}
        _ => return Err(Error::parse(WHAT, format!("first line must be '{ITK_MATRIX_HEADER}'"))),
    }
    let rows: Vec<&str> = lines.collect();
    if rows.len() != 4 {
        return Err(Error::parse(WHAT, format!("expected 4 rows, found {}", rows.len())));
    }
    let mut m = [[0.0; 4]; 4];
    for (r, line) in rows.iter().enumerate() {
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 4 {
            return Err(Error::parse(
                WHAT,
                format!("row {}: expected 4 values, found {}", r + 1, vals.len()),
            ));
        }
        for (c, tok) in vals.iter().enumerate() {
            m[r][c] = tok
                .parse()
                .map_err(|_| Error::parse(WHAT, format!("row {}: bad value '{tok}'", r + 1)))?;
        }
    }
    Ok(m)
}

/// Values are written with 17 significant digits.
pub fn format_itk_matrix(m: &Matrix4) -> String {
    let mut s = String::from(ITK_MATRIX_HEADER);
    s.push('\n');
    for row in m {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}

pub fn write_itk_matrix(path: impl AsRef<Path>, m: &Matrix4) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_itk_matrix(m)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_file() {
        let text = "# itkMatrix 4 x 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
        let m = parse_itk_matrix(text).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(m[r][c], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn three_rows_and_missing_comment() {
        assert!(parse_itk_matrix("# itkMatrix 4 x 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n").is_err());
        assert!(parse_itk_matrix("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n").is_err());
        assert!(parse_itk_matrix("# x\n1 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n").is_err());
    }

    #[test]
    fn exact_round_trip() {
        let m = [
            [0.1, -1.0 / 3.0, 2.0f64.sqrt(), 1e-300],
            [f64::MAX, 5e-324, -0.0, 7.25],
            [1.0, 2.0, 3.0, 4.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let back = parse_itk_matrix(&format_itk_matrix(&m)).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(back[r][c].to_bits(), m[r][c].to_bits());
            }
        }
    }
}
