use std::fmt::Write;

use super::SpdMatrix;
use crate::error::{Error, Result};

/// Parses a dense square matrix written as whitespace-separated rows, one
/// row per non-empty line. Lines starting with `#` are ignored.
pub fn parse_dense_text(text: &str) -> Result<SpdMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: cannot parse '{tok}' as a number", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Config("matrix text contains no rows".into()));
    }
    SpdMatrix::from_rows(&rows)
}

/// One eigenvalue per line, 17 significant digits.
pub fn format_spectrum(values: &[f64]) -> String {
    let mut out = String::new();
    for v in values {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_and_comments() {
        let a = parse_dense_text("# A\n2 -1\n-1 2\n\n").unwrap();
        assert_eq!(a.order(), 2);
        assert_eq!(a.get(0, 1), -1.0);
    }

    #[test]
    fn reports_bad_token_line() {
        let err = parse_dense_text("1 0\n0 x\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(parse_dense_text("1 0\n0\n").is_err());
    }

    #[test]
    fn spectrum_format_round_trips() {
        let s = format_spectrum(&[0.1 + 0.2, 2.0]);
        let back: Vec<f64> = s.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, vec![0.1 + 0.2, 2.0]);
        assert_eq!(s.lines().next().unwrap(), "3.0000000000000004e-1");
    }
}
