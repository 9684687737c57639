//! Plain-text complex matrix format and CSV writing.
//!
//! Matrix files look like
//!
//! ```text
//! 2 3
//! 1.0000000000000000e0:0.0000000000000000e0 ...
//! ...
//! ```
//!
//! The first line holds `rows cols`; each following line is one row of
//! `re:im` pairs separated by single spaces, printed with 17 significant
//! digits so that a write/read cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::CMat;

pub fn format_matrix(m: &CMat) -> String {
    let mut out = String::with_capacity(48 * m.len() + 16);
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let mut first = true;
        for z in row.iter() {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{:.16e}:{:.16e}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty matrix file".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline + 1,
            msg: format!("bad dimensions: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline + 1,
            msg: "header must be 'rows cols'".into(),
        });
    };
    let mut m = CMat::zeros(rows, cols);
    let mut read_rows = 0;
    for (idx, line) in lines {
        if read_rows == rows {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("more than {rows} rows"),
            });
        }
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != cols {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {cols} entries, found {}", entries.len()),
            });
        }
        for (j, tok) in entries.into_iter().enumerate() {
            m[(read_rows, j)] = parse_entry(tok).ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("bad entry '{tok}'"),
            })?;
        }
        read_rows += 1;
    }
    if read_rows != rows {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {rows} rows, found {read_rows}"),
        });
    }
    Ok(m)
}

fn parse_entry(tok: &str) -> Option<Complex64> {
    let (re, im) = tok.split_once(':')?;
    Some(Complex64::new(re.parse().ok()?, im.parse().ok()?))
}

pub fn read_matrix(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}

/// Writes a header row followed by `rows`, each already rendered as fields.
pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Float rendering used in every CSV: shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
