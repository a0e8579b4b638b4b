//! MatrixMarket reading and writing. Dense matrices use the `array` format,
//! supports and sparse matrices the `coordinate` format with 1-based indices.
//! Values are written with Rust's shortest round-trip `{:e}` formatting, so a
//! write/read cycle is lossless and repeated writes are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{LrdError, Result};
use crate::linalg::{DenseMatrix, SupportSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Pattern,
}

/// Parsed file contents: shape plus `(row, col, value)` triplets (0-based).
/// Array files yield every entry in column-major order.
struct Parsed {
    layout: Layout,
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> LrdError {
    LrdError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

fn parse_usize(tok: (usize, &str), line: usize, what: &str) -> Result<usize> {
    tok.1
        .parse::<usize>()
        .map_err(|_| parse_err(line, tok.0, format!("expected {what}, found `{}`", tok.1)))
}

fn parse_f64(tok: (usize, &str), line: usize) -> Result<f64> {
    match tok.1.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(parse_err(line, tok.0, format!("non-finite value `{}`", tok.1))),
        Err(_) => Err(parse_err(line, tok.0, format!("expected a real number, found `{}`", tok.1))),
    }
}

fn parse(text: &str) -> Result<Parsed> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty file: missing MatrixMarket header"))?;
    let head = tokens(header);
    let lower: Vec<String> = head.iter().map(|(_, t)| t.to_ascii_lowercase()).collect();
    if lower.len() != 5 || lower[0] != "%%matrixmarket" || lower[1] != "matrix" {
        return Err(parse_err(
            hline,
            1,
            "expected `%%MatrixMarket matrix <array|coordinate> <real|pattern> general`",
        ));
    }
    let layout = match lower[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(hline, head[2].0, format!("unsupported format `{other}`"))),
    };
    let field = match lower[3].as_str() {
        "real" | "double" | "integer" => Field::Real,
        "pattern" if layout == Layout::Coordinate => Field::Pattern,
        other => return Err(parse_err(hline, head[3].0, format!("unsupported field `{other}`"))),
    };
    if lower[4] != "general" {
        return Err(parse_err(
            hline,
            head[4].0,
            format!("unsupported symmetry `{}`", lower[4]),
        ));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });
    let last_line = text.lines().count();
    let (sline, size) = body
        .next()
        .ok_or_else(|| parse_err(last_line + 1, 1, "missing size line"))?;
    let size_toks = tokens(size);
    let want = if layout == Layout::Array { 2 } else { 3 };
    if size_toks.len() != want {
        return Err(parse_err(
            sline,
            1,
            format!("size line needs {want} integers, found {}", size_toks.len()),
        ));
    }
    let n_rows = parse_usize(size_toks[0], sline, "row count")?;
    let n_cols = parse_usize(size_toks[1], sline, "column count")?;
    if n_rows == 0 || n_cols == 0 {
        return Err(parse_err(sline, 1, "matrix dimensions must be positive"));
    }
    let count = match layout {
        Layout::Array => n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| parse_err(sline, 1, "matrix too large"))?,
        Layout::Coordinate => parse_usize(size_toks[2], sline, "entry count")?,
    };

    let per_line = match (layout, field) {
        (Layout::Array, _) => 1,
        (Layout::Coordinate, Field::Real) => 3,
        (Layout::Coordinate, Field::Pattern) => 2,
    };
    let mut entries = Vec::with_capacity(count.min(1 << 24));
    for (ln, line) in body.by_ref() {
        if entries.len() == count {
            return Err(parse_err(ln, 1, format!("more than the declared {count} entries")));
        }
        let toks = tokens(line);
        if toks.len() != per_line {
            return Err(parse_err(
                ln,
                toks.get(per_line).map_or(1, |t| t.0),
                format!("expected {per_line} field(s), found {}", toks.len()),
            ));
        }
        let k = entries.len();
        let entry = match layout {
            Layout::Array => (k % n_rows, k / n_rows, parse_f64(toks[0], ln)?),
            Layout::Coordinate => {
                let i = parse_usize(toks[0], ln, "row index")?;
                let j = parse_usize(toks[1], ln, "column index")?;
                if i == 0 || i > n_rows {
                    return Err(parse_err(ln, toks[0].0, format!("row index {i} outside 1..={n_rows}")));
                }
                if j == 0 || j > n_cols {
                    return Err(parse_err(ln, toks[1].0, format!("column index {j} outside 1..={n_cols}")));
                }
                let v = if field == Field::Real { parse_f64(toks[2], ln)? } else { 1.0 };
                (i - 1, j - 1, v)
            }
        };
        entries.push(entry);
    }
    if entries.len() < count {
        return Err(parse_err(
            last_line + 1,
            1,
            format!("unexpected end of file: expected {count} entries, found {}", entries.len()),
        ));
    }
    Ok(Parsed {
        layout,
        n_rows,
        n_cols,
        entries,
    })
}

fn to_dense(p: &Parsed) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(p.n_rows, p.n_cols).into_nalgebra();
    for &(i, j, v) in &p.entries {
        m[(i, j)] = v;
    }
    DenseMatrix::from_nalgebra(m)
}

/// Parses a dense matrix from `array` or `coordinate` text; entries missing
/// from a coordinate file are zero.
pub fn parse_dense(text: &str) -> Result<DenseMatrix> {
    to_dense(&parse(text)?)
}

/// Parses a support set from `coordinate` text (`pattern` or `real`; every listed
/// position belongs to the support, whatever its value).
pub fn parse_support(text: &str) -> Result<SupportSet> {
    let p = parse(text)?;
    if p.layout != Layout::Coordinate {
        return Err(parse_err(1, 1, "a support set needs the coordinate format"));
    }
    let idx = p.entries.iter().map(|&(i, j, _)| (i, j)).collect();
    SupportSet::new(p.n_rows, p.n_cols, idx)
}

pub fn format_dense(m: &DenseMatrix) -> String {
    let (n1, n2) = m.shape();
    let mut s = String::with_capacity(24 * n1 * n2 + 64);
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{n1} {n2}");
    for v in m.as_nalgebra().iter() {
        let _ = writeln!(s, "{v:e}");
    }
    s
}

pub fn format_support(support: &SupportSet) -> String {
    let (n1, n2) = support.shape();
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate pattern general\n");
    let _ = writeln!(s, "{n1} {n2} {}", support.len());
    for &(i, j) in support.indices() {
        let _ = writeln!(s, "{} {}", i + 1, j + 1);
    }
    s
}

/// Entries of `m` on `support` in coordinate format, zeros included.
pub fn format_entries(m: &DenseMatrix, support: &SupportSet) -> Result<String> {
    m.check_shape(support.shape())?;
    let (n1, n2) = m.shape();
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{n1} {n2} {}", support.len());
    for &(i, j) in support.indices() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, m.get(i, j));
    }
    Ok(s)
}

/// Nonzero entries of `m` in coordinate format.
pub fn format_sparse(m: &DenseMatrix) -> String {
    format_entries(m, &SupportSet::support_of(m)).expect("support has the matrix shape")
}

/// Coordinate `real` text as a zero-filled matrix plus the set of listed positions.
pub fn parse_entries(text: &str) -> Result<(DenseMatrix, SupportSet)> {
    let p = parse(text)?;
    if p.layout != Layout::Coordinate {
        return Err(parse_err(1, 1, "observed entries need the coordinate format"));
    }
    let support = SupportSet::new(p.n_rows, p.n_cols, p.entries.iter().map(|&(i, j, _)| (i, j)).collect())?;
    Ok((to_dense(&p)?, support))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        LrdError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Reads a file, prefixing parse diagnostics with the path.
fn with_path<T>(path: &Path, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    f(&read(path)?).map_err(|e| match e {
        LrdError::Parse {
            line,
            column,
            message,
        } => LrdError::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn read_dense(path: &Path) -> Result<DenseMatrix> {
    with_path(path, parse_dense)
}

pub fn read_support(path: &Path) -> Result<SupportSet> {
    with_path(path, parse_support)
}

pub fn read_entries(path: &Path) -> Result<(DenseMatrix, SupportSet)> {
    with_path(path, parse_entries)
}

pub fn write_dense(path: &Path, m: &DenseMatrix) -> Result<()> {
    Ok(fs::write(path, format_dense(m))?)
}

pub fn write_support(path: &Path, s: &SupportSet) -> Result<()> {
    Ok(fs::write(path, format_support(s))?)
}

pub fn write_sparse(path: &Path, m: &DenseMatrix) -> Result<()> {
    Ok(fs::write(path, format_sparse(m))?)
}

pub fn write_entries(path: &Path, m: &DenseMatrix, support: &SupportSet) -> Result<()> {
    Ok(fs::write(path, format_entries(m, support)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn dense_roundtrip_is_exact() {
        let m = DenseMatrix::gaussian(3, 4, &mut Rng::new(1)).scale(1e-3);
        let text = format_dense(&m);
        let back = parse_dense(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(format_dense(&back), text);
    }

    #[test]
    fn column_major_array_order() {
        let text = "%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n";
        let m = parse_dense(text).unwrap();
        assert_eq!(m.to_row_major(), vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn support_and_sparse_roundtrip() {
        let s = SupportSet::new(3, 2, vec![(2, 1), (0, 0)]).unwrap();
        assert_eq!(parse_support(&format_support(&s)).unwrap(), s);
        let m = DenseMatrix::from_row_major(2, 2, &[0.0, -1.5, 0.0, 2.0]).unwrap();
        assert_eq!(parse_dense(&format_sparse(&m)).unwrap(), m);
        assert_eq!(parse_support(&format_sparse(&m)).unwrap(), SupportSet::support_of(&m));
        let obs = SupportSet::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
        let (vals, back) = parse_entries(&format_entries(&m, &obs).unwrap()).unwrap();
        assert_eq!(back, obs);
        assert_eq!(vals.get(1, 1), 2.0);
    }

    #[test]
    fn truncated_file_names_the_line() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        match parse_dense(text) {
            Err(LrdError::Parse { line, message, .. }) => {
                assert_eq!(line, 6);
                assert!(message.contains("expected 4 entries, found 3"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_token_reports_line_and_column() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1  x 0.5\n";
        match parse_dense(text) {
            Err(LrdError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 4)),
            other => panic!("unexpected {other:?}"),
        }
        let text = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n3 1\n";
        assert!(matches!(parse_support(text), Err(LrdError::Parse { line: 3, column: 1, .. })));
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(parse_dense("").is_err());
        assert!(parse_dense("%%MatrixMarket matrix array complex general\n1 1\n1\n").is_err());
        assert!(parse_dense("%%MatrixMarket matrix array real symmetric\n1 1\n1\n").is_err());
        assert!(parse_support("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse_dense("%%MatrixMarket matrix array real general\n1 1\nnan\n").is_err());
    }
}
