//! Reading and writing matrices, fits, bicluster sets and run manifests.
//!
//! Real-valued matrices are written with Rust's shortest round-trip float formatting, so a
//! write followed by a read reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{Bicluster, BiclusterSet};
use crate::model::{BinaryMatrix, FactorPair};
use crate::optimizer::FitResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    /// Comma-separated 0/1 rows.
    #[default]
    Csv,
    /// `I J NNZ` header followed by one 1-based `i j` pair per one.
    Coo,
}

/// Whether the first CSV row is a header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// Header iff the first row holds a token other than `0` or `1`.
    #[default]
    Auto,
    Present,
    Absent,
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path, format: MatrixFormat, header: HeaderMode) -> Result<BinaryMatrix> {
    let text = read_text(path)?;
    parse_matrix(&text, format, header)
}

pub fn parse_matrix(text: &str, format: MatrixFormat, header: HeaderMode) -> Result<BinaryMatrix> {
    match format {
        MatrixFormat::Csv => parse_csv(text, header),
        MatrixFormat::Coo => parse_coo(text),
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses comma-separated 0/1 rows; errors carry 1-based line and field numbers.
pub fn parse_csv(text: &str, header: HeaderMode) -> Result<BinaryMatrix> {
    let mut lines = content_lines(text).peekable();
    let skip = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => lines
            .peek()
            .is_some_and(|(_, l)| l.split(',').any(|t| !matches!(t.trim(), "0" | "1"))),
    };
    if skip {
        lines.next();
    }
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut width = None;
    for (line_no, line) in lines {
        let mut row = Vec::new();
        for (idx, token) in line.split(',').enumerate() {
            let bit = match token.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(parse_error(
                        line_no,
                        idx + 1,
                        format!("expected 0 or 1, found {other:?}"),
                    ));
                }
            };
            row.push(bit);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_error(
                    line_no,
                    row.len().min(w) + 1,
                    format!("row has {} fields, expected {w}", row.len()),
                ));
            }
            _ => {}
        }
        rows.push(row);
    }
    let cols = width.ok_or_else(|| parse_error(1, 1, "no data rows"))?;
    BinaryMatrix::from_bools(rows.len(), cols, |i, j| rows[i][j])
}

fn parse_usize(token: Option<&str>, line: usize, column: usize, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| parse_error(line, column, format!("missing {what}")))?;
    token.parse().map_err(|_| {
        parse_error(
            line,
            column,
            format!("{what} must be a non-negative integer, found {token:?}"),
        )
    })
}

/// Parses the coordinate format; `%` and `#` lines are comments.
pub fn parse_coo(text: &str) -> Result<BinaryMatrix> {
    let mut lines = content_lines(text).filter(|(_, l)| !l.starts_with('%') && !l.starts_with('#'));
    let (hline, head) = lines
        .next()
        .ok_or_else(|| parse_error(1, 1, "missing \"I J NNZ\" header"))?;
    let mut fields = head.split_whitespace();
    let rows = parse_usize(fields.next(), hline, 1, "I")?;
    let cols = parse_usize(fields.next(), hline, 2, "J")?;
    let nnz = parse_usize(fields.next(), hline, 3, "NNZ")?;
    if fields.next().is_some() {
        return Err(parse_error(hline, 4, "header has more than three fields"));
    }
    let mut y =
        BinaryMatrix::zeros(rows, cols).map_err(|e| parse_error(hline, 1, e.to_string()))?;
    let mut seen = 0;
    for (line_no, line) in lines {
        let mut fields = line.split_whitespace();
        let i = parse_usize(fields.next(), line_no, 1, "row index")?;
        let j = parse_usize(fields.next(), line_no, 2, "column index")?;
        if fields.next().is_some() {
            return Err(parse_error(line_no, 3, "expected exactly two indices"));
        }
        if i == 0 || i > rows {
            return Err(parse_error(
                line_no,
                1,
                format!("row index {i} outside 1..={rows}"),
            ));
        }
        if j == 0 || j > cols {
            return Err(parse_error(
                line_no,
                2,
                format!("column index {j} outside 1..={cols}"),
            ));
        }
        if y.get(i - 1, j - 1) {
            return Err(parse_error(
                line_no,
                1,
                format!("duplicate entry ({i}, {j})"),
            ));
        }
        y.set(i - 1, j - 1, true);
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_error(
            hline,
            3,
            format!("header declares {nnz} entries but {seen} were listed"),
        ));
    }
    Ok(y)
}

pub fn render_matrix(y: &BinaryMatrix, format: MatrixFormat) -> String {
    let mut out = String::new();
    match format {
        MatrixFormat::Csv => {
            for i in 0..y.rows() {
                for j in 0..y.cols() {
                    if j > 0 {
                        out.push(',');
                    }
                    out.push(if y.get(i, j) { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        MatrixFormat::Coo => {
            let ones = y.ones_coordinates();
            let _ = writeln!(out, "{} {} {}", y.rows(), y.cols(), ones.len());
            for (i, j) in ones {
                let _ = writeln!(out, "{} {}", i + 1, j + 1);
            }
        }
    }
    out
}

pub fn write_matrix(path: &Path, y: &BinaryMatrix, format: MatrixFormat) -> Result<()> {
    write_text(path, &render_matrix(y, format))
}

/// Real matrix as CSV without a header, shortest round-trip decimals.
pub fn render_real(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`render_real`]; `ncols` is needed when the matrix has rows but no columns.
pub fn parse_real(text: &str, ncols: Option<usize>) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut rows = 0;
    let mut width = ncols;
    for (line_no, line) in text.lines().enumerate().map(|(n, l)| (n + 1, l.trim())) {
        if line.is_empty() {
            if width == Some(0) {
                rows += 1;
            }
            continue;
        }
        let before = values.len();
        for (idx, token) in line.split(',').enumerate() {
            let v: f64 = token
                .trim()
                .parse()
                .map_err(|_| parse_error(line_no, idx + 1, format!("not a number: {token:?}")))?;
            values.push(v);
        }
        let n = values.len() - before;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(parse_error(
                    line_no,
                    n.min(w) + 1,
                    format!("row has {n} fields, expected {w}"),
                ));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    Array2::from_shape_vec((rows, cols), values)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}

/// Factor matrices with zero columns are written as one empty line per row.
fn render_factor(m: &Array2<f64>) -> String {
    if m.ncols() == 0 {
        return "\n".repeat(m.nrows());
    }
    render_real(m)
}

fn render_vector(v: &Array1<f64>) -> String {
    let mut out = String::new();
    for x in v {
        let _ = writeln!(out, "{x:?}");
    }
    out
}

/// One entry of the bicluster interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiclusterRecord {
    pub k: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

pub fn biclusters_to_json(set: &BiclusterSet) -> Result<String> {
    let records: Vec<BiclusterRecord> = set
        .clusters()
        .iter()
        .enumerate()
        .map(|(k, c)| BiclusterRecord {
            k,
            rows: c.rows.clone(),
            cols: c.cols.clone(),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records)?;
    text.push('\n');
    Ok(text)
}

pub fn biclusters_from_json(text: &str) -> Result<BiclusterSet> {
    let mut records: Vec<BiclusterRecord> = serde_json::from_str(text)?;
    records.sort_by_key(|r| r.k);
    Ok(BiclusterSet::new(
        records
            .into_iter()
            .map(|r| Bicluster::new(r.rows, r.cols))
            .collect(),
    ))
}

pub fn write_biclusters(path: &Path, set: &BiclusterSet) -> Result<()> {
    write_text(path, &biclusters_to_json(set)?)
}

pub fn read_biclusters(path: &Path) -> Result<BiclusterSet> {
    biclusters_from_json(&read_text(path)?)
}

/// Lower-case hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to reproduce a run; carries no timestamps or output paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Digest of the input matrix file, when the run read one.
    pub input_sha256: Option<String>,
    pub run: serde_json::Value,
}

impl Manifest {
    pub fn new(run: serde_json::Value, input_sha256: Option<String>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256,
            run,
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn render_trace(result: &FitResult) -> String {
    let mut out = String::from("rung,iteration,log_posterior,K,max_rel_change\n");
    for e in &result.trace {
        let _ = writeln!(
            out,
            "{},{},{:?},{},{:?}",
            e.rung, e.iteration, e.log_posterior, e.k, e.max_rel_change
        );
    }
    out
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `A.csv`, `B.csv`, `mu.csv`, `biclusters.json`, `trace.csv` and `manifest.json` into `dir`.
pub fn write_fit(
    dir: &Path,
    result: &FitResult,
    biclusters: &BiclusterSet,
    manifest: &Manifest,
) -> Result<()> {
    ensure_dir(dir)?;
    write_text(&dir.join("A.csv"), &render_factor(&result.factors.a))?;
    write_text(&dir.join("B.csv"), &render_factor(&result.factors.b))?;
    write_text(&dir.join("mu.csv"), &render_vector(&result.factors.mu))?;
    write_biclusters(&dir.join("biclusters.json"), biclusters)?;
    write_text(&dir.join("trace.csv"), &render_trace(result))?;
    write_manifest(&dir.join("manifest.json"), manifest)
}

/// Reads the factor pair written by [`write_fit`].
pub fn read_fit(dir: &Path) -> Result<FactorPair> {
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let mu = parse_real(&read_text(&path("mu.csv"))?, Some(1))?;
    let mu = Array1::from_iter(mu.iter().copied());
    let a_text = read_text(&path("A.csv"))?;
    let b_text = read_text(&path("B.csv"))?;
    let empty = a_text.trim().is_empty();
    let k = if empty { Some(0) } else { None };
    let mut a = parse_real(&a_text, k)?;
    let mut b = parse_real(&b_text, k)?;
    if empty {
        a = Array2::zeros((mu.len(), 0));
        b = Array2::zeros((b_text.lines().count(), 0));
    }
    FactorPair::new(a, b, mu)
}
