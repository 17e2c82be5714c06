//! Delimited expression-matrix loading.
//!
//! The pipeline is `parse_table` → `drop_missing_rows` → optional
//! `zscore_rows`. Rows containing any missing cell are removed, never imputed.

use crate::datamodel::DataMatrix;
use crate::error::{arg_err, ClusterError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    /// Majority of tab, comma and semicolon on the first non-blank line.
    #[default]
    Auto,
    Tab,
    Comma,
    Semicolon,
}

impl Delimiter {
    fn as_char(self) -> Option<char> {
        match self {
            Delimiter::Auto => None,
            Delimiter::Tab => Some('\t'),
            Delimiter::Comma => Some(','),
            Delimiter::Semicolon => Some(';'),
        }
    }

    fn detect(line: &str) -> char {
        let mut best = ('\t', 0usize);
        for c in ['\t', ',', ';'] {
            let n = line.matches(c).count();
            if n > best.1 {
                best = (c, n);
            }
        }
        best.0
    }
}

/// Whether the first line holds column labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// Header iff no cell of the first line is numeric.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    pub delimiter: Delimiter,
    pub header: HeaderMode,
}

/// Rectangular grid of parsed cells; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub cells: Vec<Vec<Option<f64>>>,
    pub header: Option<Vec<String>>,
    pub row_labels: Option<Vec<String>>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }
}

fn is_missing_token(tok: &str) -> bool {
    tok.is_empty()
        || ["na", "nan", "null"]
            .iter()
            .any(|m| tok.eq_ignore_ascii_case(m))
}

fn parse_cell(tok: &str) -> Option<f64> {
    if is_missing_token(tok) {
        return None;
    }
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn tokenize(line: &str, delim: char) -> Vec<&str> {
    line.split(delim)
        .map(|t| {
            let t = t.trim();
            t.strip_prefix('"')
                .and_then(|s| s.strip_suffix('"'))
                .unwrap_or(t)
        })
        .collect()
}

/// Parses delimited text into a [`RawTable`].
///
/// Empty, `NA`, `NaN`, `null` and any non-numeric token become missing cells.
/// The first column is taken as row labels when the first data row starts
/// with a non-numeric, non-missing token.
pub fn parse_table(text: &str, options: &ParseOptions) -> Result<RawTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let Some(&(_, first)) = lines.peek() else {
        return Err(ClusterError::Parse {
            line: 1,
            message: "input contains no data rows".into(),
        });
    };
    let delim = options
        .delimiter
        .as_char()
        .unwrap_or_else(|| Delimiter::detect(first));

    let header_line = match options.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => tokenize(first, delim)
            .iter()
            .all(|t| parse_cell(t).is_none()),
    };
    let header: Option<(usize, Vec<String>)> = if header_line {
        lines.next().map(|(n, l)| {
            (
                n,
                tokenize(l, delim).into_iter().map(String::from).collect(),
            )
        })
    } else {
        None
    };

    let mut cells = Vec::new();
    let mut labels: Option<Vec<String>> = None;
    let mut width = 0;
    for (line_no, line) in lines {
        let toks = tokenize(line, delim);
        if cells.is_empty() {
            width = toks.len();
            let first_tok = toks[0];
            if parse_cell(first_tok).is_none() && !is_missing_token(first_tok) {
                labels = Some(Vec::new());
            }
        } else if toks.len() != width {
            return Err(ClusterError::Parse {
                line: line_no,
                message: format!("expected {width} fields, found {}", toks.len()),
            });
        }
        let data_toks = match labels.as_mut() {
            Some(l) => {
                l.push(toks[0].to_string());
                &toks[1..]
            }
            None => &toks[..],
        };
        cells.push(data_toks.iter().map(|t| parse_cell(t)).collect::<Vec<_>>());
    }

    if cells.is_empty() {
        return Err(ClusterError::Parse {
            line: header.as_ref().map_or(1, |(n, _)| *n),
            message: "input contains no data rows".into(),
        });
    }
    let n_cols = width - usize::from(labels.is_some());
    if n_cols == 0 {
        return Err(ClusterError::Parse {
            line: 1,
            message: "no numeric columns".into(),
        });
    }

    let header = match header {
        None => None,
        Some((_, h)) if h.len() == n_cols => Some(h),
        Some((_, h)) if labels.is_some() && h.len() == width => Some(h[1..].to_vec()),
        Some((n, h)) => {
            return Err(ClusterError::Parse {
                line: n,
                message: format!("header has {} fields, data rows have {width}", h.len()),
            })
        }
    };

    Ok(RawTable {
        cells,
        header,
        row_labels: labels,
    })
}

/// Removes every row holding a missing cell. Returns the matrix and the
/// number of rows removed.
pub fn drop_missing_rows(raw: &RawTable) -> Result<(DataMatrix, usize)> {
    let n_cols = raw.n_cols();
    if let Some(i) = raw.cells.iter().position(|r| r.len() != n_cols) {
        return arg_err(format!("table is not rectangular at row {i}"));
    }
    let mut values = Vec::with_capacity(raw.n_rows() * n_cols);
    let mut row_ids = Vec::new();
    let mut dropped = 0;
    for (i, row) in raw.cells.iter().enumerate() {
        if row.iter().any(Option::is_none) {
            dropped += 1;
            continue;
        }
        values.extend(row.iter().flatten());
        row_ids.push(match &raw.row_labels {
            Some(l) => l[i].clone(),
            None => format!("r{i}"),
        });
    }
    if row_ids.is_empty() {
        return Err(ClusterError::EmptyData(format!(
            "all {dropped} rows contain missing values"
        )));
    }
    let col_ids = raw
        .header
        .clone()
        .unwrap_or_else(|| (0..n_cols).map(|j| format!("c{j}")).collect());
    let n_rows = row_ids.len();
    Ok((
        DataMatrix::new(values, n_rows, n_cols, row_ids, col_ids)?,
        dropped,
    ))
}

/// Per-row z-score with population standard deviation.
///
/// Rows whose standard deviation is below 1e-12 become all zeros.
pub fn zscore_rows(data: &DataMatrix) -> Result<DataMatrix> {
    let d = data.n_cols();
    if d < 2 {
        return arg_err(format!("z-score needs at least 2 columns, got {d}"));
    }
    let mut out = Vec::with_capacity(data.values().len());
    for row in data.rows() {
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / d as f64;
        let sd = var.sqrt();
        if sd < 1e-12 {
            out.extend(std::iter::repeat_n(0.0, d));
        } else {
            out.extend(row.iter().map(|x| (x - mean) / sd));
        }
    }
    data.with_values(out)
}

/// Writes a matrix as TSV with a header line and a leading id column.
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_tsv(data: &DataMatrix) -> String {
    let mut s = String::from("id");
    for c in data.col_ids() {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (id, row) in data.row_ids().iter().zip(data.rows()) {
        s.push_str(id);
        for v in row {
            s.push('\t');
            s.push_str(&format!("{v:?}"));
        }
        s.push('\n');
    }
    s
}
