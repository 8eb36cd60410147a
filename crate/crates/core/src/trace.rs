//! Per-cycle recordings of every bus field, their CSV form and diffs.
//!
//! The CSV dialect is fixed: comma separated, `\n` line endings, no
//! quoting, a header of `bus.field` column names and one row per cycle.
//! Cells hold the unsigned decimal rendering of the raw bit pattern, or `U`
//! for an undefined value.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::model::Network;
use crate::types::ScalarType;

/// `None` is an undefined (never written, no initial value) cell.
pub type Cell = Option<u64>;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: expected {expected} cells, found {found}")]
    RowLength {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cell `{text}` in column `{column}` is neither a decimal value nor U")]
    BadCell {
        line: u64,
        column: String,
        text: String,
    },
    #[error("column sets differ (only in first: {only_a:?}; only in second: {only_b:?})")]
    ColumnMismatch {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub columns: Vec<String>,
    /// Column types when known; traces read from CSV carry `None`.
    pub types: Vec<Option<ScalarType>>,
    pub rows: Vec<Vec<Cell>>,
}

/// Cell-for-cell equality; column types are metadata and not compared.
impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns && self.rows == other.rows
    }
}

impl Eq for Trace {}

impl Trace {
    pub fn new(columns: Vec<String>) -> Self {
        let types = vec![None; columns.len()];
        Trace {
            columns,
            types,
            rows: Vec::new(),
        }
    }

    /// Empty trace whose columns are every field of `net`, in registration
    /// order.
    pub fn for_network(net: &Network) -> Self {
        let columns = net.fields().map(|f| net.field_name(f)).collect();
        let types = net.fields().map(|f| Some(net.field_spec(f).ty)).collect();
        Trace {
            columns,
            types,
            rows: Vec::new(),
        }
    }

    pub fn cycles(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<impl Iterator<Item = Cell> + '_> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(move |r| r[i]))
    }

    pub fn cell(&self, cycle: usize, name: &str) -> Option<Cell> {
        Some(self.rows.get(cycle)?[self.column_index(name)?])
    }

    /// Appends one row.
    ///
    /// # Panics
    /// If the row length differs from the column count.
    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "trace row arity");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut sink: W) -> Result<(), TraceError> {
        // The csv writer renders a zero-length record as `""`; keep that
        // degenerate case as plain empty lines.
        if self.columns.is_empty() {
            for _ in 0..=self.rows.len() {
                sink.write_all(b"\n")?;
            }
            return Ok(());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(sink);
        w.write_record(&self.columns).map_err(csv_err)?;
        let mut buf = Vec::with_capacity(self.columns.len());
        for row in &self.rows {
            buf.clear();
            buf.extend(row.iter().map(|c| render(*c)));
            w.write_record(&buf).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("trace CSV is ASCII")
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Trace, TraceError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(source);
        let header = r
            .headers()
            .map_err(|e| TraceError::MalformedHeader(e.to_string()))?
            .clone();
        let columns: Vec<String> = header.iter().map(str::to_string).collect();
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.is_empty()
                || !c
                    .bytes()
                    .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.')
            {
                return Err(TraceError::MalformedHeader(format!(
                    "invalid column name `{c}`"
                )));
            }
            if !seen.insert(c.as_str()) {
                return Err(TraceError::MalformedHeader(format!(
                    "duplicate column `{c}`"
                )));
            }
        }
        let mut trace = Trace::new(columns);
        for rec in r.records() {
            let rec = rec.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    pos,
                    expected_len,
                    len,
                } => TraceError::RowLength {
                    line: pos.as_ref().map_or(0, |p| p.line()),
                    expected: *expected_len as usize,
                    found: *len as usize,
                },
                _ => csv_err(e),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let row = rec
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    parse_cell(text).ok_or_else(|| TraceError::BadCell {
                        line,
                        column: trace.columns[i].clone(),
                        text: text.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            trace.rows.push(row);
        }
        Ok(trace)
    }

    pub fn from_csv_str(s: &str) -> Result<Trace, TraceError> {
        Trace::read_csv(s.as_bytes())
    }
}

fn csv_err(e: csv::Error) -> TraceError {
    TraceError::Csv(e.to_string())
}

pub fn render(c: Cell) -> String {
    match c {
        Some(v) => v.to_string(),
        None => "U".to_string(),
    }
}

fn parse_cell(text: &str) -> Option<Cell> {
    if text == "U" {
        return Some(None);
    }
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse::<u64>().ok().map(Some)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub cycle: usize,
    pub column: String,
    /// Rendered cell, `U`, or `<missing>` when the row does not exist.
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cycle {}: {} expected {} got {}",
            self.cycle, self.column, self.expected, self.actual
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceDiff {
    /// Ordered by cycle, then by the first trace's column order.
    pub mismatches: Vec<Mismatch>,
}

impl TraceDiff {
    pub fn is_identical(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn first_divergence(&self) -> Option<&Mismatch> {
        self.mismatches.first()
    }

    pub fn summary(&self) -> String {
        match self.first_divergence() {
            None => "identical".to_string(),
            Some(m) => format!(
                "{} mismatching cells; first divergence at {m}",
                self.mismatches.len()
            ),
        }
    }
}

/// Compares `actual` against `expected` cell by cell. Columns are matched by
/// name, so the two traces may order them differently.
pub fn diff_traces(expected: &Trace, actual: &Trace) -> Result<TraceDiff, TraceError> {
    let a: BTreeSet<&String> = expected.columns.iter().collect();
    let b: BTreeSet<&String> = actual.columns.iter().collect();
    if a != b {
        return Err(TraceError::ColumnMismatch {
            only_a: a.difference(&b).map(|s| s.to_string()).collect(),
            only_b: b.difference(&a).map(|s| s.to_string()).collect(),
        });
    }
    let index: HashMap<&String, usize> = actual
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let map: Vec<usize> = expected.columns.iter().map(|c| index[c]).collect();
    let missing = || "<missing>".to_string();
    let mut mismatches = Vec::new();
    for cycle in 0..expected.rows.len().max(actual.rows.len()) {
        let (ra, rb) = (expected.rows.get(cycle), actual.rows.get(cycle));
        for (i, col) in expected.columns.iter().enumerate() {
            let ca = ra.map(|r| r[i]);
            let cb = rb.map(|r| r[map[i]]);
            if ca != cb {
                mismatches.push(Mismatch {
                    cycle,
                    column: col.clone(),
                    expected: ca.map_or_else(missing, render),
                    actual: cb.map_or_else(missing, render),
                });
            }
        }
    }
    Ok(TraceDiff { mismatches })
}
