//! Typed report tables with CSV and JSON serialization.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::{write_corpus, RawDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Text,
    Integer,
    Real,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn real(value: Option<f64>) -> Cell {
        match value {
            Some(v) if v.is_finite() => Cell::Real(v),
            _ => Cell::Null,
        }
    }

    pub fn int(value: impl TryInto<i64>) -> Cell {
        Cell::Int(value.try_into().ok().expect("count fits in i64"))
    }

    pub fn text(value: impl Into<String>) -> Cell {
        Cell::Text(value.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Cell::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    fn kind_matches(&self, kind: ColumnKind) -> bool {
        matches!(
            (self, kind),
            (Cell::Null, _)
                | (Cell::Int(_), ColumnKind::Integer)
                | (Cell::Real(_), ColumnKind::Real)
                | (Cell::Text(_), ColumnKind::Text)
        )
    }

    /// CSV rendering. Reals use the shortest round-trip representation and
    /// negative zero prints as `0`.
    pub fn render(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) if *v == 0.0 => "0".to_string(),
            Cell::Real(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub corpus_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub report_id: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Provenance,
}

impl ReportTable {
    pub fn new(report_id: &str, columns: &[(&str, ColumnKind)], provenance: Provenance) -> Self {
        Self {
            report_id: report_id.to_string(),
            columns: columns
                .iter()
                .map(|(name, kind)| Column {
                    name: name.to_string(),
                    kind: *kind,
                })
                .collect(),
            rows: Vec::new(),
            provenance,
        }
    }

    /// # Panics
    ///
    /// Panics when the row does not match the column schema.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.report_id);
        for (cell, col) in row.iter().zip(&self.columns) {
            assert!(
                cell.kind_matches(col.kind),
                "{}: {cell:?} in {} column `{}`",
                self.report_id,
                match col.kind {
                    ColumnKind::Text => "text",
                    ColumnKind::Integer => "integer",
                    ColumnKind::Real => "real",
                },
                col.name
            );
        }
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Cell at `row` in the named column.
    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        let c = self.column_index(column)?;
        self.rows.get(row).map(|r| &r[c])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the canonical JSONL serialization of the documents.
pub fn corpus_hash(documents: &[RawDocument]) -> String {
    let mut buf = Vec::new();
    write_corpus(documents, &mut buf).expect("writing to memory");
    sha256_hex(&buf)
}

/// Hash of any serializable configuration value.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("config serializes"))
}
