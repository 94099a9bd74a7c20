//! Corpus loading, validation and length filtering.
//!
//! The corpus file is UTF-8 JSONL with exactly the fields of [`RawDocument`].
//! Malformed records never abort a load: they are collected into
//! [`LoadReport::errors`] with their 1-based line number and the offending
//! field, and the remaining records are kept in file order.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::text::char_len;

/// Field names of a corpus record, in canonical order.
pub const CORPUS_FIELDS: [&str; 7] = ["doc_id", "url", "domain", "outlet", "published_at", "title", "body"];

/// Default minimum body length in characters.
pub const DEFAULT_MIN_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub url: String,
    pub domain: String,
    pub outlet: String,
    pub published_at: NaiveDate,
    pub title: String,
    pub body: String,
}

impl RawDocument {
    /// Text indexed for retrieval: title and body separated by a newline.
    pub fn indexed_text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }
}

/// Inclusive publication-date window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl CorpusWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, IngestError> {
        if start > end {
            return Err(IngestError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    /// Calendar years covered by the window, inclusive.
    pub fn years(&self) -> Vec<i32> {
        use chrono::Datelike;
        (self.start.year()..=self.end.year()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutletMeta {
    #[serde(default)]
    pub leaning: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusManifest {
    pub documents: Vec<RawDocument>,
    /// `None` only for an empty corpus loaded without a configured window.
    pub window: Option<CorpusWindow>,
    pub outlet_metadata: BTreeMap<String, OutletMeta>,
}

impl CorpusManifest {
    /// Builds a manifest whose window is the span of the documents' dates and
    /// whose outlet metadata lists every outlet without a leaning.
    pub fn from_documents(documents: Vec<RawDocument>) -> Self {
        let window = span_of(&documents);
        let outlet_metadata = documents
            .iter()
            .map(|d| (d.outlet.clone(), OutletMeta::default()))
            .collect();
        Self {
            documents,
            window,
            outlet_metadata,
        }
    }

    /// Replaces the outlet metadata. Every outlet used by a document must be
    /// covered; extra outlets are kept.
    pub fn with_outlet_metadata(mut self, metadata: BTreeMap<String, OutletMeta>) -> Result<Self, IngestError> {
        let mut missing: Vec<String> = self
            .documents
            .iter()
            .filter(|d| !metadata.contains_key(&d.outlet))
            .map(|d| d.outlet.clone())
            .collect();
        missing.sort();
        missing.dedup();
        if !missing.is_empty() {
            return Err(IngestError::UnknownOutlets(missing));
        }
        self.outlet_metadata = metadata;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn doc_ids(&self) -> HashSet<&str> {
        self.documents.iter().map(|d| d.doc_id.as_str()).collect()
    }

    pub fn get(&self, doc_id: &str) -> Option<&RawDocument> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }
}

fn span_of(documents: &[RawDocument]) -> Option<CorpusWindow> {
    let start = documents.iter().map(|d| d.published_at).min()?;
    let end = documents.iter().map(|d| d.published_at).max()?;
    Some(CorpusWindow { start, end })
}

/// One rejected corpus line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordError {
    /// 1-based line number.
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl std::fmt::Display for RecordError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "line {}: field `{}`: {}", self.line, field, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub manifest: CorpusManifest,
    pub errors: Vec<RecordError>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// When set, documents outside the window are rejected and the manifest
    /// carries this window instead of the data span.
    pub window: Option<CorpusWindow>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corpus window start {start} is after end {end}")]
    InvalidWindow { start: NaiveDate, end: NaiveDate },
    #[error("outlets missing from outlet metadata: {}", .0.join(", "))]
    UnknownOutlets(Vec<String>),
    #[error("invalid outlet metadata: {0}")]
    Metadata(#[from] serde_json::Error),
}

pub fn load_corpus(path: &Path) -> Result<LoadReport, IngestError> {
    load_corpus_with(path, &LoadOptions::default())
}

pub fn load_corpus_with(path: &Path, options: &LoadOptions) -> Result<LoadReport, IngestError> {
    let file = fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(BufReader::new(file), options).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses corpus JSONL from any reader. Records are validated in parallel and
/// merged back in input order.
pub fn parse_corpus<R: BufRead>(reader: R, options: &LoadOptions) -> io::Result<LoadReport> {
    let lines: Vec<String> = reader.lines().collect::<io::Result<_>>()?;
    let parsed: Vec<Option<Result<RawDocument, RecordError>>> = lines
        .par_iter()
        .enumerate()
        .map(|(idx, line)| {
            if line.trim().is_empty() {
                None
            } else {
                Some(parse_record(idx + 1, line))
            }
        })
        .collect();

    let mut documents = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (idx, outcome) in parsed.into_iter().enumerate() {
        let line = idx + 1;
        match outcome {
            None => {}
            Some(Err(e)) => errors.push(e),
            Some(Ok(doc)) => {
                if let Some(window) = &options.window {
                    if !window.contains(doc.published_at) {
                        errors.push(RecordError {
                            line,
                            field: Some("published_at".into()),
                            message: format!(
                                "{} outside corpus window {}..={}",
                                doc.published_at, window.start, window.end
                            ),
                        });
                        continue;
                    }
                }
                if !seen.insert(doc.doc_id.clone()) {
                    errors.push(RecordError {
                        line,
                        field: Some("doc_id".into()),
                        message: format!("duplicate doc_id {:?}", doc.doc_id),
                    });
                    continue;
                }
                documents.push(doc);
            }
        }
    }

    let mut manifest = CorpusManifest::from_documents(documents);
    if options.window.is_some() {
        manifest.window = options.window;
    }
    Ok(LoadReport { manifest, errors })
}

fn parse_record(line: usize, text: &str) -> Result<RawDocument, RecordError> {
    let err = |field: Option<&str>, message: String| RecordError {
        line,
        field: field.map(str::to_string),
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| err(None, format!("invalid JSON: {e}")))?;
    let Value::Object(object) = value else {
        return Err(err(None, "record is not a JSON object".into()));
    };
    if let Some(unknown) = object.keys().find(|k| !CORPUS_FIELDS.contains(&k.as_str())) {
        return Err(err(Some(unknown), "unknown field".into()));
    }
    let field = |name: &str| -> Result<String, RecordError> {
        match object.get(name) {
            None => Err(err(Some(name), "missing field".into())),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(other) => Err(err(Some(name), format!("expected string, found {other}"))),
        }
    };
    let doc_id = field("doc_id")?;
    if doc_id.is_empty() {
        return Err(err(Some("doc_id"), "empty doc_id".into()));
    }
    let url = field("url")?;
    let domain = field("domain")?;
    if domain.is_empty() {
        return Err(err(Some("domain"), "empty domain".into()));
    }
    if domain.chars().any(char::is_uppercase) {
        return Err(err(Some("domain"), format!("domain {domain:?} is not lowercase")));
    }
    let outlet = field("outlet")?;
    let published_raw = field("published_at")?;
    let published_at = parse_date(&published_raw)
        .ok_or_else(|| err(Some("published_at"), format!("invalid date {published_raw:?}")))?;
    let title = field("title")?;
    let body = field("body")?;
    Ok(RawDocument {
        doc_id,
        url,
        domain,
        outlet,
        published_at,
        title,
        body,
    })
}

/// Accepts a plain ISO-8601 date or a full timestamp whose date part is used.
fn parse_date(raw: &str) -> Option<NaiveDate> {
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Some(d);
    }
    chrono::DateTime::parse_from_rfc3339(raw)
        .ok()
        .map(|dt| dt.with_timezone(&chrono::Utc).date_naive())
}

/// Writes documents as canonical JSONL (field order of [`CORPUS_FIELDS`]).
pub fn write_corpus<W: Write>(documents: &[RawDocument], mut writer: W) -> io::Result<()> {
    for doc in documents {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_outlet_metadata(path: &Path) -> Result<BTreeMap<String, OutletMeta>, IngestError> {
    let mut text = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let raw: Map<String, Value> = serde_json::from_str(&text)?;
    let mut out = BTreeMap::new();
    for (outlet, value) in raw {
        out.insert(outlet, serde_json::from_value(value)?);
    }
    Ok(out)
}

/// Keeps documents whose body has at least `min_chars` Unicode scalar values.
/// Order is preserved.
pub fn filter_min_length(manifest: CorpusManifest, min_chars: usize) -> CorpusManifest {
    let CorpusManifest {
        documents,
        window,
        outlet_metadata,
    } = manifest;
    let documents = documents
        .into_iter()
        .filter(|d| char_len(&d.body) >= min_chars)
        .collect();
    CorpusManifest {
        documents,
        window,
        outlet_metadata,
    }
}
