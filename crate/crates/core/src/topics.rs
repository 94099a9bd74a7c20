//! BM25 inverted index over title and body, and threshold-based topic
//! subsets.
//!
//! Scores use `idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))` and the usual
//! saturating term-frequency factor with `k1 = 1.2`, `b = 0.75`. Query text
//! goes through the same tokenizer as documents and repeated query terms count
//! once.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::CorpusManifest;
use crate::numeric::CompensatedSum;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Position of the document in [`InvertedIndex::doc_ids`].
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    /// Postings sorted by document position.
    pub postings: BTreeMap<String, Vec<Posting>>,
    pub doc_ids: Vec<String>,
    pub doc_lengths: Vec<u32>,
    pub avg_doc_length: f64,
    #[serde(skip)]
    positions: HashMap<String, u32>,
}

#[derive(Debug, thiserror::Error)]
pub enum TopicError {
    #[error("document {0:?} is not indexed")]
    UnknownDocument(String),
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("topic {topic:?} has negative threshold {threshold}")]
    NegativeThreshold { topic: String, threshold: f64 },
    #[error("duplicate topic id {0:?}")]
    DuplicateTopic(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid topics file: {0}")]
    Parse(#[from] serde_json::Error),
}

impl InvertedIndex {
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn position(&self, doc_id: &str) -> Option<u32> {
        self.positions.get(doc_id).copied()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Rebuilds the doc_id lookup after deserialization.
    pub fn reindex_positions(&mut self) {
        self.positions = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.doc_count(), self.document_frequency(term))
    }
}

pub fn idf(doc_count: usize, df: usize) -> f64 {
    let n = doc_count as f64;
    let df = df as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Per-term BM25 contribution.
pub fn term_weight(idf: f64, tf: u32, doc_len: u32, avg_len: f64, params: Bm25Params) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = tf as f64;
    let norm = if avg_len > 0.0 {
        1.0 - params.b + params.b * doc_len as f64 / avg_len
    } else {
        1.0
    };
    idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
}

/// Tokenized query with repeated terms removed, first occurrence order kept.
pub fn query_terms(text: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    tokenize(text).into_iter().filter(|t| seen.insert(t.clone())).collect()
}

pub fn build_index(manifest: &CorpusManifest) -> InvertedIndex {
    let counted: Vec<(BTreeMap<String, u32>, u32)> = manifest
        .documents
        .par_iter()
        .map(|doc| {
            let tokens = tokenize(&doc.indexed_text());
            let mut counts = BTreeMap::new();
            for t in &tokens {
                *counts.entry(t.clone()).or_insert(0u32) += 1;
            }
            (counts, tokens.len() as u32)
        })
        .collect();

    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut doc_lengths = Vec::with_capacity(counted.len());
    for (doc, (counts, len)) in counted.into_iter().enumerate() {
        doc_lengths.push(len);
        for (term, tf) in counts {
            postings.entry(term).or_default().push(Posting { doc: doc as u32, tf });
        }
    }
    let avg_doc_length = if doc_lengths.is_empty() {
        0.0
    } else {
        doc_lengths.iter().map(|&l| l as u64).sum::<u64>() as f64 / doc_lengths.len() as f64
    };
    let mut index = InvertedIndex {
        postings,
        doc_ids: manifest.documents.iter().map(|d| d.doc_id.clone()).collect(),
        doc_lengths,
        avg_doc_length,
        positions: HashMap::new(),
    };
    index.reindex_positions();
    index
}

pub fn bm25_score(
    index: &InvertedIndex,
    query_terms: &[String],
    doc_id: &str,
    params: Bm25Params,
) -> Result<f64, TopicError> {
    let pos = index
        .position(doc_id)
        .ok_or_else(|| TopicError::UnknownDocument(doc_id.to_string()))?;
    let len = index.doc_lengths[pos as usize];
    let mut score = CompensatedSum::new();
    for term in query_terms {
        let Some(list) = index.postings.get(term) else {
            continue;
        };
        if let Ok(i) = list.binary_search_by_key(&pos, |p| p.doc) {
            let idf = idf(index.doc_count(), list.len());
            score.add(term_weight(idf, list[i].tf, len, index.avg_doc_length, params));
        }
    }
    Ok(score.value())
}

/// Term-at-a-time scoring of every document matching at least one query term.
/// Returned as (document position, score), sorted by position.
pub fn score_matching(index: &InvertedIndex, query_terms: &[String], params: Bm25Params) -> Vec<(u32, f64)> {
    let mut acc: BTreeMap<u32, CompensatedSum> = BTreeMap::new();
    for term in query_terms {
        let Some(list) = index.postings.get(term) else {
            continue;
        };
        let idf = idf(index.doc_count(), list.len());
        for p in list {
            let w = term_weight(
                idf,
                p.tf,
                index.doc_lengths[p.doc as usize],
                index.avg_doc_length,
                params,
            );
            acc.entry(p.doc).or_default().add(w);
        }
    }
    acc.into_iter().map(|(d, s)| (d, s.value())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicQuery {
    pub topic_id: String,
    pub query_text: String,
    pub threshold: f64,
}

/// Ordered topic definitions with unique ids and non-negative thresholds.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TopicCatalog {
    topics: Vec<TopicQuery>,
}

impl TopicCatalog {
    pub fn new(topics: Vec<TopicQuery>) -> Result<Self, TopicError> {
        let mut seen = BTreeSet::new();
        for t in &topics {
            if !(t.threshold >= 0.0) {
                return Err(TopicError::NegativeThreshold {
                    topic: t.topic_id.clone(),
                    threshold: t.threshold,
                });
            }
            if !seen.insert(t.topic_id.as_str()) {
                return Err(TopicError::DuplicateTopic(t.topic_id.clone()));
            }
        }
        Ok(Self { topics })
    }

    pub fn topics(&self) -> &[TopicQuery] {
        &self.topics
    }

    pub fn get(&self, topic_id: &str) -> Result<&TopicQuery, TopicError> {
        self.topics
            .iter()
            .find(|t| t.topic_id == topic_id)
            .ok_or_else(|| TopicError::UnknownTopic(topic_id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.topics.iter().map(|t| t.topic_id.as_str())
    }
}

pub fn parse_topics(text: &str) -> Result<TopicCatalog, TopicError> {
    TopicCatalog::new(serde_json::from_str(text)?)
}

pub fn load_topics(path: &Path) -> Result<TopicCatalog, TopicError> {
    let text = fs::read_to_string(path).map_err(|source| TopicError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_topics(&text)
}

/// Documents that match at least one query term and score at or above the
/// topic threshold.
pub fn select_topic_subset(index: &InvertedIndex, topic: &TopicQuery, params: Bm25Params) -> BTreeSet<String> {
    score_matching(index, &query_terms(&topic.query_text), params)
        .into_iter()
        .filter(|&(_, s)| s >= topic.threshold)
        .map(|(d, _)| index.doc_ids[d as usize].clone())
        .collect()
}

/// Topic id to member documents for every topic of the catalog.
pub type TopicSubsets = BTreeMap<String, BTreeSet<String>>;

pub fn select_all_topics(index: &InvertedIndex, catalog: &TopicCatalog, params: Bm25Params) -> TopicSubsets {
    catalog
        .topics()
        .par_iter()
        .map(|t| (t.topic_id.clone(), select_topic_subset(index, t, params)))
        .collect()
}

/// Inverts topic subsets into document id to topic ids.
pub fn topics_by_document(subsets: &TopicSubsets) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (topic, docs) in subsets {
        for d in docs {
            out.entry(d.clone()).or_default().insert(topic.clone());
        }
    }
    out
}
