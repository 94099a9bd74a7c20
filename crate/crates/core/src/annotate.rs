//! Mention annotation interchange format, link acceptance, and a rule-based
//! mock annotator.
//!
//! The JSONL schema written and read here is the contract with external
//! model adapters: `doc_id, sentence_index, start, end, surface, entity_type,
//! kb_id, link_log_likelihood, p_negative, p_neutral, p_positive`. Spans are
//! Unicode-scalar offsets within the sentence, end exclusive.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use crate::ingest::CorpusManifest;
use crate::text::tokenize;

/// Default minimum link log-likelihood; links must be strictly above it.
pub const DEFAULT_MIN_LOG_LIKELIHOOD: f64 = -0.2;

const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityType {
    Person,
    Organization,
    Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Negative,
    Neutral,
    Positive,
}

impl SentimentClass {
    pub const ALL: [SentimentClass; 3] = [Self::Negative, Self::Neutral, Self::Positive];
}

/// Class probabilities for one mention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentDistribution {
    pub p_negative: f64,
    pub p_neutral: f64,
    pub p_positive: f64,
}

impl SentimentDistribution {
    pub fn new(p_negative: f64, p_neutral: f64, p_positive: f64) -> Result<Self, String> {
        let d = Self {
            p_negative,
            p_neutral,
            p_positive,
        };
        d.validate()?;
        Ok(d)
    }

    /// Each probability in [0, 1] and the sum within 1e-6 of one.
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("p_negative", self.p_negative),
            ("p_neutral", self.p_neutral),
            ("p_positive", self.p_positive),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} = {p} outside [0, 1]"));
            }
        }
        let sum = self.p_negative + self.p_neutral + self.p_positive;
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(format!("probabilities sum to {sum}, expected 1"));
        }
        Ok(())
    }

    pub fn probability(&self, class: SentimentClass) -> f64 {
        match class {
            SentimentClass::Negative => self.p_negative,
            SentimentClass::Neutral => self.p_neutral,
            SentimentClass::Positive => self.p_positive,
        }
    }

    /// Most probable class. Any tie involving the maximum resolves to neutral.
    pub fn argmax(&self) -> SentimentClass {
        let max = self.p_negative.max(self.p_neutral).max(self.p_positive);
        let at_max = [self.p_negative, self.p_neutral, self.p_positive]
            .iter()
            .filter(|&&p| p == max)
            .count();
        if at_max > 1 || self.p_neutral == max {
            SentimentClass::Neutral
        } else if self.p_negative == max {
            SentimentClass::Negative
        } else {
            SentimentClass::Positive
        }
    }

    /// Largest class probability.
    pub fn confidence(&self) -> f64 {
        self.p_negative.max(self.p_neutral).max(self.p_positive)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityLink {
    pub kb_id: String,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MentionAnnotation {
    pub doc_id: String,
    pub sentence_index: u32,
    pub start: u32,
    pub end: u32,
    pub surface: String,
    pub entity_type: EntityType,
    pub link: Option<EntityLink>,
    pub sentiment: SentimentDistribution,
}

impl MentionAnnotation {
    /// Total order used wherever mentions need a canonical sequence.
    pub fn sort_key(&self) -> (&str, u32, u32, u32) {
        (&self.doc_id, self.sentence_index, self.start, self.end)
    }

    pub fn kb_id(&self) -> Option<&str> {
        self.link.as_ref().map(|l| l.kb_id.as_str())
    }
}

/// Flat on-disk form of [`MentionAnnotation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRecord {
    doc_id: String,
    sentence_index: u32,
    start: u32,
    end: u32,
    surface: String,
    entity_type: EntityType,
    kb_id: Option<String>,
    link_log_likelihood: Option<f64>,
    p_negative: f64,
    p_neutral: f64,
    p_positive: f64,
}

impl From<&MentionAnnotation> for AnnotationRecord {
    fn from(m: &MentionAnnotation) -> Self {
        Self {
            doc_id: m.doc_id.clone(),
            sentence_index: m.sentence_index,
            start: m.start,
            end: m.end,
            surface: m.surface.clone(),
            entity_type: m.entity_type,
            kb_id: m.link.as_ref().map(|l| l.kb_id.clone()),
            link_log_likelihood: m.link.as_ref().map(|l| l.log_likelihood),
            p_negative: m.sentiment.p_negative,
            p_neutral: m.sentiment.p_neutral,
            p_positive: m.sentiment.p_positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineErrorKind {
    Schema,
    Distribution,
    UnknownDocument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub kind: LineErrorKind,
    pub message: String,
}

impl std::fmt::Display for LineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{} invalid annotation line(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<LineError>),
    #[error("gazetteer is empty")]
    EmptyGazetteer,
}

fn validate_record(line: usize, record: AnnotationRecord) -> Result<MentionAnnotation, LineError> {
    let schema = |message: String| LineError {
        line,
        kind: LineErrorKind::Schema,
        message,
    };
    if record.start >= record.end {
        return Err(schema(format!(
            "span start {} not before end {}",
            record.start, record.end
        )));
    }
    let link = match (record.kb_id, record.link_log_likelihood) {
        (None, None) => None,
        (Some(kb_id), Some(ll)) => {
            if !(ll <= 0.0) {
                return Err(schema(format!("link_log_likelihood {ll} must be <= 0")));
            }
            Some(EntityLink {
                kb_id,
                log_likelihood: ll,
            })
        }
        _ => {
            return Err(schema(
                "kb_id and link_log_likelihood must both be null or both be set".into(),
            ))
        }
    };
    let sentiment = SentimentDistribution {
        p_negative: record.p_negative,
        p_neutral: record.p_neutral,
        p_positive: record.p_positive,
    };
    sentiment.validate().map_err(|message| LineError {
        line,
        kind: LineErrorKind::Distribution,
        message,
    })?;
    Ok(MentionAnnotation {
        doc_id: record.doc_id,
        sentence_index: record.sentence_index,
        start: record.start,
        end: record.end,
        surface: record.surface,
        entity_type: record.entity_type,
        link,
        sentiment,
    })
}

/// Parses and validates annotation JSONL. When `known_docs` is given every
/// `doc_id` must belong to it. All invalid lines are reported together.
pub fn parse_annotations<R: BufRead>(
    reader: R,
    known_docs: Option<&HashSet<&str>>,
) -> Result<Vec<MentionAnnotation>, AnnotationError> {
    let lines: Vec<String> = reader
        .lines()
        .collect::<io::Result<_>>()
        .map_err(|source| AnnotationError::Io {
            path: PathBuf::from("<reader>"),
            source,
        })?;
    let parsed: Vec<Option<Result<MentionAnnotation, LineError>>> = lines
        .par_iter()
        .enumerate()
        .map(|(idx, text)| {
            if text.trim().is_empty() {
                return None;
            }
            let line = idx + 1;
            let outcome = serde_json::from_str::<AnnotationRecord>(text)
                .map_err(|e| LineError {
                    line,
                    kind: LineErrorKind::Schema,
                    message: e.to_string(),
                })
                .and_then(|record| validate_record(line, record))
                .and_then(|m| match known_docs {
                    Some(ids) if !ids.contains(m.doc_id.as_str()) => Err(LineError {
                        line,
                        kind: LineErrorKind::UnknownDocument,
                        message: format!("unknown doc_id {:?}", m.doc_id),
                    }),
                    _ => Ok(m),
                });
            Some(outcome)
        })
        .collect();

    let mut mentions = Vec::new();
    let mut errors = Vec::new();
    for outcome in parsed.into_iter().flatten() {
        match outcome {
            Ok(m) => mentions.push(m),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(mentions)
    } else {
        Err(AnnotationError::Invalid(errors))
    }
}

pub fn read_annotations(
    path: &Path,
    manifest: Option<&CorpusManifest>,
) -> Result<Vec<MentionAnnotation>, AnnotationError> {
    let file = fs::File::open(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ids = manifest.map(CorpusManifest::doc_ids);
    parse_annotations(BufReader::new(file), ids.as_ref()).map_err(|e| match e {
        AnnotationError::Io { source, .. } => AnnotationError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Writes annotations in the canonical field order.
pub fn write_annotations<W: Write>(mentions: &[MentionAnnotation], mut writer: W) -> io::Result<()> {
    for m in mentions {
        serde_json::to_writer(&mut writer, &AnnotationRecord::from(m))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkFilterOutcome {
    pub kept: Vec<MentionAnnotation>,
    /// Linked mentions at or below the threshold.
    pub dropped_low_likelihood: usize,
    pub unlinked: usize,
}

/// Keeps mentions whose link log-likelihood is strictly greater than
/// `min_log_likelihood`.
pub fn filter_linked(mentions: &[MentionAnnotation], min_log_likelihood: f64) -> LinkFilterOutcome {
    let mut out = LinkFilterOutcome::default();
    for m in mentions {
        match &m.link {
            None => out.unlinked += 1,
            Some(link) if link.log_likelihood > min_log_likelihood => out.kept.push(m.clone()),
            Some(_) => out.dropped_low_likelihood += 1,
        }
    }
    out
}

/// Splits text into sentences at `.`, `!` or `?` followed by whitespace.
/// Returned sentences are trimmed of surrounding whitespace; empty ones are
/// skipped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((idx, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            if let Some(&(next_idx, next)) = chars.peek() {
                if next.is_whitespace() {
                    sentences.push(&text[start..next_idx]);
                    start = next_idx;
                }
            }
        }
        let _ = idx;
    }
    sentences.push(&text[start..]);
    sentences.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Gazetteer value: a linked or unlinked entity of a given type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GazetteerEntry {
    pub kb_id: Option<String>,
    pub entity_type: EntityType,
}

impl<'de> Deserialize<'de> for GazetteerEntry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(String),
            Full {
                kb_id: Option<String>,
                #[serde(default = "person")]
                entity_type: EntityType,
            },
        }
        fn person() -> EntityType {
            EntityType::Person
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Id(kb_id) => GazetteerEntry {
                kb_id: Some(kb_id),
                entity_type: EntityType::Person,
            },
            Raw::Full { kb_id, entity_type } => GazetteerEntry { kb_id, entity_type },
        })
    }
}

/// Surface form to entity. A plain string value means a linked person.
pub type Gazetteer = BTreeMap<String, GazetteerEntry>;

pub fn person_gazetteer<I, S, K>(entries: I) -> Gazetteer
where
    I: IntoIterator<Item = (S, K)>,
    S: Into<String>,
    K: Into<String>,
{
    entries
        .into_iter()
        .map(|(s, k)| {
            (
                s.into(),
                GazetteerEntry {
                    kb_id: Some(k.into()),
                    entity_type: EntityType::Person,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentRule {
    pub cue: String,
    pub class: SentimentClass,
}

/// Ordered cue table. The first rule whose cue occurs in a sentence decides
/// the class of every mention in it; sentences without a cue are neutral.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentimentRules {
    pub rules: Vec<SentimentRule>,
}

impl SentimentRules {
    pub fn new<I, S>(rules: I) -> Self
    where
        I: IntoIterator<Item = (S, SentimentClass)>,
        S: Into<String>,
    {
        Self {
            rules: rules
                .into_iter()
                .map(|(cue, class)| SentimentRule { cue: cue.into(), class })
                .collect(),
        }
    }

    pub fn classify(&self, sentence: &str) -> SentimentClass {
        let tokens = tokenize(sentence);
        for rule in &self.rules {
            let cue = tokenize(&rule.cue);
            if !cue.is_empty() && tokens.windows(cue.len()).any(|w| w == cue.as_slice()) {
                return rule.class;
            }
        }
        SentimentClass::Neutral
    }
}

/// Deterministic stand-in for the model adapter.
///
/// Mentions are exact, word-bounded gazetteer matches (longest match wins on
/// overlap). Class probabilities and link likelihoods are drawn from a
/// generator seeded by `(seed, doc_id, sentence_index, start)`, so output is
/// independent of processing order. The ruled class always has probability in
/// [0.51, 1); link log-likelihoods fall in (-0.3, 0].
pub fn mock_annotate(
    manifest: &CorpusManifest,
    gazetteer: &Gazetteer,
    rules: &SentimentRules,
    seed: u64,
) -> Result<Vec<MentionAnnotation>, AnnotationError> {
    if gazetteer.is_empty() {
        return Err(AnnotationError::EmptyGazetteer);
    }
    let mut surfaces: Vec<(&String, &GazetteerEntry)> = gazetteer.iter().collect();
    surfaces.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));

    let per_doc: Vec<Vec<MentionAnnotation>> = manifest
        .documents
        .par_iter()
        .map(|doc| {
            let mut out = Vec::new();
            for (sentence_index, sentence) in split_sentences(&doc.body).into_iter().enumerate() {
                let class = rules.classify(sentence);
                for (start, end, surface, entry) in find_mentions(sentence, &surfaces) {
                    let mut rng = mention_rng(seed, &doc.doc_id, sentence_index as u32, start);
                    out.push(MentionAnnotation {
                        doc_id: doc.doc_id.clone(),
                        sentence_index: sentence_index as u32,
                        start,
                        end,
                        surface: surface.to_string(),
                        entity_type: entry.entity_type,
                        link: entry.kb_id.as_ref().map(|kb_id| EntityLink {
                            kb_id: kb_id.clone(),
                            log_likelihood: -0.3 * rng.gen::<f64>(),
                        }),
                        sentiment: draw_distribution(&mut rng, class),
                    });
                }
            }
            out
        })
        .collect();
    Ok(per_doc.into_iter().flatten().collect())
}

fn mention_rng(seed: u64, doc_id: &str, sentence_index: u32, start: u32) -> ChaCha8Rng {
    let mut key = Vec::with_capacity(doc_id.len() + 16);
    key.extend_from_slice(&seed.to_le_bytes());
    key.extend_from_slice(doc_id.as_bytes());
    key.extend_from_slice(&sentence_index.to_le_bytes());
    key.extend_from_slice(&start.to_le_bytes());
    ChaCha8Rng::seed_from_u64(xxh3_64(&key))
}

fn draw_distribution(rng: &mut ChaCha8Rng, class: SentimentClass) -> SentimentDistribution {
    let top = 0.51 + 0.49 * rng.gen::<f64>();
    let rest = 1.0 - top;
    let second = rest * rng.gen::<f64>();
    let third = rest - second;
    let (neg, neu, pos) = match class {
        SentimentClass::Negative => (top, second, third),
        SentimentClass::Neutral => (second, top, third),
        SentimentClass::Positive => (second, third, top),
    };
    SentimentDistribution {
        p_negative: neg,
        p_neutral: neu,
        p_positive: pos,
    }
}

/// Non-overlapping, word-bounded matches as (char start, char end, surface, entry).
fn find_mentions<'g>(
    sentence: &str,
    surfaces: &[(&'g String, &'g GazetteerEntry)],
) -> Vec<(u32, u32, &'g str, &'g GazetteerEntry)> {
    let mut candidates: Vec<(usize, usize, &'g str, &'g GazetteerEntry)> = Vec::new();
    for (surface, entry) in surfaces {
        if surface.is_empty() {
            continue;
        }
        for (byte_start, _) in sentence.match_indices(surface.as_str()) {
            let byte_end = byte_start + surface.len();
            let before_ok = sentence[..byte_start]
                .chars()
                .next_back()
                .map_or(true, |c| !c.is_alphanumeric());
            let after_ok = sentence[byte_end..]
                .chars()
                .next()
                .map_or(true, |c| !c.is_alphanumeric());
            if before_ok && after_ok {
                candidates.push((byte_start, byte_end, surface.as_str(), entry));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    let mut taken: Vec<(u32, u32, &'g str, &'g GazetteerEntry)> = Vec::new();
    let mut last_end = 0usize;
    for (s, e, surface, entry) in candidates {
        if s < last_end {
            continue;
        }
        last_end = e;
        let cs = sentence[..s].chars().count() as u32;
        let ce = cs + surface.chars().count() as u32;
        taken.push((cs, ce, surface, entry));
    }
    taken
}

/// Text covered by a mention span within its sentence, if the span fits.
pub fn span_text(sentence: &str, start: u32, end: u32) -> Option<String> {
    let len = sentence.chars().count() as u32;
    if start >= end || end > len {
        return None;
    }
    Some(
        sentence
            .chars()
            .skip(start as usize)
            .take((end - start) as usize)
            .collect(),
    )
}
