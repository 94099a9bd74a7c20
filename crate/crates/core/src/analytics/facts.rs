use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::Serialize;

use crate::annotate::{EntityType, MentionAnnotation, SentimentDistribution};
use crate::ingest::{CorpusManifest, RawDocument};
use crate::kb::{Gender, KnowledgeBase, Orientation};
use crate::sentiment::{score_mention, ScoreMapping};
use crate::topics::TopicSubsets;

/// One accepted person mention joined with its document, knowledge-base
/// record and topic memberships.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MentionFact {
    pub doc_id: String,
    pub sentence_index: u32,
    pub start: u32,
    pub end: u32,
    pub outlet: String,
    pub domain: String,
    pub published_at: NaiveDate,
    pub year: i32,
    pub kb_id: String,
    pub name: String,
    pub gender: Gender,
    pub birth_date: Option<NaiveDate>,
    pub country: String,
    pub is_politician: bool,
    /// Set only for politicians with a mappable party.
    pub orientation: Option<Orientation>,
    pub sentiment: SentimentDistribution,
    pub sentiment_score: f64,
    pub topic_ids: BTreeSet<String>,
}

impl MentionFact {
    pub fn sort_key(&self) -> (&str, u32, u32, u32, &str) {
        (&self.doc_id, self.sentence_index, self.start, self.end, &self.kb_id)
    }
}

/// Facts in canonical order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactTable {
    facts: Vec<MentionFact>,
}

impl FactTable {
    pub fn new(mut facts: Vec<MentionFact>) -> Self {
        facts.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Self { facts }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MentionFact> {
        self.facts.iter()
    }

    /// Facts about politicians, the population of every politics report.
    pub fn politicians(&self) -> impl Iterator<Item = &MentionFact> + Clone {
        self.facts.iter().filter(|f| f.is_politician)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn as_slice(&self) -> &[MentionFact] {
        &self.facts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub enum FactError {
    #[error("mention {doc_id}#{sentence_index}:{start} references unknown document")]
    UnknownDocument {
        doc_id: String,
        sentence_index: u32,
        start: u32,
    },
    #[error("mention {doc_id}#{sentence_index}:{start} links to {kb_id}, which has no person record")]
    UnknownPerson {
        doc_id: String,
        sentence_index: u32,
        start: u32,
        kb_id: String,
    },
}

#[derive(Debug, Clone, Default)]
pub struct FactBuild {
    pub facts: FactTable,
    pub errors: Vec<FactError>,
    /// Mentions of organizations or locations.
    pub skipped_non_person: usize,
    pub skipped_unlinked: usize,
}

enum Outcome {
    Fact(Box<MentionFact>),
    Error(FactError),
    NonPerson,
    Unlinked,
}

/// Joins link-filtered mentions with documents, the knowledge base and topic
/// memberships.
pub fn build_facts(
    manifest: &CorpusManifest,
    mentions: &[MentionAnnotation],
    kb: &KnowledgeBase,
    topic_subsets: &TopicSubsets,
    mapping: ScoreMapping,
) -> FactBuild {
    let docs: HashMap<&str, &RawDocument> = manifest.documents.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut doc_topics: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for (topic, members) in topic_subsets {
        for d in members {
            doc_topics.entry(d.as_str()).or_default().insert(topic.clone());
        }
    }

    let outcomes: Vec<Outcome> = mentions
        .par_iter()
        .map(|m| {
            if m.entity_type != EntityType::Person {
                return Outcome::NonPerson;
            }
            let Some(link) = &m.link else {
                return Outcome::Unlinked;
            };
            let Some(doc) = docs.get(m.doc_id.as_str()) else {
                return Outcome::Error(FactError::UnknownDocument {
                    doc_id: m.doc_id.clone(),
                    sentence_index: m.sentence_index,
                    start: m.start,
                });
            };
            let Some(person) = kb.person(&link.kb_id) else {
                return Outcome::Error(FactError::UnknownPerson {
                    doc_id: m.doc_id.clone(),
                    sentence_index: m.sentence_index,
                    start: m.start,
                    kb_id: link.kb_id.clone(),
                });
            };
            let orientation = if person.is_politician {
                kb.resolve_orientation(person, doc.published_at)
            } else {
                None
            };
            Outcome::Fact(Box::new(MentionFact {
                doc_id: m.doc_id.clone(),
                sentence_index: m.sentence_index,
                start: m.start,
                end: m.end,
                outlet: doc.outlet.clone(),
                domain: doc.domain.clone(),
                published_at: doc.published_at,
                year: doc.published_at.year(),
                kb_id: person.kb_id.clone(),
                name: person.canonical_name.clone(),
                gender: person.gender,
                birth_date: person.birth_date,
                country: person.country.clone(),
                is_politician: person.is_politician,
                orientation,
                sentiment: m.sentiment,
                sentiment_score: score_mention(&m.sentiment, mapping),
                topic_ids: doc_topics.get(m.doc_id.as_str()).cloned().unwrap_or_default(),
            }))
        })
        .collect();

    let mut build = FactBuild::default();
    let mut facts = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Fact(f) => facts.push(*f),
            Outcome::Error(e) => build.errors.push(e),
            Outcome::NonPerson => build.skipped_non_person += 1,
            Outcome::Unlinked => build.skipped_unlinked += 1,
        }
    }
    build.facts = FactTable::new(facts);
    build
}
