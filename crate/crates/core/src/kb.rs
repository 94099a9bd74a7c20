//! Knowledge-base enrichment: person demographics, party left-right scores
//! and the five-bucket orientation scale.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::annotate::{EntityType, MentionAnnotation};

pub const DAYS_PER_YEAR: f64 = 365.2425;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Other,
    Unknown,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Other => "other",
            Gender::Unknown => "unknown",
        }
    }
}

/// Five-point political orientation, ordered left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    RL,
    CL,
    C,
    CR,
    RR,
}

impl Orientation {
    pub const ALL: [Orientation; 5] = [Self::RL, Self::CL, Self::C, Self::CR, Self::RR];

    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::RL => "RL",
            Orientation::CL => "CL",
            Orientation::C => "C",
            Orientation::CR => "CR",
            Orientation::RR => "RR",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonRecord {
    pub kb_id: String,
    #[serde(rename = "name")]
    pub canonical_name: String,
    pub gender: Gender,
    pub birth_date: Option<NaiveDate>,
    pub country: String,
    pub is_politician: bool,
    /// Most recent affiliation first.
    pub party_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyRecord {
    pub party_kb_id: String,
    pub name: String,
    pub country: String,
    pub left_right: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkRow {
    pub encyclopedia_party_id: String,
    pub parlgov_party_id: String,
}

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("duplicate kb_id {0:?}")]
    DuplicateId(String),
    #[error("crosswalk references undefined party {0:?}")]
    UndefinedParty(String),
    #[error("left-right score {0} outside [0, 10]")]
    ScoreOutOfRange(f64),
    #[error("invalid orientation boundaries {0:?}")]
    InvalidScale([f64; 4]),
    #[error("birth date {birth} is after publication date {published}")]
    BirthAfterPublication { birth: NaiveDate, published: NaiveDate },
}

/// Cut points splitting [0, 10] into five half-open buckets; the last bucket
/// is closed at 10.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationScale {
    pub boundaries: [f64; 4],
}

impl Default for OrientationScale {
    fn default() -> Self {
        Self {
            boundaries: [2.0, 4.0, 6.0, 8.0],
        }
    }
}

impl OrientationScale {
    pub fn new(boundaries: [f64; 4]) -> Result<Self, KbError> {
        let increasing = boundaries.windows(2).all(|w| w[0] < w[1]);
        if !increasing || boundaries[0] <= 0.0 || boundaries[3] >= 10.0 {
            return Err(KbError::InvalidScale(boundaries));
        }
        Ok(Self { boundaries })
    }

    pub fn orientation_of(&self, left_right: f64) -> Result<Orientation, KbError> {
        if !(0.0..=10.0).contains(&left_right) {
            return Err(KbError::ScoreOutOfRange(left_right));
        }
        let bucket = self.boundaries.iter().filter(|&&b| left_right >= b).count();
        Ok(Orientation::ALL[bucket])
    }
}

/// Bucket of a 0-10 left-right score on the default scale:
/// RL `[0,2)`, CL `[2,4)`, C `[4,6)`, CR `[6,8)`, RR `[8,10]`.
pub fn orientation_of(left_right: f64) -> Result<Orientation, KbError> {
    OrientationScale::default().orientation_of(left_right)
}

/// Age in years at publication: exact day difference over 365.2425.
pub fn age_at(birth_date: NaiveDate, published_at: NaiveDate) -> Result<f64, KbError> {
    if birth_date > published_at {
        return Err(KbError::BirthAfterPublication {
            birth: birth_date,
            published: published_at,
        });
    }
    Ok((published_at - birth_date).num_days() as f64 / DAYS_PER_YEAR)
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub persons: BTreeMap<String, PersonRecord>,
    /// Keyed by ParlGov party id.
    pub parties: BTreeMap<String, PartyRecord>,
    /// Encyclopedia party id to ParlGov party id.
    pub crosswalk: BTreeMap<String, String>,
    pub scale: OrientationScale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub persons: usize,
    pub politicians: usize,
    pub politicians_with_orientation: usize,
    pub politician_mentions: usize,
    pub mappable_politician_mentions: usize,
    /// `None` when there are no politician mentions.
    pub mappable_fraction: Option<f64>,
}

impl KnowledgeBase {
    pub fn new(
        persons: Vec<PersonRecord>,
        parties: Vec<PartyRecord>,
        crosswalk: Vec<CrosswalkRow>,
        scale: OrientationScale,
    ) -> Result<Self, KbError> {
        let mut person_map = BTreeMap::new();
        for p in persons {
            if person_map.contains_key(&p.kb_id) {
                return Err(KbError::DuplicateId(p.kb_id));
            }
            person_map.insert(p.kb_id.clone(), p);
        }
        let mut party_map = BTreeMap::new();
        for p in parties {
            if !(0.0..=10.0).contains(&p.left_right) {
                return Err(KbError::ScoreOutOfRange(p.left_right));
            }
            if party_map.contains_key(&p.party_kb_id) {
                return Err(KbError::DuplicateId(p.party_kb_id));
            }
            party_map.insert(p.party_kb_id.clone(), p);
        }
        let mut cross = BTreeMap::new();
        for row in crosswalk {
            if !party_map.contains_key(&row.parlgov_party_id) {
                return Err(KbError::UndefinedParty(row.parlgov_party_id));
            }
            if cross.contains_key(&row.encyclopedia_party_id) {
                return Err(KbError::DuplicateId(row.encyclopedia_party_id));
            }
            cross.insert(row.encyclopedia_party_id, row.parlgov_party_id);
        }
        Ok(Self {
            persons: person_map,
            parties: party_map,
            crosswalk: cross,
            scale,
        })
    }

    pub fn person(&self, kb_id: &str) -> Option<&PersonRecord> {
        self.persons.get(kb_id)
    }

    /// The most recent affiliation that maps to a scored party.
    pub fn mapped_party(&self, person: &PersonRecord) -> Option<&PartyRecord> {
        person
            .party_ids
            .iter()
            .find_map(|id| self.crosswalk.get(id).and_then(|pg| self.parties.get(pg)))
    }

    /// Orientation of a person through their most recent mappable party.
    /// Affiliations carry no dates, so `published_at` does not select among
    /// them.
    pub fn resolve_orientation(&self, person: &PersonRecord, _published_at: NaiveDate) -> Option<Orientation> {
        self.mapped_party(person).map(|party| {
            self.scale
                .orientation_of(party.left_right)
                .expect("scores validated on load")
        })
    }

    /// Share of politician mentions whose person has a resolvable orientation.
    pub fn coverage(&self, mentions: &[MentionAnnotation]) -> CoverageReport {
        let politicians: Vec<&PersonRecord> = self.persons.values().filter(|p| p.is_politician).collect();
        let mappable: HashSet<&str> = politicians
            .iter()
            .filter(|p| self.mapped_party(p).is_some())
            .map(|p| p.kb_id.as_str())
            .collect();
        let mut politician_mentions = 0;
        let mut mappable_mentions = 0;
        for m in mentions {
            if m.entity_type != EntityType::Person {
                continue;
            }
            let Some(person) = m.kb_id().and_then(|id| self.persons.get(id)) else {
                continue;
            };
            if person.is_politician {
                politician_mentions += 1;
                if mappable.contains(person.kb_id.as_str()) {
                    mappable_mentions += 1;
                }
            }
        }
        CoverageReport {
            persons: self.persons.len(),
            politicians: politicians.len(),
            politicians_with_orientation: mappable.len(),
            politician_mentions,
            mappable_politician_mentions: mappable_mentions,
            mappable_fraction: (politician_mentions > 0).then(|| mappable_mentions as f64 / politician_mentions as f64),
        }
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned, R: BufRead>(reader: R, file: &str) -> Result<Vec<T>, KbError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| KbError::Io {
            path: PathBuf::from(file),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| KbError::Parse {
            file: file.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn parse_persons<R: BufRead>(reader: R) -> Result<Vec<PersonRecord>, KbError> {
    read_jsonl(reader, "persons")
}

pub fn parse_parties<R: BufRead>(reader: R) -> Result<Vec<PartyRecord>, KbError> {
    read_jsonl(reader, "parties")
}

/// Crosswalk CSV with header `encyclopedia_party_id,parlgov_party_id`.
pub fn parse_crosswalk<R: Read>(reader: R) -> Result<Vec<CrosswalkRow>, KbError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (idx, row) in rdr.deserialize().enumerate() {
        out.push(row.map_err(|e: csv::Error| KbError::Parse {
            file: "crosswalk".into(),
            line: idx + 2,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<fs::File>, KbError> {
    fs::File::open(path).map(BufReader::new).map_err(|source| KbError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_kb(
    person_path: &Path,
    party_path: &Path,
    crosswalk_path: &Path,
    scale: OrientationScale,
) -> Result<KnowledgeBase, KbError> {
    let persons = parse_persons(open(person_path)?)?;
    let parties = parse_parties(open(party_path)?)?;
    let crosswalk = parse_crosswalk(open(crosswalk_path)?)?;
    KnowledgeBase::new(persons, parties, crosswalk, scale)
}
