//! Seeded synthetic corpora and knowledge bases for tests, benchmarks and
//! the bundled fixture.
//!
//! The generator plants the situations the pipeline has to handle: short
//! documents, near-duplicates within a domain, identical bodies across
//! domains, unlinked and non-person mentions, politicians without a mappable
//! party, missing birth dates, and party scores on bucket boundaries.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::{EntityType, Gazetteer, GazetteerEntry, SentimentClass, SentimentRules};
use crate::ingest::{write_corpus, OutletMeta, RawDocument};
use crate::kb::{CrosswalkRow, Gender, PartyRecord, PersonRecord};
use crate::topics::TopicQuery;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    /// Regular documents, before planted duplicates and short documents.
    pub documents: usize,
    pub outlets: usize,
    pub politicians: usize,
    pub other_persons: usize,
    /// Near-duplicates of earlier documents in the same domain.
    pub near_duplicates: usize,
    /// Copies of a document's body published by another outlet.
    pub cross_domain_copies: usize,
    /// Documents below the minimum length.
    pub short_documents: usize,
    pub start_year: i32,
    pub end_year: i32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            documents: 200,
            outlets: 8,
            politicians: 30,
            other_persons: 10,
            near_duplicates: 12,
            cross_domain_copies: 3,
            short_documents: 8,
            start_year: 2016,
            end_year: 2022,
        }
    }
}

/// A complete input set for the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub documents: Vec<RawDocument>,
    pub outlet_metadata: BTreeMap<String, OutletMeta>,
    pub persons: Vec<PersonRecord>,
    pub parties: Vec<PartyRecord>,
    pub crosswalk: Vec<CrosswalkRow>,
    pub gazetteer: Gazetteer,
    pub rules: SentimentRules,
    pub topics: Vec<TopicQuery>,
}

pub const FIXTURE_FILES: [&str; 8] = [
    "corpus.jsonl",
    "outlets.json",
    "persons.jsonl",
    "parties.jsonl",
    "crosswalk.csv",
    "gazetteer.json",
    "sentiment_rules.json",
    "topics.json",
];

const OUTLETS: [(&str, &str); 10] = [
    ("le-quotidien", "centre"),
    ("matin-express", "droite"),
    ("la-gazette", "gauche"),
    ("info-continu", "centre"),
    ("le-courrier", "gauche"),
    ("nouvel-echo", "droite"),
    ("la-depeche-libre", "centre"),
    ("hebdo-republique", "gauche"),
    ("journal-du-soir", "droite"),
    ("la-voix-du-nord-est", "centre"),
];

const FIRST_NAMES: [&str; 24] = [
    "Jean", "Marie", "Pierre", "Sophie", "Louis", "Claire", "Michel", "Anne", "Paul", "Julie", "Henri", "Camille",
    "Bernard", "Lucie", "Alain", "Isabelle", "Marc", "Nathalie", "Yves", "Chantal", "Olivier", "Sylvie", "Rachid",
    "Amina",
];

const LAST_NAMES: [&str; 30] = [
    "Dupont",
    "Moreau",
    "Lefebvre",
    "Garnier",
    "Rousseau",
    "Fontaine",
    "Chevalier",
    "Mercier",
    "Blanchard",
    "Gauthier",
    "Perrin",
    "Marchand",
    "Lemaire",
    "Barbier",
    "Renaud",
    "Carpentier",
    "Vasseur",
    "Brunet",
    "Aubert",
    "Leclerc",
    "Benali",
    "Morin",
    "Faure",
    "Colin",
    "Picard",
    "Roche",
    "Baron",
    "Tessier",
    "Delmas",
    "Guerin",
];

const FILLER: [&str; 48] = [
    "le",
    "la",
    "les",
    "un",
    "une",
    "des",
    "du",
    "dans",
    "pour",
    "avec",
    "sur",
    "par",
    "selon",
    "depuis",
    "gouvernement",
    "projet",
    "réforme",
    "débat",
    "loi",
    "séance",
    "ministre",
    "assemblée",
    "vote",
    "semaine",
    "annonce",
    "programme",
    "région",
    "budget",
    "rapport",
    "élection",
    "campagne",
    "parti",
    "majorité",
    "opposition",
    "conseil",
    "mesure",
    "public",
    "national",
    "local",
    "nouveau",
    "mardi",
    "jeudi",
    "matin",
    "soir",
    "déclaration",
    "commission",
    "texte",
    "question",
];

const POSITIVE_CUES: [&str; 4] = ["salue", "félicite", "soutient", "applaudit"];
const NEGATIVE_CUES: [&str; 4] = ["critique", "dénonce", "accuse", "condamne"];

const TOPICS: [(&str, &str, &[&str]); 10] = [
    (
        "climate",
        "climat réchauffement émissions",
        &["climat", "réchauffement", "émissions", "carbone"],
    ),
    (
        "corruption",
        "corruption détournement fraude",
        &["corruption", "détournement", "fraude", "enquête"],
    ),
    (
        "covid_economy",
        "covid chômage partiel relance",
        &["covid", "chômage", "partiel", "relance"],
    ),
    (
        "covid_health",
        "covid vaccin hôpital confinement",
        &["covid", "vaccin", "hôpital", "confinement"],
    ),
    (
        "yellow_vests",
        "gilets jaunes manifestation rond-point",
        &["gilets", "jaunes", "manifestation", "rond-point"],
    ),
    (
        "immigration",
        "immigration migrants asile frontières",
        &["immigration", "migrants", "asile", "frontières"],
    ),
    (
        "purchasing_power",
        "pouvoir d'achat inflation salaires prix",
        &["pouvoir", "d'achat", "inflation", "salaires"],
    ),
    (
        "syria_war",
        "syrie guerre damas réfugiés",
        &["syrie", "guerre", "damas", "réfugiés"],
    ),
    (
        "ukraine_war",
        "ukraine guerre invasion kiev",
        &["ukraine", "guerre", "invasion", "kiev"],
    ),
    (
        "ukraine_economy",
        "ukraine sanctions énergie gaz",
        &["ukraine", "sanctions", "énergie", "gaz"],
    ),
];

/// Party scores, including the bucket boundaries 2, 4, 6 and 8.
const PARTIES: [(&str, f64); 9] = [
    ("Front Populaire Uni", 0.8),
    ("Gauche Ouvrière", 2.0),
    ("Parti Social", 3.4),
    ("Écologistes", 3.9),
    ("Mouvement Central", 4.0),
    ("Union Démocrate", 5.7),
    ("Les Conservateurs", 6.0),
    ("Droite Républicaine", 7.6),
    ("Rassemblement Identitaire", 8.0),
];

pub fn topic_catalog(threshold: f64) -> Vec<TopicQuery> {
    TOPICS
        .iter()
        .map(|(id, query, _)| TopicQuery {
            topic_id: id.to_string(),
            query_text: query.to_string(),
            threshold,
        })
        .collect()
}

struct Person {
    surface: String,
    /// Additional surface form linking to the same entity.
    alias: Option<String>,
    tone: f64,
}

pub fn generate(config: &SynthConfig) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let n_outlets = config.outlets.clamp(1, OUTLETS.len());
    let outlets = &OUTLETS[..n_outlets];
    let outlet_metadata = outlets
        .iter()
        .map(|(o, leaning)| {
            (
                o.to_string(),
                OutletMeta {
                    leaning: Some(leaning.to_string()),
                },
            )
        })
        .collect();

    let mut parties = Vec::new();
    let mut crosswalk = Vec::new();
    for (i, (name, score)) in PARTIES.iter().enumerate() {
        parties.push(PartyRecord {
            party_kb_id: format!("pg{}", 101 + i),
            name: name.to_string(),
            country: "FR".into(),
            left_right: *score,
        });
        crosswalk.push(CrosswalkRow {
            encyclopedia_party_id: format!("Q9{:03}", i + 1),
            parlgov_party_id: format!("pg{}", 101 + i),
        });
    }
    // Parties known to the encyclopedia but absent from the crosswalk.
    let unmapped_parties = ["Q9901", "Q9902"];

    let mut names: Vec<(String, String)> = Vec::new();
    while names.len() < config.politicians + config.other_persons {
        let first = FIRST_NAMES.choose(&mut rng).unwrap().to_string();
        let last = LAST_NAMES.choose(&mut rng).unwrap().to_string();
        if !names.iter().any(|(f, l)| (f, l) == (&first, &last)) {
            names.push((first, last));
        }
    }

    let mut persons = Vec::new();
    let mut people = Vec::new();
    let mut gazetteer = Gazetteer::new();
    let mut used_last_names: BTreeMap<String, usize> = BTreeMap::new();
    for (_, last) in &names {
        *used_last_names.entry(last.clone()).or_default() += 1;
    }
    for (i, (first, last)) in names.iter().enumerate() {
        let kb_id = format!("Q{}", 1000 + i);
        let is_politician = i < config.politicians;
        let party_ids = if !is_politician {
            Vec::new()
        } else {
            match i % 10 {
                // no affiliation
                7 => Vec::new(),
                // only an unmapped party
                8 => vec![unmapped_parties[0].to_string()],
                // most recent party unmapped, previous one mapped
                9 => vec![
                    unmapped_parties[1].to_string(),
                    crosswalk[rng.gen_range(0..crosswalk.len())]
                        .encyclopedia_party_id
                        .clone(),
                ],
                _ => vec![crosswalk[rng.gen_range(0..crosswalk.len())]
                    .encyclopedia_party_id
                    .clone()],
            }
        };
        let gender = match rng.gen_range(0..100) {
            0..=61 => Gender::Male,
            62..=93 => Gender::Female,
            94..=96 => Gender::Other,
            _ => Gender::Unknown,
        };
        let birth_date = if rng.gen_bool(0.1) {
            None
        } else {
            NaiveDate::from_ymd_opt(rng.gen_range(1940..=1992), rng.gen_range(1..=12), rng.gen_range(1..=28))
        };
        let country = match rng.gen_range(0..10) {
            0 => "DE",
            1 => "US",
            _ => "FR",
        };
        let surface = format!("{first} {last}");
        let alias = (used_last_names[last] == 1 && i % 3 == 0).then(|| last.clone());
        gazetteer.insert(
            surface.clone(),
            GazetteerEntry {
                kb_id: Some(kb_id.clone()),
                entity_type: EntityType::Person,
            },
        );
        if let Some(a) = &alias {
            gazetteer.insert(
                a.clone(),
                GazetteerEntry {
                    kb_id: Some(kb_id.clone()),
                    entity_type: EntityType::Person,
                },
            );
        }
        persons.push(PersonRecord {
            kb_id,
            canonical_name: surface.clone(),
            gender,
            birth_date,
            country: country.into(),
            is_politician,
            party_ids,
        });
        people.push(Person {
            surface,
            alias,
            tone: rng.gen_range(-0.6..0.6),
        });
    }

    // Entities that are mentioned but never become facts.
    let extras: [(&str, Option<&str>, EntityType); 5] = [
        ("le porte-parole anonyme", None, EntityType::Person),
        ("Assemblée nationale", Some("Q7001"), EntityType::Organization),
        ("Conseil constitutionnel", None, EntityType::Organization),
        ("Marseille", Some("Q7002"), EntityType::Location),
        ("Bruxelles", None, EntityType::Location),
    ];
    for (surface, kb_id, entity_type) in extras {
        gazetteer.insert(
            surface.to_string(),
            GazetteerEntry {
                kb_id: kb_id.map(str::to_string),
                entity_type,
            },
        );
    }

    let person_weights = WeightedIndex::new((0..people.len()).map(|r| 1.0 / (r as f64 + 1.0).powf(0.8))).unwrap();
    let outlet_weights = WeightedIndex::new((0..outlets.len()).map(|r| 1.0 / (r as f64 + 1.0))).unwrap();
    let start = NaiveDate::from_ymd_opt(config.start_year, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(config.end_year, 12, 31).unwrap();
    let span_days = (end - start).num_days();

    let mut documents: Vec<RawDocument> = Vec::new();
    let mut next_id = 0usize;
    let mut new_id = || {
        next_id += 1;
        format!("doc-{next_id:05}")
    };

    for _ in 0..config.documents {
        let outlet = outlets[outlet_weights.sample(&mut rng)].0;
        let published_at = start + Duration::days(rng.gen_range(0..=span_days));
        let doc_topics: Vec<usize> = match rng.gen_range(0..10) {
            0..=3 => Vec::new(),
            4..=8 => vec![rng.gen_range(0..TOPICS.len())],
            _ => {
                let a = rng.gen_range(0..TOPICS.len());
                let b = (a + rng.gen_range(1..TOPICS.len())) % TOPICS.len();
                vec![a, b]
            }
        };
        let n_sentences = rng.gen_range(4..=8);
        let sentences: Vec<String> = (0..n_sentences)
            .map(|_| sentence(&mut rng, &people, &person_weights, &doc_topics, &extras))
            .collect();
        documents.push(RawDocument {
            doc_id: new_id(),
            url: String::new(),
            domain: format!("{outlet}.fr"),
            outlet: outlet.to_string(),
            published_at,
            title: title(&mut rng, &doc_topics),
            body: sentences.join(" "),
        });
    }
    for d in &mut documents {
        d.url = format!("https://{}/articles/{}", d.domain, d.doc_id);
    }

    let originals = documents.len();
    for _ in 0..config.near_duplicates.min(originals) {
        let base = documents[rng.gen_range(0..originals)].clone();
        let mut words: Vec<String> = base.body.split(' ').map(str::to_string).collect();
        let edits = rng.gen_range(1..=2);
        for _ in 0..edits {
            let at = rng.gen_range(0..words.len());
            if !words[at].chars().next().is_some_and(char::is_uppercase) {
                words[at] = FILLER.choose(&mut rng).unwrap().to_string();
            }
        }
        let doc_id = new_id();
        let shift = Duration::days(rng.gen_range(-3..=3));
        let published_at = (base.published_at + shift).clamp(start, end);
        documents.push(RawDocument {
            url: format!("https://{}/articles/{doc_id}", base.domain),
            doc_id,
            published_at,
            body: words.join(" "),
            ..base
        });
    }
    for _ in 0..config.cross_domain_copies.min(originals) {
        if outlets.len() < 2 {
            break;
        }
        let base = documents[rng.gen_range(0..originals)].clone();
        let other = outlets
            .iter()
            .map(|o| o.0)
            .filter(|o| *o != base.outlet)
            .collect::<Vec<_>>()
            .choose(&mut rng)
            .map(|o| o.to_string())
            .unwrap();
        let doc_id = new_id();
        documents.push(RawDocument {
            url: format!("https://{other}.fr/articles/{doc_id}"),
            doc_id,
            domain: format!("{other}.fr"),
            outlet: other,
            ..base
        });
    }
    for _ in 0..config.short_documents {
        let outlet = outlets[outlet_weights.sample(&mut rng)].0;
        let p = &people[person_weights.sample(&mut rng)];
        let doc_id = new_id();
        documents.push(RawDocument {
            url: format!("https://{outlet}.fr/breves/{doc_id}"),
            doc_id,
            domain: format!("{outlet}.fr"),
            outlet: outlet.to_string(),
            published_at: start + Duration::days(rng.gen_range(0..=span_days)),
            title: "Brève".into(),
            body: format!("{} {} le projet.", p.surface, POSITIVE_CUES.choose(&mut rng).unwrap()),
        });
    }

    let mut rules: Vec<(String, SentimentClass)> = Vec::new();
    for cue in NEGATIVE_CUES {
        rules.push((cue.to_string(), SentimentClass::Negative));
    }
    for cue in POSITIVE_CUES {
        rules.push((cue.to_string(), SentimentClass::Positive));
    }

    Fixture {
        documents,
        outlet_metadata,
        persons,
        parties,
        crosswalk,
        gazetteer,
        rules: SentimentRules::new(rules),
        topics: topic_catalog(3.0),
    }
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| FILLER.choose(rng).unwrap().to_string()).collect()
}

fn title(rng: &mut ChaCha8Rng, topics: &[usize]) -> String {
    let mut words = filler(rng, 4);
    if let Some(&t) = topics.first() {
        words.push(TOPICS[t].2.choose(rng).unwrap().to_string());
    }
    let mut t = words.join(" ");
    if let Some(first) = t.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    t
}

fn sentence(
    rng: &mut ChaCha8Rng,
    people: &[Person],
    weights: &WeightedIndex<f64>,
    topics: &[usize],
    extras: &[(&str, Option<&str>, EntityType)],
) -> String {
    let n_words = rng.gen_range(6..=12);
    let mut words = filler(rng, n_words);
    let mut tone = 0.0;
    let n_people = match rng.gen_range(0..10) {
        0..=1 => 0,
        2..=7 => 1,
        _ => 2,
    };
    let mut inserted = Vec::new();
    for _ in 0..n_people {
        let p = &people[weights.sample(rng)];
        tone += p.tone;
        let surface = match &p.alias {
            Some(a) if rng.gen_bool(0.3) => a.clone(),
            _ => p.surface.clone(),
        };
        inserted.push(surface);
    }
    if rng.gen_bool(0.15) {
        inserted.push(extras.choose(rng).unwrap().0.to_string());
    }
    for s in inserted {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, s);
    }
    let roll: f64 = rng.gen();
    let cue = if roll < 0.25 + tone.max(0.0) * 0.5 {
        Some(*POSITIVE_CUES.choose(rng).unwrap())
    } else if roll > 0.7 + tone.min(0.0) * 0.5 {
        Some(*NEGATIVE_CUES.choose(rng).unwrap())
    } else {
        None
    };
    if let Some(c) = cue {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, c.to_string());
    }
    if !topics.is_empty() && rng.gen_bool(0.6) {
        let t = topics[rng.gen_range(0..topics.len())];
        for _ in 0..rng.gen_range(1..=2) {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, TOPICS[t].2.choose(rng).unwrap().to_string());
        }
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

fn create(path: &Path) -> io::Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> io::Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn write_pretty<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

impl Fixture {
    /// Writes every input file named in [`FIXTURE_FILES`] into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = create(&dir.join("corpus.jsonl"))?;
        write_corpus(&self.documents, &mut w)?;
        w.flush()?;
        write_pretty(&dir.join("outlets.json"), &self.outlet_metadata)?;
        write_jsonl(&dir.join("persons.jsonl"), &self.persons)?;
        write_jsonl(&dir.join("parties.jsonl"), &self.parties)?;
        let mut cw = csv::Writer::from_writer(create(&dir.join("crosswalk.csv"))?);
        for row in &self.crosswalk {
            cw.serialize(row)?;
        }
        cw.flush()?;
        write_pretty(&dir.join("gazetteer.json"), &self.gazetteer)?;
        write_pretty(&dir.join("sentiment_rules.json"), &self.rules)?;
        write_pretty(&dir.join("topics.json"), &self.topics)?;
        Ok(())
    }
}
