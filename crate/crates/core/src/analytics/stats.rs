use std::collections::BTreeMap;

use chrono::Datelike;

use crate::annotate::{EntityType, MentionAnnotation};
use crate::ingest::RawDocument;
use crate::kb::{Gender, Orientation};
use crate::report::{Cell, ColumnKind, Provenance, ReportTable};
use crate::sentiment::{stability_check, StabilityConfig};

use super::{AnalysisConfig, FactTable};

/// Corpus and mention counts. Country, orientation, topic and gender rows
/// count politician mentions.
pub fn corpus_stats(
    articles: &[RawDocument],
    mentions: &[MentionAnnotation],
    facts: &FactTable,
    topics: &[String],
    years: &[i32],
    link_threshold: f64,
) -> ReportTable {
    let mut table = ReportTable::new(
        "corpus_stats",
        &[
            ("section", ColumnKind::Text),
            ("key", ColumnKind::Text),
            ("count", ColumnKind::Integer),
        ],
        Provenance::default(),
    );
    let mut row = |section: &str, key: &str, count: usize| {
        table.push(vec![Cell::text(section), Cell::text(key), Cell::int(count as u64)]);
    };
    row("documents", "articles", articles.len());

    let persons = mentions.iter().filter(|m| m.entity_type == EntityType::Person);
    row("mentions", "all_persons", persons.clone().count());
    row(
        "mentions",
        "linked_persons",
        persons
            .filter(|m| m.link.as_ref().is_some_and(|l| l.log_likelihood > link_threshold))
            .count(),
    );
    row("mentions", "politicians", facts.politicians().count());

    let mut countries: BTreeMap<&str, usize> = BTreeMap::new();
    let mut orientations: BTreeMap<Orientation, usize> = Orientation::ALL.iter().map(|&o| (o, 0)).collect();
    let mut genders: BTreeMap<Gender, usize> = [Gender::Male, Gender::Female, Gender::Other, Gender::Unknown]
        .into_iter()
        .map(|g| (g, 0))
        .collect();
    let mut by_topic: BTreeMap<&str, usize> = topics.iter().map(|t| (t.as_str(), 0)).collect();
    for f in facts.politicians() {
        *countries.entry(f.country.as_str()).or_default() += 1;
        if let Some(o) = f.orientation {
            *orientations.get_mut(&o).expect("all buckets") += 1;
        }
        *genders.get_mut(&f.gender).expect("all genders") += 1;
        for t in &f.topic_ids {
            if let Some(n) = by_topic.get_mut(t.as_str()) {
                *n += 1;
            }
        }
    }
    for (c, n) in countries {
        row("country", c, n);
    }
    for (o, n) in orientations {
        row("orientation", o.as_str(), n);
    }
    for t in topics {
        row("topic", t, by_topic[t.as_str()]);
    }
    for (g, n) in genders {
        row("gender", g.as_str(), n);
    }

    let mut outlets: BTreeMap<&str, usize> = BTreeMap::new();
    let mut per_year: BTreeMap<i32, usize> = years.iter().map(|&y| (y, 0)).collect();
    for d in articles {
        *outlets.entry(d.outlet.as_str()).or_default() += 1;
        *per_year.entry(d.published_at.year()).or_default() += 1;
    }
    for (o, n) in outlets {
        row("outlet_articles", o, n);
    }
    for (y, n) in per_year {
        row("year_articles", &y.to_string(), n);
    }
    table
}

/// Stability of per-politician mention counts and mean scores when only the
/// most confident half of each predicted class is kept.
pub fn confidence_stability(facts: &FactTable, config: &AnalysisConfig) -> ReportTable {
    let mut table = ReportTable::new(
        "confidence_stability",
        &[("statistic", ColumnKind::Text), ("value", ColumnKind::Real)],
        Provenance::default(),
    );
    let mentions: Vec<MentionAnnotation> = facts
        .politicians()
        .map(|f| MentionAnnotation {
            doc_id: f.doc_id.clone(),
            sentence_index: f.sentence_index,
            start: f.start,
            end: f.end,
            surface: String::new(),
            entity_type: EntityType::Person,
            link: Some(crate::annotate::EntityLink {
                kb_id: f.kb_id.clone(),
                log_likelihood: 0.0,
            }),
            sentiment: f.sentiment,
        })
        .collect();
    let result = stability_check(
        &mentions,
        &StabilityConfig {
            top_k: config.stability_top_k,
            keep_fraction: config.stability_keep_fraction,
            mapping: config.score_mapping,
        },
    )
    .ok();
    let stats: [(&str, Option<f64>); 6] = [
        ("entities", result.as_ref().map(|r| r.entities as f64)),
        (
            "surviving_entities",
            result.as_ref().map(|r| r.surviving_entities as f64),
        ),
        ("total_mentions", Some(mentions.len() as f64)),
        ("kept_mentions", result.as_ref().map(|r| r.kept_mentions as f64)),
        ("pearson_mentions", result.as_ref().map(|r| r.pearson_mentions)),
        ("pearson_sentiment", result.as_ref().map(|r| r.pearson_sentiment)),
    ];
    for (name, value) in stats {
        table.push(vec![Cell::text(name), Cell::real(value)]);
    }
    table
}
