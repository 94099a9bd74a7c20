use std::collections::{BTreeMap, BTreeSet};

use crate::kb::{Gender, Orientation};
use crate::report::{Cell, ColumnKind, Provenance, ReportTable};

use super::{politician_ranking, share, AnalysisConfig, FactTable, MentionFact, Tally};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Orientation,
    /// The most mentioned politicians, keyed by kb_id.
    Politician,
    Gender,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Mentions,
    MeanSentiment,
}

/// Key of a fact along a dimension, if the fact belongs to the dimension's
/// population.
fn key_of(f: &MentionFact, dim: Dimension) -> Option<String> {
    match dim {
        Dimension::Orientation => f.orientation.map(|o| o.as_str().to_string()),
        Dimension::Politician => Some(f.kb_id.clone()),
        Dimension::Gender => Some(f.gender.as_str().to_string()),
    }
}

fn keys(facts: &FactTable, dim: Dimension, config: &AnalysisConfig) -> Vec<String> {
    match dim {
        Dimension::Orientation => Orientation::ALL.iter().map(|o| o.as_str().to_string()).collect(),
        Dimension::Politician => politician_ranking(facts)
            .into_iter()
            .take(config.temporal_politicians)
            .map(|p| p.kb_id)
            .collect(),
        Dimension::Gender => {
            let present: BTreeSet<Gender> = facts.politicians().map(|f| f.gender).collect();
            present.into_iter().map(|g| g.as_str().to_string()).collect()
        }
    }
}

/// One row per (year, key). Shares are relative to the year's mentions in
/// the dimension's population (oriented mentions for orientations, all
/// politician mentions otherwise); empty years give nulls.
pub fn temporal_series(
    facts: &FactTable,
    dim: Dimension,
    measure: Measure,
    years: &[i32],
    config: &AnalysisConfig,
) -> ReportTable {
    let dim_name = match dim {
        Dimension::Orientation => "orientation",
        Dimension::Politician => "politician",
        Dimension::Gender => "gender",
    };
    let (measure_name, value_column) = match measure {
        Measure::Mentions => ("mentions", "share"),
        Measure::MeanSentiment => ("sentiment", "mean_sentiment"),
    };
    let mut table = ReportTable::new(
        &format!("temporal_{dim_name}_{measure_name}"),
        &[
            ("year", ColumnKind::Integer),
            ("key", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            (value_column, ColumnKind::Real),
        ],
        Provenance::default(),
    );
    let mut cells: BTreeMap<(i32, String), Tally> = BTreeMap::new();
    let mut totals: BTreeMap<i32, u64> = BTreeMap::new();
    for f in facts.politicians() {
        if let Some(k) = key_of(f, dim) {
            *totals.entry(f.year).or_default() += 1;
            cells.entry((f.year, k)).or_default().add(f.sentiment_score);
        }
    }
    let keys = keys(facts, dim, config);
    for &year in years {
        let total = totals.get(&year).copied().unwrap_or(0);
        for key in &keys {
            let t = cells.get(&(year, key.clone())).copied().unwrap_or_default();
            let value = match measure {
                Measure::Mentions => share(t.count, total),
                Measure::MeanSentiment => t.mean(),
            };
            table.push(vec![
                Cell::int(year),
                Cell::text(key.as_str()),
                Cell::int(t.count),
                Cell::real(value),
            ]);
        }
    }
    table
}
