use std::collections::BTreeMap;

use crate::numeric::{population_std, sample_std};
use crate::report::{Cell, ColumnKind, Provenance, ReportTable};

use super::{FactTable, StdKind, Tally};

/// Per-politician aggregate over all years.
#[derive(Debug, Clone)]
pub struct PoliticianSummary {
    pub kb_id: String,
    pub name: String,
    pub mentions: u64,
    pub mean_sentiment: f64,
    /// Mean score per year with at least one mention.
    pub yearly_means: BTreeMap<i32, f64>,
}

/// Politicians by mention count descending, ties by kb_id.
pub fn politician_ranking(facts: &FactTable) -> Vec<PoliticianSummary> {
    let mut acc: BTreeMap<&str, (&str, Tally, BTreeMap<i32, Tally>)> = BTreeMap::new();
    for f in facts.politicians() {
        let e = acc
            .entry(f.kb_id.as_str())
            .or_insert_with(|| (f.name.as_str(), Tally::default(), BTreeMap::new()));
        e.1.add(f.sentiment_score);
        e.2.entry(f.year).or_default().add(f.sentiment_score);
    }
    let mut out: Vec<PoliticianSummary> = acc
        .into_iter()
        .map(|(kb_id, (name, total, years))| PoliticianSummary {
            kb_id: kb_id.to_string(),
            name: name.to_string(),
            mentions: total.count,
            mean_sentiment: total.mean().expect("non-empty"),
            yearly_means: years
                .into_iter()
                .map(|(y, t)| (y, t.mean().expect("non-empty")))
                .collect(),
        })
        .collect();
    out.sort_by(|a, b| b.mentions.cmp(&a.mentions).then_with(|| a.kb_id.cmp(&b.kb_id)));
    out
}

pub fn top_politicians(facts: &FactTable, k: usize, std_kind: StdKind) -> ReportTable {
    let mut table = ReportTable::new(
        "top_politicians",
        &[
            ("rank", ColumnKind::Integer),
            ("kb_id", ColumnKind::Text),
            ("name", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("mean_sentiment", ColumnKind::Real),
            ("yearly_std", ColumnKind::Real),
            ("years", ColumnKind::Integer),
        ],
        Provenance::default(),
    );
    for (i, p) in politician_ranking(facts).into_iter().take(k).enumerate() {
        let means: Vec<f64> = p.yearly_means.values().copied().collect();
        let std = match std_kind {
            StdKind::Population => population_std(&means),
            StdKind::Sample => sample_std(&means),
        };
        table.push(vec![
            Cell::int(i as u64 + 1),
            Cell::text(p.kb_id),
            Cell::text(p.name),
            Cell::int(p.mentions),
            Cell::real(Some(p.mean_sentiment)),
            Cell::real(std),
            Cell::int(means.len() as u64),
        ]);
    }
    table
}

/// The `k` highest and `k` lowest mean scores among the `pool` most
/// mentioned politicians. Equal means are ordered by mentions descending,
/// then kb_id.
pub fn extreme_politicians(facts: &FactTable, pool: usize, k: usize) -> ReportTable {
    let mut table = ReportTable::new(
        "extreme_politicians",
        &[
            ("side", ColumnKind::Text),
            ("rank", ColumnKind::Integer),
            ("kb_id", ColumnKind::Text),
            ("name", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("mean_sentiment", ColumnKind::Real),
        ],
        Provenance::default(),
    );
    let mut candidates = politician_ranking(facts);
    candidates.truncate(pool);
    let tie = |a: &super::politicians::PoliticianSummary, b: &super::politicians::PoliticianSummary| {
        b.mentions.cmp(&a.mentions).then_with(|| a.kb_id.cmp(&b.kb_id))
    };
    let mut highest = candidates.clone();
    highest.sort_by(|a, b| b.mean_sentiment.total_cmp(&a.mean_sentiment).then_with(|| tie(a, b)));
    let mut lowest = candidates;
    lowest.sort_by(|a, b| a.mean_sentiment.total_cmp(&b.mean_sentiment).then_with(|| tie(a, b)));
    for (side, list) in [("highest", highest), ("lowest", lowest)] {
        for (i, p) in list.into_iter().take(k).enumerate() {
            table.push(vec![
                Cell::text(side),
                Cell::int(i as u64 + 1),
                Cell::text(p.kb_id),
                Cell::text(p.name),
                Cell::int(p.mentions),
                Cell::real(Some(p.mean_sentiment)),
            ]);
        }
    }
    table
}
