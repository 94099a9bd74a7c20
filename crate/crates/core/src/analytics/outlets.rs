use std::collections::BTreeMap;

use crate::numeric::cosine;
use crate::report::{Cell, ColumnKind, Provenance, ReportTable};

use super::{tally_by, AnalysisConfig, FactTable, MentionFact, Tally};

/// Outlets by politician mention count (descending, then name), keeping at
/// most `limit` with at least `min_mentions`.
pub fn outlet_ranking(facts: &FactTable, min_mentions: u64, limit: usize) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for f in facts.politicians() {
        *counts.entry(f.outlet.as_str()).or_default() += 1;
    }
    let mut ranked: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_mentions)
        .map(|(o, n)| (o.to_string(), n))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(limit);
    ranked
}

pub fn outlet_sentiment(facts: &FactTable, config: &AnalysisConfig) -> ReportTable {
    let mut table = ReportTable::new(
        "outlet_sentiment",
        &[
            ("outlet", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("mean_sentiment", ColumnKind::Real),
            ("corpus_mean_sentiment", ColumnKind::Real),
        ],
        Provenance::default(),
    );
    let mut corpus = Tally::default();
    for f in facts.politicians() {
        corpus.add(f.sentiment_score);
    }
    let by_outlet = tally_by(facts.politicians().map(|f| (f.outlet.as_str(), f.sentiment_score)));
    for (outlet, n) in outlet_ranking(facts, config.min_mentions_per_outlet, config.max_outlets) {
        table.push(vec![
            Cell::text(outlet.as_str()),
            Cell::int(n),
            Cell::real(by_outlet[outlet.as_str()].mean()),
            Cell::real(corpus.mean()),
        ]);
    }
    table
}

/// Mention counts and mean scores of one source over a fixed politician
/// support. Sentiment entries are `None` below the mention floor.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceVectors {
    pub support: Vec<String>,
    pub mentions: Vec<f64>,
    pub sentiment: Vec<Option<f64>>,
}

impl SourceVectors {
    pub fn build<'a>(
        facts: impl IntoIterator<Item = &'a MentionFact>,
        support: &[String],
        sentiment_floor: u64,
    ) -> Self {
        let index: BTreeMap<&str, usize> = support.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
        let mut tallies = vec![Tally::default(); support.len()];
        for f in facts {
            if let Some(&i) = index.get(f.kb_id.as_str()) {
                tallies[i].add(f.sentiment_score);
            }
        }
        Self {
            support: support.to_vec(),
            mentions: tallies.iter().map(|t| t.count as f64).collect(),
            sentiment: tallies
                .iter()
                .map(|t| if t.count >= sentiment_floor { t.mean() } else { None })
                .collect(),
        }
    }

    pub fn mentions_cosine(&self, other: &SourceVectors) -> Option<f64> {
        cosine(&self.mentions, &other.mentions)
    }

    /// Cosine over the entries defined in both vectors.
    pub fn sentiment_cosine(&self, other: &SourceVectors) -> Option<f64> {
        let (a, b): (Vec<f64>, Vec<f64>) = self
            .sentiment
            .iter()
            .zip(&other.sentiment)
            .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
            .unzip();
        if a.is_empty() {
            return None;
        }
        cosine(&a, &b)
    }
}

/// Ranks 1..n by descending value; missing values go last, ties by name.
fn rank_desc(names: &[String], values: &[Option<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&i, &j| match (values[i], values[j]) {
        (Some(a), Some(b)) => b.total_cmp(&a).then_with(|| names[i].cmp(&names[j])),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => names[i].cmp(&names[j]),
    });
    let mut ranks = vec![0; names.len()];
    for (r, i) in order.into_iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

pub fn source_similarity_ranks(facts: &FactTable, config: &AnalysisConfig) -> ReportTable {
    let mut table = ReportTable::new(
        "source_similarity",
        &[
            ("outlet", ColumnKind::Text),
            ("mentions_cosine", ColumnKind::Real),
            ("mentions_rank", ColumnKind::Integer),
            ("sentiment_cosine", ColumnKind::Real),
            ("sentiment_rank", ColumnKind::Integer),
        ],
        Provenance::default(),
    );
    let support: Vec<String> = super::politician_ranking(facts)
        .into_iter()
        .take(config.source_support)
        .map(|p| p.kb_id)
        .collect();
    let corpus = SourceVectors::build(facts.politicians(), &support, config.source_sentiment_floor);
    let outlets: Vec<String> = outlet_ranking(facts, config.min_mentions_per_outlet, config.max_outlets)
        .into_iter()
        .map(|(o, _)| o)
        .collect();
    let mut mentions_cos = Vec::with_capacity(outlets.len());
    let mut sentiment_cos = Vec::with_capacity(outlets.len());
    for outlet in &outlets {
        let v = SourceVectors::build(
            facts.politicians().filter(|f| &f.outlet == outlet),
            &support,
            config.source_sentiment_floor,
        );
        mentions_cos.push(v.mentions_cosine(&corpus));
        sentiment_cos.push(v.sentiment_cosine(&corpus));
    }
    let mentions_rank = rank_desc(&outlets, &mentions_cos);
    let sentiment_rank = rank_desc(&outlets, &sentiment_cos);
    for (i, outlet) in outlets.iter().enumerate() {
        table.push(vec![
            Cell::text(outlet.as_str()),
            Cell::real(mentions_cos[i]),
            Cell::int(mentions_rank[i] as u64),
            Cell::real(sentiment_cos[i]),
            Cell::int(sentiment_rank[i] as u64),
        ]);
    }
    table
}
