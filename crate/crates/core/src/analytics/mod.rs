//! The fact table and every aggregate report computed from it.
//!
//! All reports read a [`FactTable`], which holds one row per accepted person
//! mention sorted by `(doc_id, sentence_index, start, end)`. Because every
//! reduction walks that fixed order, reports do not depend on the order in
//! which mentions arrived or on the number of worker threads.

mod demographics;
mod facts;
mod orientation;
mod outlets;
mod politicians;
mod stats;
mod temporal;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{MentionAnnotation, DEFAULT_MIN_LOG_LIKELIHOOD};
use crate::ingest::CorpusWindow;
use crate::report::{Provenance, ReportTable};
use crate::sentiment::ScoreMapping;

pub use demographics::fact_age;
pub use demographics::{age_report, gender_report, GenderGrouping};
pub use facts::{build_facts, FactBuild, FactError, FactTable, MentionFact};
pub use orientation::{orientation_mention_distribution, orientation_sentiment_deviation, GroupBy};
pub use outlets::{outlet_ranking, outlet_sentiment, source_similarity_ranks, SourceVectors};
pub use politicians::{extreme_politicians, politician_ranking, top_politicians, PoliticianSummary};
pub use stats::{confidence_stability, corpus_stats};
pub use temporal::{temporal_series, Dimension, Measure};

/// Group label for corpus-wide rows.
pub const ALL_GROUP: &str = "ALL";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdKind {
    #[default]
    Population,
    Sample,
}

/// Report parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub score_mapping: ScoreMapping,
    /// Outlets with fewer politician mentions are left out of outlet reports.
    pub min_mentions_per_outlet: u64,
    /// Outlets shown in the outlet sentiment, orientation and similarity reports.
    pub max_outlets: usize,
    /// Outlets shown in the gender and age reports.
    pub demographic_outlets: usize,
    pub top_politicians: usize,
    pub extreme_pool: usize,
    pub extreme_k: usize,
    pub source_support: usize,
    pub source_sentiment_floor: u64,
    pub yearly_std: StdKind,
    pub temporal_politicians: usize,
    pub link_threshold: f64,
    pub stability_top_k: usize,
    pub stability_keep_fraction: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            score_mapping: ScoreMapping::Argmax,
            min_mentions_per_outlet: 1,
            max_outlets: 40,
            demographic_outlets: 10,
            top_politicians: 10,
            extreme_pool: 100,
            extreme_k: 10,
            source_support: 1000,
            source_sentiment_floor: 10,
            yearly_std: StdKind::Population,
            temporal_politicians: 10,
            link_threshold: DEFAULT_MIN_LOG_LIKELIHOOD,
            stability_top_k: 1000,
            stability_keep_fraction: 0.5,
        }
    }
}

/// Everything a report may read.
#[derive(Debug, Clone)]
pub struct ReportContext<'a> {
    pub facts: &'a FactTable,
    /// All annotations before link filtering; only corpus statistics use them.
    pub mentions: &'a [MentionAnnotation],
    pub articles: &'a [crate::ingest::RawDocument],
    pub window: Option<CorpusWindow>,
    /// Topic ids in catalog order.
    pub topics: &'a [String],
    pub config: &'a AnalysisConfig,
    pub provenance: Provenance,
}

impl ReportContext<'_> {
    /// Calendar years covered by the corpus window, or by the facts when no
    /// window is known.
    pub fn years(&self) -> Vec<i32> {
        match self.window {
            Some(w) => w.years(),
            None => {
                let years: std::collections::BTreeSet<i32> = self.facts.iter().map(|f| f.year).collect();
                match (years.first(), years.last()) {
                    (Some(&a), Some(&b)) => (a..=b).collect(),
                    _ => Vec::new(),
                }
            }
        }
    }
}

macro_rules! report_ids {
    ($($variant:ident => $name:literal,)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum ReportId { $($variant,)* }

        impl ReportId {
            pub const ALL: &'static [ReportId] = &[$(ReportId::$variant,)*];

            pub fn as_str(&self) -> &'static str {
                match self { $(ReportId::$variant => $name,)* }
            }
        }

        impl std::str::FromStr for ReportId {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(ReportId::$variant),)*
                    other => Err(format!("unknown report id {other:?}")),
                }
            }
        }
    };
}

report_ids! {
    OutletSentiment => "outlet_sentiment",
    OrientationMentionsByOutlet => "orientation_mentions_by_outlet",
    OrientationMentionsByTopic => "orientation_mentions_by_topic",
    OrientationDeviationByOutlet => "orientation_deviation_by_outlet",
    OrientationDeviationByTopic => "orientation_deviation_by_topic",
    TopPoliticians => "top_politicians",
    ExtremePoliticians => "extreme_politicians",
    GenderByOutlet => "gender_by_outlet",
    GenderByYear => "gender_by_year",
    AgeByOutlet => "age_by_outlet",
    SourceSimilarity => "source_similarity",
    TemporalOrientationMentions => "temporal_orientation_mentions",
    TemporalOrientationSentiment => "temporal_orientation_sentiment",
    TemporalPoliticianMentions => "temporal_politician_mentions",
    TemporalPoliticianSentiment => "temporal_politician_sentiment",
    TemporalGenderMentions => "temporal_gender_mentions",
    TemporalGenderSentiment => "temporal_gender_sentiment",
    CorpusStats => "corpus_stats",
    ConfidenceStability => "confidence_stability",
}

impl std::fmt::Display for ReportId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn run_report(id: ReportId, ctx: &ReportContext<'_>) -> ReportTable {
    let facts = ctx.facts;
    let config = ctx.config;
    let mut table = match id {
        ReportId::OutletSentiment => outlet_sentiment(facts, config),
        ReportId::OrientationMentionsByOutlet => {
            orientation_mention_distribution(facts, GroupBy::Outlet, ctx.topics, config)
        }
        ReportId::OrientationMentionsByTopic => {
            orientation_mention_distribution(facts, GroupBy::Topic, ctx.topics, config)
        }
        ReportId::OrientationDeviationByOutlet => {
            orientation_sentiment_deviation(facts, GroupBy::Outlet, ctx.topics, config)
        }
        ReportId::OrientationDeviationByTopic => {
            orientation_sentiment_deviation(facts, GroupBy::Topic, ctx.topics, config)
        }
        ReportId::TopPoliticians => top_politicians(facts, config.top_politicians, config.yearly_std),
        ReportId::ExtremePoliticians => extreme_politicians(facts, config.extreme_pool, config.extreme_k),
        ReportId::GenderByOutlet => gender_report(facts, GenderGrouping::Outlet, &ctx.years(), config),
        ReportId::GenderByYear => gender_report(facts, GenderGrouping::Year, &ctx.years(), config),
        ReportId::AgeByOutlet => age_report(facts, config),
        ReportId::SourceSimilarity => source_similarity_ranks(facts, config),
        ReportId::TemporalOrientationMentions => {
            temporal_series(facts, Dimension::Orientation, Measure::Mentions, &ctx.years(), config)
        }
        ReportId::TemporalOrientationSentiment => temporal_series(
            facts,
            Dimension::Orientation,
            Measure::MeanSentiment,
            &ctx.years(),
            config,
        ),
        ReportId::TemporalPoliticianMentions => {
            temporal_series(facts, Dimension::Politician, Measure::Mentions, &ctx.years(), config)
        }
        ReportId::TemporalPoliticianSentiment => temporal_series(
            facts,
            Dimension::Politician,
            Measure::MeanSentiment,
            &ctx.years(),
            config,
        ),
        ReportId::TemporalGenderMentions => {
            temporal_series(facts, Dimension::Gender, Measure::Mentions, &ctx.years(), config)
        }
        ReportId::TemporalGenderSentiment => {
            temporal_series(facts, Dimension::Gender, Measure::MeanSentiment, &ctx.years(), config)
        }
        ReportId::CorpusStats => corpus_stats(
            ctx.articles,
            ctx.mentions,
            facts,
            ctx.topics,
            &ctx.years(),
            config.link_threshold,
        ),
        ReportId::ConfidenceStability => confidence_stability(facts, config),
    };
    table.report_id = id.as_str().to_string();
    table.provenance = ctx.provenance.clone();
    table
}

/// Every report, in catalog order.
pub fn run_all(ctx: &ReportContext<'_>) -> Vec<ReportTable> {
    ReportId::ALL.par_iter().map(|&id| run_report(id, ctx)).collect()
}

/// Per-key mention count and score accumulator used by most reports.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Tally {
    pub count: u64,
    pub sum: crate::numeric::CompensatedSum,
}

impl Tally {
    pub fn add(&mut self, score: f64) {
        self.count += 1;
        self.sum.add(score);
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum.value() / self.count as f64)
    }
}

pub(crate) fn tally_by<K: Ord, I>(items: I) -> BTreeMap<K, Tally>
where
    I: IntoIterator<Item = (K, f64)>,
{
    let mut out: BTreeMap<K, Tally> = BTreeMap::new();
    for (k, score) in items {
        out.entry(k).or_default().add(score);
    }
    out
}

pub(crate) fn share(count: u64, total: u64) -> Option<f64> {
    (total > 0).then(|| count as f64 / total as f64)
}
