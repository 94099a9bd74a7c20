//! Scalar sentiment scores, Pearson correlation and the confidence-filter
//! stability check.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::annotate::{MentionAnnotation, SentimentClass, SentimentDistribution};
use crate::numeric::MeanAccumulator;

/// How a class distribution becomes a number in [-1, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMapping {
    /// Argmax class mapped to -1 / 0 / +1, ties toward neutral.
    #[default]
    Argmax,
    /// `p_positive - p_negative`.
    Expected,
}

pub fn class_value(class: SentimentClass) -> f64 {
    match class {
        SentimentClass::Negative => -1.0,
        SentimentClass::Neutral => 0.0,
        SentimentClass::Positive => 1.0,
    }
}

pub fn score_mention(d: &SentimentDistribution, mapping: ScoreMapping) -> f64 {
    match mapping {
        ScoreMapping::Argmax => class_value(d.argmax()),
        ScoreMapping::Expected => d.p_positive - d.p_negative,
    }
}

pub fn confidence(d: &SentimentDistribution) -> f64 {
    d.confidence()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SentimentError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("keep fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("only {0} entities survive both samples; need at least two")]
    TooFewEntities(usize),
    #[error("{which} correlation undefined: {source}")]
    Undefined {
        which: &'static str,
        #[source]
        source: Box<SentimentError>,
    },
}

/// Product-moment correlation coefficient, by the textbook two-pass formula
/// with plain left-to-right sums. Callers pass points in a canonical order,
/// so the result is reproducible bit for bit.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, SentimentError> {
    if x.len() != y.len() {
        return Err(SentimentError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(SentimentError::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(SentimentError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(SentimentError::ZeroVariance("y"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `ceil(fraction * count)` robust to representation error in the product.
pub fn keep_count(fraction: f64, count: usize) -> usize {
    ((fraction * count as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Indices of the mentions kept when only the `fraction` most confident ones
/// of each argmax class are retained. Within a class, mentions are ranked by
/// confidence descending, then doc_id, then span. Indices are returned sorted.
pub fn most_confident_per_class(mentions: &[MentionAnnotation], fraction: f64) -> Result<Vec<usize>, SentimentError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SentimentError::InvalidFraction(fraction));
    }
    let mut by_class: BTreeMap<SentimentClass, Vec<usize>> = BTreeMap::new();
    for (i, m) in mentions.iter().enumerate() {
        by_class.entry(m.sentiment.argmax()).or_default().push(i);
    }
    let mut kept = Vec::new();
    for (_, mut idx) in by_class {
        idx.sort_by(|&a, &b| {
            let (ma, mb) = (&mentions[a], &mentions[b]);
            mb.sentiment
                .confidence()
                .total_cmp(&ma.sentiment.confidence())
                .then_with(|| ma.sort_key().cmp(&mb.sort_key()))
        });
        let k = keep_count(fraction, idx.len());
        kept.extend_from_slice(&idx[..k]);
    }
    kept.sort_unstable();
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub top_k: usize,
    pub keep_fraction: f64,
    pub mapping: ScoreMapping,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            top_k: 1000,
            keep_fraction: 0.5,
            mapping: ScoreMapping::Argmax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityResult {
    /// Top entities in the full sample.
    pub entities: usize,
    /// Of those, entities with at least one mention after filtering.
    pub surviving_entities: usize,
    pub total_mentions: usize,
    pub kept_mentions: usize,
    pub pearson_mentions: f64,
    pub pearson_sentiment: f64,
}

/// Compares per-entity mention counts and mean scores of the `top_k` most
/// mentioned entities between all linked mentions and the per-class most
/// confident subset. Unlinked mentions are ignored.
///
/// The mention correlation runs over all top entities (filtered counts may be
/// zero); the sentiment correlation over those with a filtered mean.
pub fn stability_check(
    mentions: &[MentionAnnotation],
    config: &StabilityConfig,
) -> Result<StabilityResult, SentimentError> {
    let linked: Vec<MentionAnnotation> = mentions.iter().filter(|m| m.link.is_some()).cloned().collect();
    let kept = most_confident_per_class(&linked, config.keep_fraction)?;

    let mut full: HashMap<&str, MeanAccumulator> = HashMap::new();
    for m in &linked {
        full.entry(m.kb_id().expect("linked"))
            .or_default()
            .add(score_mention(&m.sentiment, config.mapping));
    }
    let mut filtered: HashMap<&str, MeanAccumulator> = HashMap::new();
    for &i in &kept {
        let m = &linked[i];
        filtered
            .entry(m.kb_id().expect("linked"))
            .or_default()
            .add(score_mention(&m.sentiment, config.mapping));
    }

    let mut ranked: Vec<(&str, u64)> = full.iter().map(|(k, acc)| (*k, acc.count())).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(config.top_k);

    let mut counts_full = Vec::new();
    let mut counts_kept = Vec::new();
    let mut means_full = Vec::new();
    let mut means_kept = Vec::new();
    for (kb_id, n) in &ranked {
        counts_full.push(*n as f64);
        let f = filtered.get(kb_id);
        counts_kept.push(f.map_or(0, |a| a.count()) as f64);
        if let Some(mean) = f.and_then(MeanAccumulator::mean) {
            means_full.push(full[kb_id].mean().expect("non-empty"));
            means_kept.push(mean);
        }
    }
    if means_kept.len() < 2 {
        return Err(SentimentError::TooFewEntities(means_kept.len()));
    }
    let undefined = |which| {
        move |e| SentimentError::Undefined {
            which,
            source: Box::new(e),
        }
    };
    Ok(StabilityResult {
        entities: ranked.len(),
        surviving_entities: means_kept.len(),
        total_mentions: linked.len(),
        kept_mentions: kept.len(),
        pearson_mentions: pearson(&counts_full, &counts_kept).map_err(undefined("mentions"))?,
        pearson_sentiment: pearson(&means_full, &means_kept).map_err(undefined("sentiment"))?,
    })
}
