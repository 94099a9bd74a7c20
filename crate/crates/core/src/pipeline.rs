//! In-memory run of every stage, from raw documents to the fact table.
//!
//! The command-line tool runs the same stages one at a time through files;
//! this path is used by tests and benchmarks.

use serde::{Deserialize, Serialize};

use crate::analytics::{build_facts, FactBuild};
use crate::annotate::{
    filter_linked, mock_annotate, AnnotationError, LinkFilterOutcome, MentionAnnotation, DEFAULT_MIN_LOG_LIKELIHOOD,
};
use crate::dedup::{dedup_per_domain, DedupConfig, DedupError, DedupOutcome};
use crate::ingest::{filter_min_length, CorpusManifest, IngestError, DEFAULT_MIN_CHARS};
use crate::kb::{KbError, KnowledgeBase, OrientationScale};
use crate::sentiment::ScoreMapping;
use crate::synth::Fixture;
use crate::topics::{build_index, select_all_topics, Bm25Params, TopicCatalog, TopicError, TopicSubsets};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageParams {
    pub min_chars: usize,
    pub dedup: DedupConfig,
    pub annotate_seed: u64,
    pub link_threshold: f64,
    pub bm25: Bm25Params,
    pub score_mapping: ScoreMapping,
    pub scale: OrientationScale,
}

impl Default for StageParams {
    fn default() -> Self {
        Self {
            min_chars: DEFAULT_MIN_CHARS,
            dedup: DedupConfig::default(),
            annotate_seed: 0,
            link_threshold: DEFAULT_MIN_LOG_LIKELIHOOD,
            bm25: Bm25Params::default(),
            score_mapping: ScoreMapping::Argmax,
            scale: OrientationScale::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Topic(#[from] TopicError),
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    /// Deduplicated corpus; the input to annotation, indexing and reports.
    pub manifest: CorpusManifest,
    pub dedup: DedupOutcome,
    /// Raw annotations before link filtering.
    pub mentions: Vec<MentionAnnotation>,
    pub links: LinkFilterOutcome,
    pub kb: KnowledgeBase,
    pub catalog: TopicCatalog,
    pub topic_subsets: TopicSubsets,
    pub facts: FactBuild,
}

impl PipelineRun {
    pub fn topic_ids(&self) -> Vec<String> {
        self.catalog.ids().map(str::to_string).collect()
    }
}

/// Length filter, deduplication, mock annotation, link filter, topic
/// selection and the fact join.
pub fn run_fixture(fixture: &Fixture, params: &StageParams) -> Result<PipelineRun, PipelineError> {
    let manifest = CorpusManifest::from_documents(fixture.documents.clone())
        .with_outlet_metadata(fixture.outlet_metadata.clone())?;
    let manifest = filter_min_length(manifest, params.min_chars);
    let dedup = dedup_per_domain(&manifest.documents, &params.dedup)?;
    let manifest = CorpusManifest {
        documents: dedup.survivors.clone(),
        ..manifest
    };
    let mentions = mock_annotate(&manifest, &fixture.gazetteer, &fixture.rules, params.annotate_seed)?;
    let links = filter_linked(&mentions, params.link_threshold);
    let kb = KnowledgeBase::new(
        fixture.persons.clone(),
        fixture.parties.clone(),
        fixture.crosswalk.clone(),
        params.scale,
    )?;
    let catalog = TopicCatalog::new(fixture.topics.clone())?;
    let index = build_index(&manifest);
    let topic_subsets = select_all_topics(&index, &catalog, params.bm25);
    let facts = build_facts(&manifest, &links.kept, &kb, &topic_subsets, params.score_mapping);
    Ok(PipelineRun {
        manifest,
        dedup,
        mentions,
        links,
        kb,
        catalog,
        topic_subsets,
        facts,
    })
}
