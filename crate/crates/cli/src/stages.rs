use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use polsent_core::analytics::{build_facts, run_report, FactBuild, ReportContext, ReportId};
use polsent_core::annotate::{
    filter_linked, mock_annotate, read_annotations, write_annotations, AnnotationError, Gazetteer, MentionAnnotation,
    SentimentRules,
};
use polsent_core::dedup::dedup_per_domain;
use polsent_core::ingest::{
    filter_min_length, load_corpus, load_corpus_with, load_outlet_metadata, write_corpus, CorpusManifest, CorpusWindow,
    LoadOptions, OutletMeta,
};
use polsent_core::kb::{parse_crosswalk, parse_parties, parse_persons, KbError, KnowledgeBase};
use polsent_core::report::{corpus_hash, Provenance, ReportTable};
use polsent_core::topics::{build_index, load_topics, select_all_topics, InvertedIndex, TopicCatalog, TopicSubsets};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifacts::*;
use crate::config::{required, PipelineConfig};
use crate::error::CliError;

/// What a stage produced, before anything is written.
pub struct StageOutput {
    pub inputs: Vec<(String, PathBuf)>,
    pub outputs: Outputs,
    pub counts: BTreeMap<String, Value>,
}

impl StageOutput {
    fn new() -> Self {
        Self {
            inputs: Vec::new(),
            outputs: Outputs::default(),
            counts: BTreeMap::new(),
        }
    }

    fn input(&mut self, name: &str, path: &Path) {
        self.inputs.push((name.to_string(), path.to_path_buf()));
    }

    fn count(&mut self, name: &str, value: impl Serialize) {
        self.counts
            .insert(name.to_string(), serde_json::to_value(value).expect("count"));
    }
}

/// Window and outlet metadata of the ingested corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestMeta {
    pub window: Option<CorpusWindow>,
    pub outlet_metadata: BTreeMap<String, OutletMeta>,
}

fn stage_err(e: impl std::fmt::Display) -> CliError {
    CliError::stage(e.to_string())
}

fn jsonl_bytes<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable record");
        out.push(b'\n');
    }
    out
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = fs::File::open(path).map_err(|e| stage_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| stage_err(format!("invalid JSON in {}: {e}", path.display())))
}

pub fn ingest(config: &PipelineConfig) -> Result<StageOutput, CliError> {
    let corpus_path = required(&config.paths.corpus, "corpus")?;
    let outlets_path = match &config.paths.outlets {
        Some(_) => Some(required(&config.paths.outlets, "outlet metadata")?),
        None => None,
    };
    let window = config
        .window
        .map(|w| CorpusWindow::new(w.start, w.end))
        .transpose()
        .map_err(|e| CliError::config(e.to_string()))?;

    let mut out = StageOutput::new();
    out.input("corpus", corpus_path);
    let report = load_corpus_with(corpus_path, &LoadOptions { window }).map_err(stage_err)?;
    let mut manifest = report.manifest;
    if let Some(path) = outlets_path {
        out.input("outlets", path);
        let metadata = load_outlet_metadata(path).map_err(stage_err)?;
        manifest = manifest.with_outlet_metadata(metadata).map_err(stage_err)?;
    }
    let loaded = manifest.len();
    let manifest = filter_min_length(manifest, config.min_chars);

    out.count("records_loaded", loaded);
    out.count("records_rejected", report.errors.len());
    out.count("too_short", loaded - manifest.len());
    out.count("documents", manifest.len());

    let mut corpus = Vec::new();
    write_corpus(&manifest.documents, &mut corpus)?;
    out.outputs.add(INGEST_CORPUS, corpus);
    out.outputs.add_json(
        INGEST_MANIFEST,
        &ManifestMeta {
            window: manifest.window,
            outlet_metadata: manifest.outlet_metadata.clone(),
        },
    );
    out.outputs.add_json(INGEST_ERRORS, &report.errors);
    Ok(out)
}

/// Loads a corpus artifact written by an earlier stage with the ingested
/// window and outlet metadata.
fn stage_corpus(
    root: &Path,
    relative: &str,
    produced_by: &str,
    out: &mut StageOutput,
) -> Result<CorpusManifest, CliError> {
    let path = upstream(root, relative, produced_by)?;
    let meta_path = upstream(root, INGEST_MANIFEST, "ingest")?;
    out.input(relative, &path);
    let meta: ManifestMeta = read_json(&meta_path)?;
    let report = load_corpus(&path).map_err(stage_err)?;
    if !report.errors.is_empty() {
        return Err(stage_err(format!("{} has invalid records", path.display())).with_details(&report.errors));
    }
    Ok(CorpusManifest {
        documents: report.manifest.documents,
        window: meta.window,
        outlet_metadata: meta.outlet_metadata,
    })
}

pub fn dedup(config: &PipelineConfig, root: &Path) -> Result<StageOutput, CliError> {
    let dedup_config = config.dedup_config()?;
    let mut out = StageOutput::new();
    let manifest = stage_corpus(root, INGEST_CORPUS, "ingest", &mut out)?;
    let outcome = dedup_per_domain(&manifest.documents, &dedup_config).map_err(stage_err)?;

    out.count("documents", manifest.len());
    out.count("clusters", outcome.clusters.len());
    out.count("removed", outcome.removed());
    out.count("survivors", outcome.survivors.len());
    out.count("degenerate", outcome.degenerate.len());

    let mut survivors = Vec::new();
    write_corpus(&outcome.survivors, &mut survivors)?;
    out.outputs.add(DEDUP_SURVIVORS, survivors);
    out.outputs.add_json(
        DEDUP_CLUSTERS,
        &json!({
            "lsh": outcome.lsh,
            "clusters": outcome.clusters,
            "degenerate": outcome.degenerate,
        }),
    );
    Ok(out)
}

fn annotation_output(out: &mut StageOutput, mentions: &[MentionAnnotation]) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    write_annotations(mentions, &mut bytes)?;
    out.outputs.add(MENTIONS, bytes);
    out.count("mentions", mentions.len());
    out.count("linked", mentions.iter().filter(|m| m.link.is_some()).count());
    Ok(())
}

pub fn annotate_mock(config: &PipelineConfig, root: &Path) -> Result<StageOutput, CliError> {
    let gazetteer_path = required(&config.paths.gazetteer, "gazetteer")?;
    let rules_path = required(&config.paths.sentiment_rules, "sentiment rules")?;
    let seed = config.seed()?;
    let mut out = StageOutput::new();
    let manifest = stage_corpus(root, DEDUP_SURVIVORS, "dedup", &mut out)?;
    out.input("gazetteer", gazetteer_path);
    out.input("sentiment_rules", rules_path);
    let gazetteer: Gazetteer = read_json(gazetteer_path)?;
    let rules: SentimentRules = read_json(rules_path)?;
    let mentions = mock_annotate(&manifest, &gazetteer, &rules, seed).map_err(stage_err)?;
    annotation_output(&mut out, &mentions)?;
    Ok(out)
}

fn annotation_err(e: AnnotationError) -> CliError {
    match e {
        AnnotationError::Invalid(errors) => {
            CliError::stage(format!("{} invalid annotation line(s)", errors.len())).with_details(&errors)
        }
        other => stage_err(other),
    }
}

pub fn import_annotations(config: &PipelineConfig, root: &Path) -> Result<StageOutput, CliError> {
    let path = required(&config.paths.annotations, "annotations")?;
    let mut out = StageOutput::new();
    let manifest = stage_corpus(root, DEDUP_SURVIVORS, "dedup", &mut out)?;
    out.input("annotations", path);
    let mut mentions = read_annotations(path, Some(&manifest)).map_err(annotation_err)?;
    mentions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    annotation_output(&mut out, &mentions)?;
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<fs::File>, CliError> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| stage_err(format!("cannot read {}: {e}", path.display())))
}

fn kb_err(e: KbError) -> CliError {
    stage_err(e)
}

pub fn kb_load(config: &PipelineConfig, root: &Path) -> Result<StageOutput, CliError> {
    let persons_path = required(&config.paths.persons, "persons")?;
    let parties_path = required(&config.paths.parties, "parties")?;
    let crosswalk_path = required(&config.paths.crosswalk, "crosswalk")?;
    let mut out = StageOutput::new();
    out.input("persons", persons_path);
    out.input("parties", parties_path);
    out.input("crosswalk", crosswalk_path);
    let persons = parse_persons(open(persons_path)?).map_err(kb_err)?;
    let parties = parse_parties(open(parties_path)?).map_err(kb_err)?;
    let crosswalk = parse_crosswalk(open(crosswalk_path)?).map_err(kb_err)?;
    let kb = KnowledgeBase::new(persons.clone(), parties.clone(), crosswalk.clone(), config.scale).map_err(kb_err)?;

    let mentions_path = root.join(MENTIONS);
    let coverage = if mentions_path.is_file() {
        out.input(MENTIONS, &mentions_path);
        let mentions = read_annotations(&mentions_path, None).map_err(annotation_err)?;
        Some(kb.coverage(&filter_linked(&mentions, config.analysis.link_threshold).kept))
    } else {
        None
    };

    out.count("persons", persons.len());
    out.count("politicians", persons.iter().filter(|p| p.is_politician).count());
    out.count("parties", parties.len());
    out.count("crosswalk_rows", crosswalk.len());
    out.outputs.add(KB_PERSONS, jsonl_bytes(&persons));
    out.outputs.add(KB_PARTIES, jsonl_bytes(&parties));
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &crosswalk {
        w.serialize(row).map_err(stage_err)?;
    }
    out.outputs.add(KB_CROSSWALK, w.into_inner().map_err(stage_err)?);
    out.outputs.add_json(KB_COVERAGE, &coverage);
    Ok(out)
}

fn load_kb_artifacts(config: &PipelineConfig, root: &Path, out: &mut StageOutput) -> Result<KnowledgeBase, CliError> {
    let persons = upstream(root, KB_PERSONS, "kb-load")?;
    let parties = upstream(root, KB_PARTIES, "kb-load")?;
    let crosswalk = upstream(root, KB_CROSSWALK, "kb-load")?;
    out.input(KB_PERSONS, &persons);
    out.input(KB_PARTIES, &parties);
    out.input(KB_CROSSWALK, &crosswalk);
    KnowledgeBase::new(
        parse_persons(open(&persons)?).map_err(kb_err)?,
        parse_parties(open(&parties)?).map_err(kb_err)?,
        parse_crosswalk(open(&crosswalk)?).map_err(kb_err)?,
        config.scale,
    )
    .map_err(kb_err)
}

pub fn index(root: &Path) -> Result<StageOutput, CliError> {
    let mut out = StageOutput::new();
    let manifest = stage_corpus(root, DEDUP_SURVIVORS, "dedup", &mut out)?;
    let index = build_index(&manifest);
    out.count("documents", index.doc_count());
    out.count("terms", index.postings.len());
    let mut bytes = serde_json::to_vec(&index).expect("serializable index");
    bytes.push(b'\n');
    out.outputs.add(INDEX, bytes);
    Ok(out)
}

pub fn topic_select(config: &PipelineConfig, root: &Path) -> Result<StageOutput, CliError> {
    let topics_path = required(&config.paths.topics, "topics")?;
    if let Some(t) = config.topic_threshold {
        if !(t >= 0.0) {
            return Err(CliError::config(format!("topic threshold {t} must be non-negative")));
        }
    }
    let index_path = upstream(root, INDEX, "index")?;
    let mut out = StageOutput::new();
    out.input("topics", topics_path);
    out.input(INDEX, &index_path);
    let mut catalog = load_topics(topics_path).map_err(|e| CliError::config(e.to_string()))?;
    if let Some(t) = config.topic_threshold {
        let mut topics = catalog.topics().to_vec();
        for q in &mut topics {
            q.threshold = t;
        }
        catalog = TopicCatalog::new(topics).map_err(stage_err)?;
    }
    let mut index: InvertedIndex = read_json(&index_path)?;
    index.reindex_positions();
    let subsets = select_all_topics(&index, &catalog, config.bm25);
    for (topic, docs) in &subsets {
        out.count(&format!("topic.{topic}"), docs.len());
    }
    out.outputs.add_json(TOPIC_CATALOG, &catalog);
    out.outputs.add_json(TOPIC_SUBSETS, &subsets);
    Ok(out)
}

/// Inputs shared by `analyze` and `stats`.
struct AnalysisInputs {
    manifest: CorpusManifest,
    mentions: Vec<MentionAnnotation>,
    facts: FactBuild,
    topics: Vec<String>,
    linked: usize,
}

fn analysis_inputs(config: &PipelineConfig, root: &Path, out: &mut StageOutput) -> Result<AnalysisInputs, CliError> {
    let manifest = stage_corpus(root, DEDUP_SURVIVORS, "dedup", out)?;
    let mentions_path = upstream(root, MENTIONS, "annotate-mock` or `import-annotations")?;
    let catalog_path = upstream(root, TOPIC_CATALOG, "topic-select")?;
    let subsets_path = upstream(root, TOPIC_SUBSETS, "topic-select")?;
    let kb = load_kb_artifacts(config, root, out)?;
    out.input(MENTIONS, &mentions_path);
    out.input(TOPIC_CATALOG, &catalog_path);
    out.input(TOPIC_SUBSETS, &subsets_path);
    let mentions = read_annotations(&mentions_path, Some(&manifest)).map_err(annotation_err)?;
    let catalog: Vec<polsent_core::topics::TopicQuery> = read_json(&catalog_path)?;
    let subsets: TopicSubsets = read_json(&subsets_path)?;
    let links = filter_linked(&mentions, config.analysis.link_threshold);
    let facts = build_facts(&manifest, &links.kept, &kb, &subsets, config.analysis.score_mapping);
    Ok(AnalysisInputs {
        manifest,
        linked: links.kept.len(),
        mentions,
        facts,
        topics: catalog.into_iter().map(|q| q.topic_id).collect(),
    })
}

fn provenance(config: &PipelineConfig, manifest: &CorpusManifest) -> Provenance {
    Provenance {
        config_hash: config.settings_hash(),
        corpus_hash: corpus_hash(&manifest.documents),
        seed: config.seed.unwrap_or(0),
    }
}

fn add_report(out: &mut StageOutput, dir: &str, table: &ReportTable) -> Result<(), CliError> {
    out.outputs.add(
        format!("{dir}/{}.csv", table.report_id),
        table.to_csv_string().into_bytes(),
    );
    let mut json = Vec::new();
    table.write_json(&mut json)?;
    json.push(b'\n');
    out.outputs.add(format!("{dir}/{}.json", table.report_id), json);
    out.count(&format!("rows.{}", table.report_id), table.len());
    Ok(())
}

pub fn analyze(config: &PipelineConfig, root: &Path, reports: &[ReportId]) -> Result<StageOutput, CliError> {
    let mut out = StageOutput::new();
    let inputs = analysis_inputs(config, root, &mut out)?;
    let ctx = ReportContext {
        facts: &inputs.facts.facts,
        mentions: &inputs.mentions,
        articles: &inputs.manifest.documents,
        window: inputs.manifest.window,
        topics: &inputs.topics,
        config: &config.analysis,
        provenance: provenance(config, &inputs.manifest),
    };
    let unique: BTreeSet<ReportId> = reports.iter().copied().collect();
    let tables: Vec<ReportTable> = unique.iter().map(|&id| run_report(id, &ctx)).collect();
    out.count("facts", inputs.facts.facts.len());
    out.count("fact_errors", inputs.facts.errors.len());
    for table in &tables {
        add_report(&mut out, REPORTS_DIR, table)?;
    }
    if !inputs.facts.errors.is_empty() {
        out.outputs
            .add_json(format!("{REPORTS_DIR}/fact_errors.json"), &inputs.facts.errors);
    }
    Ok(out)
}

pub fn stats(config: &PipelineConfig, root: &Path) -> Result<StageOutput, CliError> {
    let mut out = StageOutput::new();
    let inputs = analysis_inputs(config, root, &mut out)?;
    let ctx = ReportContext {
        facts: &inputs.facts.facts,
        mentions: &inputs.mentions,
        articles: &inputs.manifest.documents,
        window: inputs.manifest.window,
        topics: &inputs.topics,
        config: &config.analysis,
        provenance: provenance(config, &inputs.manifest),
    };
    let table = run_report(ReportId::CorpusStats, &ctx);
    add_report(&mut out, STATS_DIR, &table)?;

    let mut summary = BTreeMap::new();
    summary.insert("documents", inputs.manifest.len());
    summary.insert("mentions", inputs.mentions.len());
    summary.insert("linked_mentions", inputs.linked);
    summary.insert("facts", inputs.facts.facts.len());
    summary.insert("politician_facts", inputs.facts.facts.politicians().count());
    summary.insert(
        "oriented_facts",
        inputs
            .facts
            .facts
            .politicians()
            .filter(|f| f.orientation.is_some())
            .count(),
    );
    summary.insert("fact_errors", inputs.facts.errors.len());
    for (k, v) in &summary {
        out.count(k, v);
    }
    out.outputs.add_json(format!("{STATS_DIR}/summary.json"), &summary);
    Ok(out)
}

/// Writes a stage's outputs and its run log.
pub fn commit(stage: &str, config: &PipelineConfig, root: &Path, output: StageOutput) -> Result<RunLog, CliError> {
    let inputs = output
        .inputs
        .iter()
        .map(|(name, path)| {
            Ok(FileRecord {
                name: name.clone(),
                sha256: file_digest(path)?,
            })
        })
        .collect::<Result<Vec<_>, std::io::Error>>()?;
    let written = output.outputs.commit(root)?;
    let log = RunLog {
        stage: stage.to_string(),
        status: "ok",
        settings_hash: config.settings_hash(),
        seed: config.seed,
        inputs,
        outputs: written
            .into_iter()
            .map(|(name, sha256)| FileRecord { name, sha256 })
            .collect(),
        counts: output.counts,
    };
    let mut bytes = serde_json::to_vec_pretty(&log).expect("serializable log");
    bytes.push(b'\n');
    write_atomic(&root.join(LOGS_DIR).join(format!("{stage}.json")), &bytes)?;
    Ok(log)
}
