//! `polsent`: runs the corpus pipeline one stage at a time. Every stage
//! reads the artifacts of earlier stages from the output directory and
//! writes its own, plus a run log under `logs/`.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod stages;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use polsent_core::analytics::ReportId;
use polsent_core::synth::{generate, SynthConfig};

use crate::config::{PipelineConfig, WindowConfig, OUTPUT_DIR_ENV};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "polsent",
    version,
    about = "Political mention and sentiment analytics over news corpora"
)]
pub struct Cli {
    /// Pipeline configuration (JSON). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; takes precedence over POLSENT_OUTPUT_DIR and the config.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the corpus and apply the minimum-length filter.
    Ingest(IngestArgs),
    /// Remove near-duplicates within each domain.
    Dedup(DedupArgs),
    /// Annotate the corpus with the gazetteer and cue-word annotator.
    AnnotateMock(AnnotateArgs),
    /// Validate and import annotations produced elsewhere.
    ImportAnnotations(ImportArgs),
    /// Validate the knowledge-base snapshots and report orientation coverage.
    KbLoad(KbArgs),
    /// Build the BM25 index of the deduplicated corpus.
    Index,
    /// Select topic subsets from the index.
    TopicSelect(TopicArgs),
    /// Compute reports.
    Analyze(AnalyzeArgs),
    /// Corpus and mention counts.
    Stats,
    /// Run every stage in order, then `analyze --all` and `stats`.
    RunAll(RunAllArgs),
    /// Write a synthetic input set and a matching config.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub outlets: Option<PathBuf>,
    #[arg(long, requires = "window_end")]
    pub window_start: Option<NaiveDate>,
    #[arg(long, requires = "window_start")]
    pub window_end: Option<NaiveDate>,
    #[arg(long)]
    pub min_chars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[arg(long)]
    pub shingle_size: Option<usize>,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KbArgs {
    #[arg(long)]
    pub persons: Option<PathBuf>,
    #[arg(long)]
    pub parties: Option<PathBuf>,
    #[arg(long)]
    pub crosswalk: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TopicArgs {
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Replaces every per-topic threshold.
    #[arg(long)]
    pub topic_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Report id; may be repeated.
    #[arg(long = "report", value_parser = parse_report_id, required_unless_present = "all")]
    pub reports: Vec<ReportId>,
    #[arg(long, conflicts_with = "reports")]
    pub all: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub link_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunAllArgs {
    /// Import this annotation file instead of running the mock annotator.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for the generated input files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub documents: Option<usize>,
}

fn parse_report_id(s: &str) -> Result<ReportId, String> {
    s.parse()
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn base_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        config.paths.output_dir = Some(PathBuf::from(dir));
    }
    if let Some(dir) = &cli.output_dir {
        config.paths.output_dir = Some(dir.clone());
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    Ok(config)
}

fn set<T>(slot: &mut Option<T>, value: &Option<T>)
where
    T: Clone,
{
    if value.is_some() {
        slot.clone_from(value);
    }
}

fn run_stage<F>(name: &str, config: &PipelineConfig, stage: F) -> Result<(), CliError>
where
    F: FnOnce(&Path) -> Result<stages::StageOutput, CliError>,
{
    let root = config.output_dir()?.to_path_buf();
    let output = stage(&root).map_err(|e| e.in_stage(name))?;
    let log = stages::commit(name, config, &root, output).map_err(|e| e.in_stage(name))?;
    println!("{}", serde_json::json!({ "stage": name, "counts": log.counts }));
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut config = base_config(&cli)?;
    match &cli.command {
        Command::Ingest(a) => {
            set(&mut config.paths.corpus, &a.corpus);
            set(&mut config.paths.outlets, &a.outlets);
            if let (Some(start), Some(end)) = (a.window_start, a.window_end) {
                config.window = Some(WindowConfig { start, end });
            }
            if let Some(m) = a.min_chars {
                config.min_chars = m;
            }
            run_stage("ingest", &config, |_| stages::ingest(&config))
        }
        Command::Dedup(a) => {
            if let Some(v) = a.shingle_size {
                config.dedup.shingle_size = v;
            }
            if let Some(v) = a.permutations {
                config.dedup.permutations = v;
            }
            if let Some(v) = a.threshold {
                config.dedup.threshold = v;
            }
            run_stage("dedup", &config, |root| stages::dedup(&config, root))
        }
        Command::AnnotateMock(a) => {
            set(&mut config.paths.gazetteer, &a.gazetteer);
            set(&mut config.paths.sentiment_rules, &a.rules);
            run_stage("annotate-mock", &config, |root| stages::annotate_mock(&config, root))
        }
        Command::ImportAnnotations(a) => {
            set(&mut config.paths.annotations, &a.annotations);
            run_stage("import-annotations", &config, |root| {
                stages::import_annotations(&config, root)
            })
        }
        Command::KbLoad(a) => {
            set(&mut config.paths.persons, &a.persons);
            set(&mut config.paths.parties, &a.parties);
            set(&mut config.paths.crosswalk, &a.crosswalk);
            run_stage("kb-load", &config, |root| stages::kb_load(&config, root))
        }
        Command::Index => run_stage("index", &config, stages::index),
        Command::TopicSelect(a) => {
            set(&mut config.paths.topics, &a.topics);
            set(&mut config.topic_threshold, &a.topic_threshold);
            run_stage("topic-select", &config, |root| stages::topic_select(&config, root))
        }
        Command::Analyze(a) => {
            if let Some(t) = a.link_threshold {
                config.analysis.link_threshold = t;
            }
            let reports: Vec<ReportId> = if a.all {
                ReportId::ALL.to_vec()
            } else {
                a.reports.clone()
            };
            run_stage("analyze", &config, |root| stages::analyze(&config, root, &reports))
        }
        Command::Stats => run_stage("stats", &config, |root| stages::stats(&config, root)),
        Command::RunAll(a) => {
            set(&mut config.paths.annotations, &a.annotations);
            run_stage("ingest", &config, |_| stages::ingest(&config))?;
            run_stage("dedup", &config, |root| stages::dedup(&config, root))?;
            if config.paths.annotations.is_some() {
                run_stage("import-annotations", &config, |root| {
                    stages::import_annotations(&config, root)
                })?;
            } else {
                run_stage("annotate-mock", &config, |root| stages::annotate_mock(&config, root))?;
            }
            run_stage("kb-load", &config, |root| stages::kb_load(&config, root))?;
            run_stage("index", &config, stages::index)?;
            run_stage("topic-select", &config, |root| stages::topic_select(&config, root))?;
            run_stage("analyze", &config, |root| stages::analyze(&config, root, ReportId::ALL))?;
            run_stage("stats", &config, |root| stages::stats(&config, root))
        }
        Command::Synth(a) => synth(&config, a),
    }
}

/// Writes the synthetic inputs and a `pipeline.json` that refers to them
/// by relative path.
fn synth(config: &PipelineConfig, args: &SynthArgs) -> Result<(), CliError> {
    let mut synth_config = SynthConfig::default();
    if let Some(seed) = config.seed {
        synth_config.seed = seed;
    }
    if let Some(n) = args.documents {
        synth_config.documents = n;
    }
    let fixture = generate(&synth_config);
    fixture
        .write_to(&args.out)
        .map_err(|e| CliError::stage(e.to_string()).in_stage("synth"))?;

    let mut pipeline = PipelineConfig {
        seed: Some(synth_config.seed),
        window: Some(WindowConfig {
            start: NaiveDate::from_ymd_opt(synth_config.start_year, 1, 1).expect("valid year"),
            end: NaiveDate::from_ymd_opt(synth_config.end_year, 12, 31).expect("valid year"),
        }),
        ..PipelineConfig::default()
    };
    let p = &mut pipeline.paths;
    p.corpus = Some("corpus.jsonl".into());
    p.outlets = Some("outlets.json".into());
    p.persons = Some("persons.jsonl".into());
    p.parties = Some("parties.jsonl".into());
    p.crosswalk = Some("crosswalk.csv".into());
    p.gazetteer = Some("gazetteer.json".into());
    p.sentiment_rules = Some("sentiment_rules.json".into());
    p.topics = Some("topics.json".into());
    let mut bytes = serde_json::to_vec_pretty(&pipeline).expect("serializable config");
    bytes.push(b'\n');
    artifacts::write_atomic(&args.out.join("pipeline.json"), &bytes)?;
    println!(
        "{}",
        serde_json::json!({ "stage": "synth", "documents": fixture.documents.len(), "out": args.out })
    );
    Ok(())
}
