use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use polsent_core::analytics::AnalysisConfig;
use polsent_core::dedup::{DedupConfig, LshParams, DEFAULT_PERMUTATIONS, DEFAULT_SHINGLE_SIZE, DEFAULT_THRESHOLD};
use polsent_core::ingest::DEFAULT_MIN_CHARS;
use polsent_core::kb::OrientationScale;
use polsent_core::report::config_hash;
use polsent_core::topics::Bm25Params;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable that overrides `paths.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "POLSENT_OUTPUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub outlets: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub persons: Option<PathBuf>,
    pub parties: Option<PathBuf>,
    pub crosswalk: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub sentiment_rules: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl Paths {
    fn resolve_against(&mut self, base: &Path) {
        for p in [
            &mut self.corpus,
            &mut self.outlets,
            &mut self.annotations,
            &mut self.persons,
            &mut self.parties,
            &mut self.crosswalk,
            &mut self.gazetteer,
            &mut self.sentiment_rules,
            &mut self.topics,
            &mut self.output_dir,
        ] {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupSection {
    pub shingle_size: usize,
    pub permutations: usize,
    pub threshold: f64,
    pub lsh: Option<LshParams>,
}

impl Default for DedupSection {
    fn default() -> Self {
        Self {
            shingle_size: DEFAULT_SHINGLE_SIZE,
            permutations: DEFAULT_PERMUTATIONS,
            threshold: DEFAULT_THRESHOLD,
            lsh: None,
        }
    }
}

/// Everything a pipeline run depends on. Relative paths in a config file are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub window: Option<WindowConfig>,
    pub min_chars: usize,
    pub dedup: DedupSection,
    pub bm25: Bm25Params,
    /// Replaces every per-topic threshold when set.
    pub topic_threshold: Option<f64>,
    /// Required by `dedup` and `annotate-mock`.
    pub seed: Option<u64>,
    pub scale: OrientationScale,
    pub analysis: AnalysisConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            window: None,
            min_chars: DEFAULT_MIN_CHARS,
            dedup: DedupSection::default(),
            bm25: Bm25Params::default(),
            topic_threshold: None,
            seed: None,
            scale: OrientationScale::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.paths.resolve_against(base);
        Ok(config)
    }

    pub fn output_dir(&self) -> Result<&Path, CliError> {
        self.paths.output_dir.as_deref().ok_or_else(|| {
            CliError::config("no output directory: set paths.output_dir, --output-dir or POLSENT_OUTPUT_DIR")
        })
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::config("this stage is stochastic and needs a seed (--seed or `seed` in the config)")
        })
    }

    pub fn dedup_config(&self) -> Result<DedupConfig, CliError> {
        let config = DedupConfig {
            shingle_size: self.dedup.shingle_size,
            permutations: self.dedup.permutations,
            threshold: self.dedup.threshold,
            seed: self.seed()?,
            lsh: self.dedup.lsh,
        };
        config.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(config)
    }

    /// Hash of every setting except file locations, so that moving a run
    /// does not change its provenance.
    pub fn settings_hash(&self) -> String {
        let mut settings = self.clone();
        settings.paths = Paths::default();
        config_hash(&settings)
    }
}

/// An input file the stage needs, which must exist before anything is
/// written.
pub fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    let path = path
        .as_deref()
        .ok_or_else(|| CliError::config(format!("missing path for {what}")))?;
    if !path.is_file() {
        return Err(CliError::config(format!("{what} not found: {}", path.display())));
    }
    Ok(path)
}
