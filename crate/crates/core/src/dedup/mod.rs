//! Near-duplicate removal within each domain.
//!
//! Bodies are shingled into word w-grams, summarized by MinHash signatures
//! and bucketed with LSH banding. Every candidate pair is verified against the
//! signature estimate before it is merged, and clusters are the transitive
//! closure of verified pairs. Documents from different domains are never
//! compared.

mod lsh;
mod minhash;
mod shingle;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::RawDocument;

pub use lsh::{candidate_pairs, false_negative_area, false_positive_area, optimal_params, LshParams};
pub use minhash::{estimate_jaccard, MinHashSignature, MinHasher, DEFAULT_PERMUTATIONS};
pub use shingle::{shingle, ShingleSet, DEFAULT_SHINGLE_SIZE};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum DedupError {
    #[error("invalid dedup configuration: {0}")]
    InvalidConfig(String),
    #[error("document has no shingles")]
    EmptyShingleSet,
    #[error("signatures are not comparable: (n={}, seed={}) vs (n={}, seed={})", .left.0, .left.1, .right.0, .right.1)]
    SignatureMismatch { left: (usize, u64), right: (usize, u64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupConfig {
    pub shingle_size: usize,
    pub permutations: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Overrides the automatically chosen banding.
    pub lsh: Option<LshParams>,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            shingle_size: DEFAULT_SHINGLE_SIZE,
            permutations: DEFAULT_PERMUTATIONS,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            lsh: None,
        }
    }
}

impl DedupConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<LshParams, DedupError> {
        if self.shingle_size == 0 {
            return Err(DedupError::InvalidConfig("shingle size must be at least 1".into()));
        }
        let auto = optimal_params(self.permutations, self.threshold)?;
        match self.lsh {
            None => Ok(auto),
            Some(p) if p.bands >= 1 && p.rows >= 1 && p.bands * p.rows <= self.permutations => Ok(p),
            Some(p) => Err(DedupError::InvalidConfig(format!(
                "{} bands x {} rows does not fit {} permutations",
                p.bands, p.rows, self.permutations
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateCluster {
    pub domain: String,
    /// Sorted by doc_id.
    pub members: Vec<String>,
    pub survivor: String,
}

#[derive(Debug, Clone, Default)]
pub struct DedupOutcome {
    /// Input order preserved.
    pub survivors: Vec<RawDocument>,
    /// Clusters of two or more documents, sorted by (domain, survivor).
    pub clusters: Vec<DuplicateCluster>,
    /// Documents without any token; always kept.
    pub degenerate: Vec<String>,
    pub lsh: Option<LshParams>,
}

impl DedupOutcome {
    pub fn removed(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len() - 1).sum()
    }
}

pub fn dedup_per_domain(docs: &[RawDocument], config: &DedupConfig) -> Result<DedupOutcome, DedupError> {
    let params = config.validate()?;
    let hasher = MinHasher::new(config.permutations, config.seed)?;

    let signatures: Vec<Option<MinHashSignature>> = docs
        .par_iter()
        .map(|d| hasher.signature(&shingle(&d.body, config.shingle_size)).ok())
        .collect();

    let mut by_domain: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, doc) in docs.iter().enumerate() {
        if signatures[idx].is_some() {
            by_domain.entry(doc.domain.as_str()).or_default().push(idx);
        }
    }

    let per_domain: Vec<Vec<DuplicateCluster>> = by_domain
        .par_iter()
        .map(|(domain, members)| cluster_domain(domain, members, docs, &signatures, params, config.threshold))
        .collect();
    let mut clusters: Vec<DuplicateCluster> = per_domain.into_iter().flatten().collect();
    clusters.sort_by(|a, b| (&a.domain, &a.survivor).cmp(&(&b.domain, &b.survivor)));

    let removed: std::collections::HashSet<&str> = clusters
        .iter()
        .flat_map(|c| c.members.iter().filter(move |m| **m != c.survivor))
        .map(String::as_str)
        .collect();
    let survivors = docs
        .iter()
        .filter(|d| !removed.contains(d.doc_id.as_str()))
        .cloned()
        .collect();
    let degenerate = docs
        .iter()
        .zip(&signatures)
        .filter(|(_, s)| s.is_none())
        .map(|(d, _)| d.doc_id.clone())
        .collect();
    Ok(DedupOutcome {
        survivors,
        clusters,
        degenerate,
        lsh: Some(params),
    })
}

fn cluster_domain(
    domain: &str,
    members: &[usize],
    docs: &[RawDocument],
    signatures: &[Option<MinHashSignature>],
    params: LshParams,
    threshold: f64,
) -> Vec<DuplicateCluster> {
    let sigs: Vec<&MinHashSignature> = members
        .iter()
        .map(|&i| signatures[i].as_ref().expect("filtered to documents with signatures"))
        .collect();
    let mut forest = UnionFind::new(members.len());
    for (i, j) in candidate_pairs(&sigs, params) {
        let estimate = estimate_jaccard(sigs[i], sigs[j]).expect("signatures share a hasher");
        if estimate >= threshold {
            forest.union(i, j);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for local in 0..members.len() {
        groups.entry(forest.find(local)).or_default().push(members[local]);
    }
    groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|group| {
            let survivor = group
                .iter()
                .map(|&i| &docs[i])
                .min_by(|a, b| (a.published_at, &a.doc_id).cmp(&(b.published_at, &b.doc_id)))
                .expect("non-empty group")
                .doc_id
                .clone();
            let mut ids: Vec<String> = group.iter().map(|&i| docs[i].doc_id.clone()).collect();
            ids.sort();
            DuplicateCluster {
                domain: domain.to_string(),
                members: ids,
                survivor,
            }
        })
        .collect()
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}
