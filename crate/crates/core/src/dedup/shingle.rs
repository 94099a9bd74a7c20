use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use crate::text::tokenize;

/// Default word window.
pub const DEFAULT_SHINGLE_SIZE: usize = 5;

/// Set of 64-bit hashes of contiguous word w-grams, stored sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShingleSet {
    hashes: Vec<u64>,
    w: usize,
}

impl ShingleSet {
    /// Builds a set from precomputed hashes. Duplicates are removed.
    pub fn from_hashes(mut hashes: Vec<u64>, w: usize) -> Self {
        hashes.sort_unstable();
        hashes.dedup();
        Self { hashes, w }
    }

    pub fn hashes(&self) -> &[u64] {
        &self.hashes
    }

    pub fn window(&self) -> usize {
        self.w
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    /// Exact Jaccard similarity of two sets. Two empty sets have similarity 1.
    pub fn jaccard(&self, other: &ShingleSet) -> f64 {
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < self.hashes.len() && j < other.hashes.len() {
            match self.hashes[i].cmp(&other.hashes[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = self.hashes.len() + other.hashes.len() - common;
        if union == 0 {
            1.0
        } else {
            common as f64 / union as f64
        }
    }
}

/// Shingles `text` into word `w`-grams.
///
/// Texts with at least one but fewer than `w` tokens produce a single shingle
/// made of all their tokens. Text without tokens produces the empty set.
///
/// # Panics
///
/// Panics if `w` is zero.
pub fn shingle(text: &str, w: usize) -> ShingleSet {
    assert!(w >= 1, "shingle size must be at least 1");
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return ShingleSet::from_hashes(Vec::new(), w);
    }
    let hashes = if tokens.len() < w {
        vec![hash_shingle(&tokens)]
    } else {
        tokens.windows(w).map(hash_shingle).collect()
    };
    ShingleSet::from_hashes(hashes, w)
}

fn hash_shingle(tokens: &[String]) -> u64 {
    xxh3_64(tokens.join(" ").as_bytes())
}
