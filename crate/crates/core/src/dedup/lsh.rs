use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use super::minhash::MinHashSignature;
use super::DedupError;

/// Banding configuration: `bands * rows` signature positions are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LshParams {
    pub bands: usize,
    pub rows: usize,
}

impl LshParams {
    /// Probability that a pair with Jaccard `s` shares at least one band.
    pub fn collision_probability(&self, s: f64) -> f64 {
        1.0 - (1.0 - s.powi(self.rows as i32)).powi(self.bands as i32)
    }
}

const SIMPSON_INTERVALS: usize = 2000;

fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let n = SIMPSON_INTERVALS;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let x = lo + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Area under the S-curve below `threshold` (pairs that should not collide).
pub fn false_positive_area(params: LshParams, threshold: f64) -> f64 {
    simpson(|s| params.collision_probability(s), 0.0, threshold)
}

/// Area above the S-curve beyond `threshold` (pairs that should collide).
pub fn false_negative_area(params: LshParams, threshold: f64) -> f64 {
    simpson(|s| 1.0 - params.collision_probability(s), threshold, 1.0)
}

/// Picks `(bands, rows)` with `bands * rows == permutations` minimizing the sum
/// of the false-positive and false-negative areas at `threshold`. Ties go to
/// more bands.
pub fn optimal_params(permutations: usize, threshold: f64) -> Result<LshParams, DedupError> {
    if permutations == 0 {
        return Err(DedupError::InvalidConfig("permutations must be at least 1".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(DedupError::InvalidConfig(format!(
            "threshold {threshold} outside (0, 1]"
        )));
    }
    let mut best: Option<(f64, LshParams)> = None;
    for bands in (1..=permutations).rev() {
        if permutations % bands != 0 {
            continue;
        }
        let params = LshParams {
            bands,
            rows: permutations / bands,
        };
        let error = false_positive_area(params, threshold) + false_negative_area(params, threshold);
        if best.map_or(true, |(e, _)| error < e) {
            best = Some((error, params));
        }
    }
    Ok(best.expect("permutations >= 1 has a divisor").1)
}

/// Candidate pairs `(i, j)` with `i < j` whose signatures agree on every row
/// of at least one band.
pub fn candidate_pairs(signatures: &[&MinHashSignature], params: LshParams) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for band in 0..params.bands {
        let range = band * params.rows..(band + 1) * params.rows;
        let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
        for (idx, sig) in signatures.iter().enumerate() {
            let Some(slice) = sig.values().get(range.clone()) else {
                continue;
            };
            let bytes: Vec<u8> = slice.iter().flat_map(|v| v.to_le_bytes()).collect();
            buckets.entry(xxh3_64(&bytes)).or_default().push(idx);
        }
        for members in buckets.values() {
            for (pos, &i) in members.iter().enumerate() {
                for &j in &members[pos + 1..] {
                    pairs.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    pairs
}
