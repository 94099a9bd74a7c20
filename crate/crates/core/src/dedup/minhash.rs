use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::shingle::ShingleSet;
use super::DedupError;

/// Default number of permutations.
pub const DEFAULT_PERMUTATIONS: usize = 256;

const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashSignature {
    values: Vec<u64>,
    seed: u64,
}

impl MinHashSignature {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[cfg(test)]
    pub(crate) fn from_parts(values: Vec<u64>, seed: u64) -> Self {
        Self { values, seed }
    }
}

/// Family of `n` universal hash functions `h_i(x) = (a_i x + b_i) mod (2^61 - 1)`
/// drawn from a seeded ChaCha stream. Each stands in for one random permutation.
#[derive(Debug, Clone)]
pub struct MinHasher {
    seed: u64,
    a: Vec<u64>,
    b: Vec<u64>,
}

impl MinHasher {
    pub fn new(n: usize, seed: u64) -> Result<Self, DedupError> {
        if n == 0 {
            return Err(DedupError::InvalidConfig("permutations must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            a.push(rng.gen_range(1..MERSENNE_61));
            b.push(rng.gen_range(0..MERSENNE_61));
        }
        Ok(Self { seed, a, b })
    }

    pub fn permutations(&self) -> usize {
        self.a.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Signature of a shingle set. The empty set has no meaningful signature
    /// and is reported as [`DedupError::EmptyShingleSet`].
    pub fn signature(&self, shingles: &ShingleSet) -> Result<MinHashSignature, DedupError> {
        if shingles.is_empty() {
            return Err(DedupError::EmptyShingleSet);
        }
        let mut values = vec![u64::MAX; self.a.len()];
        for &h in shingles.hashes() {
            let x = (h % MERSENNE_61) as u128;
            for (slot, (&a, &b)) in values.iter_mut().zip(self.a.iter().zip(&self.b)) {
                let v = ((a as u128 * x + b as u128) % MERSENNE_61 as u128) as u64;
                if v < *slot {
                    *slot = v;
                }
            }
        }
        Ok(MinHashSignature {
            values,
            seed: self.seed,
        })
    }
}

/// Fraction of positions on which two signatures agree.
pub fn estimate_jaccard(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64, DedupError> {
    if a.values.len() != b.values.len() || a.seed != b.seed {
        return Err(DedupError::SignatureMismatch {
            left: (a.values.len(), a.seed),
            right: (b.values.len(), b.seed),
        });
    }
    let equal = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    Ok(equal as f64 / a.values.len() as f64)
}
