use std::collections::HashSet;
use std::time::Instant;

use polsent_core::dedup::{estimate_jaccard, MinHasher, ShingleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

const PAIRS: usize = 1000;
const UNION: usize = 200;

/// Random shingle sets sharing `shared` hashes, each with `(UNION - shared) / 2`
/// hashes of its own.
fn planted_pair(rng: &mut ChaCha8Rng, shared: usize) -> (Vec<u64>, Vec<u64>) {
    let mut seen = HashSet::new();
    let mut fresh = |rng: &mut ChaCha8Rng, n: usize| -> Vec<u64> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let h: u64 = rng.gen();
            if seen.insert(h) {
                out.push(h);
            }
        }
        out
    };
    let common = fresh(rng, shared);
    let own = (UNION - shared) / 2;
    let mut a = common.clone();
    a.extend(fresh(rng, own));
    let mut b = common;
    b.extend(fresh(rng, own));
    (a, b)
}

fn exact_jaccard(a: &[u64], b: &[u64]) -> f64 {
    let a: HashSet<u64> = a.iter().copied().collect();
    let b: HashSet<u64> = b.iter().copied().collect();
    a.intersection(&b).count() as f64 / a.union(&b).count() as f64
}

pub fn run() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut summary = Vec::new();
    for target in [0.2, 0.5, 0.8] {
        let shared = (target * UNION as f64).round() as usize;
        let mut abs_err = 0.0;
        for _ in 0..PAIRS {
            let (a, b) = planted_pair(&mut rng, shared);
            let exact = exact_jaccard(&a, &b);
            ensure!(
                (exact - target).abs() < 1e-12,
                "planted pair has Jaccard {exact}, wanted {target}"
            );
            let hasher = MinHasher::new(256, rng.gen()).map_err(|e| e.to_string())?;
            let sa = hasher
                .signature(&ShingleSet::from_hashes(a, 5))
                .map_err(|e| e.to_string())?;
            let sb = hasher
                .signature(&ShingleSet::from_hashes(b, 5))
                .map_err(|e| e.to_string())?;
            let est = estimate_jaccard(&sa, &sb).map_err(|e| e.to_string())?;
            abs_err += (est - exact).abs();
        }
        let mae = abs_err / PAIRS as f64;
        summary.push(format!("J={target}: MAE {mae:.4}"));
        ensure!(mae <= 0.04, "J={target}: mean absolute error {mae:.4} > 0.04");
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 30.0, "took {secs:.1}s, limit 30s");
    Ok(format!("{} pairs per level, n=256; {}", PAIRS, summary.join(", ")))
}
