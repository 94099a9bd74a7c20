use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::NaiveDate;
use polsent_core::dedup::{dedup_per_domain, DedupConfig, DedupOutcome};
use polsent_core::ingest::RawDocument;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

const DOCS: usize = 500;
const DOMAINS: [&str; 5] = ["alpha.fr", "beta.fr", "gamma.fr", "delta.fr", "epsilon.fr"];
const VOCAB: usize = 4000;
const WORDS: usize = 180;
const ORACLE_THRESHOLD: f64 = 0.7;

fn word(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    let mut s = String::new();
    let mut n = i + 27;
    while n > 0 {
        s.push(letters[n % 26] as char);
        n /= 26;
    }
    s
}

fn random_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| word(rng.gen_range(0..VOCAB))).collect()
}

fn doc(i: usize, domain: &str, day: u32, words: &[String]) -> RawDocument {
    let date = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap() + chrono::Days::new(u64::from(day));
    RawDocument {
        doc_id: format!("d{i:04}"),
        url: format!("https://{domain}/{i}"),
        domain: domain.to_string(),
        outlet: domain.trim_end_matches(".fr").to_string(),
        published_at: date,
        title: String::new(),
        body: words.join(" "),
    }
}

/// Clusters of lightly edited copies within a domain, exact copies placed in
/// other domains, and unrelated singletons.
fn planted_corpus(seed: u64) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut texts: Vec<(String, Vec<String>)> = Vec::new();
    let mut clusters = 0;
    while texts.len() < 200 {
        let domain = DOMAINS[clusters % DOMAINS.len()];
        clusters += 1;
        let base = random_words(&mut rng, WORDS);
        let size = rng.gen_range(2..=5);
        texts.push((domain.to_string(), base.clone()));
        for _ in 1..size {
            let mut copy = base.clone();
            for _ in 0..rng.gen_range(0..=9) {
                let at = rng.gen_range(0..copy.len());
                copy[at] = word(rng.gen_range(0..VOCAB));
            }
            texts.push((domain.to_string(), copy));
        }
    }
    for k in 0..20 {
        let (domain, body) = texts[k * 7].clone();
        let home = DOMAINS.iter().position(|d| *d == domain).unwrap();
        let other = DOMAINS[(home + 1 + k % 4) % DOMAINS.len()].to_string();
        texts.push((other, body));
    }
    while texts.len() < DOCS {
        let domain = DOMAINS[rng.gen_range(0..DOMAINS.len())];
        let n = rng.gen_range(60..WORDS);
        texts.push((domain.to_string(), random_words(&mut rng, n)));
    }
    texts.shuffle(&mut rng);
    texts
        .iter()
        .enumerate()
        .map(|(i, (domain, words))| doc(i, domain, rng.gen_range(0..900), words))
        .collect()
}

fn five_grams(body: &str) -> HashSet<String> {
    let words: Vec<&str> = body.split_whitespace().collect();
    words.windows(5).map(|w| w.join(" ")).collect()
}

fn exact_jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    a.intersection(b).count() as f64 / a.union(b).count() as f64
}

/// Within-domain pairs at or above the oracle threshold, as (i, j) with i < j.
fn oracle_pairs(docs: &[RawDocument]) -> Vec<(usize, usize)> {
    let grams: Vec<HashSet<String>> = docs.iter().map(|d| five_grams(&d.body)).collect();
    let mut pairs = Vec::new();
    for i in 0..docs.len() {
        for j in i + 1..docs.len() {
            if docs[i].domain == docs[j].domain && exact_jaccard(&grams[i], &grams[j]) >= ORACLE_THRESHOLD {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn with_threads(threads: usize, docs: &[RawDocument], config: &DedupConfig) -> Result<DedupOutcome, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| dedup_per_domain(docs, config))
        .map_err(|e| e.to_string())
}

pub fn run() -> Outcome {
    let docs = planted_corpus(4242);
    let config = DedupConfig::with_seed(17);
    let one = with_threads(1, &docs, &config)?;
    let eight = with_threads(8, &docs, &config)?;

    let ids = |o: &DedupOutcome| o.survivors.iter().map(|d| d.doc_id.clone()).collect::<Vec<_>>();
    ensure!(ids(&one) == ids(&eight), "survivors differ between 1 and 8 threads");
    ensure!(
        one.clusters == eight.clusters,
        "clusters differ between 1 and 8 threads"
    );

    let domain_of: BTreeMap<&str, &str> = docs.iter().map(|d| (d.doc_id.as_str(), d.domain.as_str())).collect();
    let mut cluster_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (c, cluster) in one.clusters.iter().enumerate() {
        let domains: BTreeSet<&str> = cluster.members.iter().map(|m| domain_of[m.as_str()]).collect();
        ensure!(
            domains.len() == 1 && domains.contains(cluster.domain.as_str()),
            "cluster {:?} spans domains {domains:?}",
            cluster.members
        );
        for m in &cluster.members {
            cluster_of.insert(m, c);
        }
    }

    let pairs = oracle_pairs(&docs);
    ensure!(pairs.len() >= 100, "only {} planted oracle pairs", pairs.len());
    let recovered = pairs
        .iter()
        .filter(|&&(i, j)| {
            let (a, b) = (
                cluster_of.get(docs[i].doc_id.as_str()),
                cluster_of.get(docs[j].doc_id.as_str()),
            );
            a.is_some() && a == b
        })
        .count();
    let recovery = recovered as f64 / pairs.len() as f64;
    ensure!(
        recovery >= 0.95,
        "recovered {recovered} of {} oracle pairs ({recovery:.3})",
        pairs.len()
    );

    let cross_domain_identical = (0..docs.len())
        .flat_map(|i| (i + 1..docs.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| docs[i].domain != docs[j].domain && docs[i].body == docs[j].body)
        .count();
    Ok(format!(
        "{} docs, {} oracle pairs, recovery {:.3}, {} clusters, 0 cross-domain merges ({} identical cross-domain pairs), survivors identical at 1 and 8 threads",
        docs.len(),
        pairs.len(),
        recovery,
        one.clusters.len(),
        cross_domain_identical
    ))
}
