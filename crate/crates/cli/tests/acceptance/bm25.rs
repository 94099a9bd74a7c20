use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use polsent_core::ingest::{CorpusManifest, RawDocument};
use polsent_core::topics::{bm25_score, build_index, query_terms, select_topic_subset, Bm25Params, TopicQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

const VOCAB: [&str; 24] = [
    "vote",
    "budget",
    "impôt",
    "grève",
    "climat",
    "réforme",
    "retraite",
    "santé",
    "école",
    "police",
    "frontière",
    "guerre",
    "énergie",
    "prix",
    "salaire",
    "loi",
    "sénat",
    "maire",
    "région",
    "europe",
    "migrants",
    "hôpital",
    "usine",
    "banque",
];

const QUERIES: [&str; 8] = [
    "climat énergie",
    "retraite réforme grève",
    "guerre",
    "prix salaire prix",
    "europe frontière migrants police",
    "hôpital santé école",
    "banque impôt budget loi sénat",
    "absent inconnu",
];

fn toy_corpus(seed: u64) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..100)
        .map(|i| {
            // Skewed draws so that document frequencies vary.
            let pick = |rng: &mut ChaCha8Rng| {
                let r: f64 = rng.gen();
                VOCAB[((r * r) * VOCAB.len() as f64) as usize]
            };
            let title: Vec<&str> = (0..rng.gen_range(0..4)).map(|_| pick(&mut rng)).collect();
            let body: Vec<&str> = (0..rng.gen_range(3..60)).map(|_| pick(&mut rng)).collect();
            RawDocument {
                doc_id: format!("t{i:03}"),
                url: format!("https://toy.fr/{i}"),
                domain: "toy.fr".into(),
                outlet: "toy".into(),
                published_at: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
                title: title.join(" "),
                body: body.join(" "),
            }
        })
        .collect()
}

/// Document-at-a-time closed-form BM25 over whitespace tokens.
struct BruteForce {
    docs: Vec<(String, Vec<String>)>,
    avg_len: f64,
}

impl BruteForce {
    fn new(docs: &[RawDocument]) -> Self {
        let docs: Vec<(String, Vec<String>)> = docs
            .iter()
            .map(|d| {
                let tokens = d
                    .title
                    .split_whitespace()
                    .chain(d.body.split_whitespace())
                    .map(str::to_string)
                    .collect();
                (d.doc_id.clone(), tokens)
            })
            .collect();
        let total: usize = docs.iter().map(|(_, t)| t.len()).sum();
        let avg_len = total as f64 / docs.len() as f64;
        Self { docs, avg_len }
    }

    fn score(&self, query: &str, doc: usize, p: Bm25Params) -> f64 {
        let mut terms: Vec<&str> = Vec::new();
        for t in query.split_whitespace() {
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
        let n = self.docs.len() as f64;
        let tokens = &self.docs[doc].1;
        let dl = tokens.len() as f64;
        let mut score = 0.0;
        for term in terms {
            let tf = tokens.iter().filter(|t| t.as_str() == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = self.docs.iter().filter(|(_, t)| t.iter().any(|x| x == term)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * dl / self.avg_len));
        }
        score
    }

    fn matches(&self, query: &str, doc: usize) -> bool {
        query
            .split_whitespace()
            .any(|q| self.docs[doc].1.iter().any(|t| t == q))
    }
}

pub fn run() -> Outcome {
    let docs = toy_corpus(99);
    let manifest = CorpusManifest::from_documents(docs.clone());
    let index = build_index(&manifest);
    let oracle = BruteForce::new(&docs);
    let params = Bm25Params::default();

    let mut pairs = 0;
    let mut max_diff: f64 = 0.0;
    let mut oracle_scores: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for query in QUERIES {
        let terms = query_terms(query);
        for (i, d) in docs.iter().enumerate() {
            let indexed = bm25_score(&index, &terms, &d.doc_id, params).map_err(|e| e.to_string())?;
            let brute = oracle.score(query, i, params);
            max_diff = max_diff.max((indexed - brute).abs());
            ensure!(
                (indexed - brute).abs() <= 1e-9,
                "query {query:?}, doc {}: index {indexed} vs closed form {brute}",
                d.doc_id
            );
            oracle_scores.entry(query).or_default().push(brute);
            pairs += 1;
        }
    }

    let mut subsets_checked = 0;
    for query in QUERIES {
        let scores = &oracle_scores[query];
        let mut distinct: Vec<f64> = scores.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        // Thresholds well away from any score, so the comparison is exact.
        let mut thresholds = vec![0.0];
        thresholds.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        thresholds.push(distinct.last().copied().unwrap_or(0.0) + 1.0);
        for threshold in thresholds {
            let topic = TopicQuery {
                topic_id: "q".into(),
                query_text: query.into(),
                threshold,
            };
            let got = select_topic_subset(&index, &topic, params);
            let want: BTreeSet<String> = (0..docs.len())
                .filter(|&i| oracle.matches(query, i) && scores[i] >= threshold)
                .map(|i| docs[i].doc_id.clone())
                .collect();
            ensure!(
                got == want,
                "query {query:?} at threshold {threshold}: {got:?} vs oracle {want:?}"
            );
            subsets_checked += 1;
        }
        // A document scoring exactly the threshold is selected.
        let terms = query_terms(query);
        if let Some(i) = (0..docs.len()).find(|&i| oracle.matches(query, i)) {
            let exact = bm25_score(&index, &terms, &docs[i].doc_id, params).map_err(|e| e.to_string())?;
            let topic = TopicQuery {
                topic_id: "q".into(),
                query_text: query.into(),
                threshold: exact,
            };
            ensure!(
                select_topic_subset(&index, &topic, params).contains(&docs[i].doc_id),
                "query {query:?}: document scoring exactly the threshold was not selected"
            );
        }
    }
    Ok(format!(
        "{pairs} (query, doc) pairs, max |index - closed form| = {max_diff:e}; {subsets_checked} subsets equal the exhaustive oracle"
    ))
}
