//! Naive re-implementation of every report, working from the raw stage
//! artifacts with nested loops and plain sums.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde_json::Value;

pub const ORIENTATIONS: [&str; 5] = ["RL", "CL", "C", "CR", "RR"];
pub const GENDERS: [&str; 4] = ["male", "female", "other", "unknown"];
const LINK_THRESHOLD: f64 = -0.2;

/// Expected cell. Shares and counts must match exactly; means, deviations
/// and cosines within a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Exact(Option<f64>),
    Close(Option<f64>),
}

fn t(s: impl Into<String>) -> Cell {
    Cell::Text(s.into())
}

fn n(v: usize) -> Cell {
    Cell::Int(v as i64)
}

pub type Table = Vec<Vec<Cell>>;

pub struct Doc {
    pub id: String,
    pub outlet: String,
    pub date: NaiveDate,
}

pub struct Person {
    pub id: String,
    pub name: String,
    pub gender: String,
    pub birth: Option<NaiveDate>,
    pub country: String,
    pub politician: bool,
    pub parties: Vec<String>,
}

#[derive(Clone)]
pub struct Fact {
    pub key: (String, u64, u64, u64),
    pub outlet: String,
    pub date: NaiveDate,
    pub kb_id: String,
    pub name: String,
    pub gender: String,
    pub birth: Option<NaiveDate>,
    pub country: String,
    pub politician: bool,
    pub orientation: Option<&'static str>,
    pub score: i64,
    pub confidence: f64,
    pub topics: Vec<String>,
}

pub struct Inputs {
    pub docs: Vec<Doc>,
    pub mentions: Vec<Value>,
    pub persons: Vec<Person>,
    pub parties: Vec<(String, f64)>,
    pub crosswalk: Vec<(String, String)>,
    pub topics: Vec<String>,
    pub subsets: Vec<(String, Vec<String>)>,
    pub years: Vec<i32>,
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("valid JSON line"))
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
        .expect("valid JSON")
}

fn date(v: &Value) -> NaiveDate {
    NaiveDate::parse_from_str(v.as_str().expect("date string"), "%Y-%m-%d").expect("ISO date")
}

fn text(v: &Value) -> String {
    v.as_str().expect("string").to_string()
}

impl Inputs {
    pub fn load(root: &Path) -> Inputs {
        let docs = jsonl(&root.join("dedup/survivors.jsonl"))
            .iter()
            .map(|d| Doc {
                id: text(&d["doc_id"]),
                outlet: text(&d["outlet"]),
                date: date(&d["published_at"]),
            })
            .collect();
        let persons = jsonl(&root.join("kb/persons.jsonl"))
            .iter()
            .map(|p| Person {
                id: text(&p["kb_id"]),
                name: text(&p["name"]),
                gender: text(&p["gender"]),
                birth: (!p["birth_date"].is_null()).then(|| date(&p["birth_date"])),
                country: text(&p["country"]),
                politician: p["is_politician"].as_bool().unwrap(),
                parties: p["party_ids"].as_array().unwrap().iter().map(text).collect(),
            })
            .collect();
        let parties = jsonl(&root.join("kb/parties.jsonl"))
            .iter()
            .map(|p| (text(&p["party_kb_id"]), p["left_right"].as_f64().unwrap()))
            .collect();
        let crosswalk = fs::read_to_string(root.join("kb/crosswalk.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .filter(|l| !l.is_empty())
            .map(|l| {
                let (a, b) = l.split_once(',').expect("two columns");
                (a.to_string(), b.to_string())
            })
            .collect();
        let topics = json(&root.join("topics/catalog.json"))
            .as_array()
            .unwrap()
            .iter()
            .map(|t| text(&t["topic_id"]))
            .collect();
        let subsets = json(&root.join("topics/subsets.json"))
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.as_array().unwrap().iter().map(text).collect()))
            .collect();
        let window = json(&root.join("ingest/manifest.json"));
        let (start, end) = (date(&window["window"]["start"]), date(&window["window"]["end"]));
        Inputs {
            docs,
            mentions: jsonl(&root.join("annotations/mentions.jsonl")),
            persons,
            parties,
            crosswalk,
            topics,
            subsets,
            years: (start.year()..=end.year()).collect(),
        }
    }

    fn orientation(&self, person: &Person) -> Option<&'static str> {
        for party in &person.parties {
            for (enc, pg) in &self.crosswalk {
                if enc != party {
                    continue;
                }
                for (id, lr) in &self.parties {
                    if id == pg {
                        let lr = *lr;
                        return Some(if lr < 2.0 {
                            "RL"
                        } else if lr < 4.0 {
                            "CL"
                        } else if lr < 6.0 {
                            "C"
                        } else if lr < 8.0 {
                            "CR"
                        } else {
                            "RR"
                        });
                    }
                }
            }
        }
        None
    }

    /// Nested-loop join of linked person mentions with documents and persons.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for m in &self.mentions {
            if m["entity_type"] != "person" || m["kb_id"].is_null() {
                continue;
            }
            if !(m["link_log_likelihood"].as_f64().unwrap() > LINK_THRESHOLD) {
                continue;
            }
            let doc_id = text(&m["doc_id"]);
            let kb_id = text(&m["kb_id"]);
            let Some(doc) = self.docs.iter().find(|d| d.id == doc_id) else {
                continue;
            };
            let Some(person) = self.persons.iter().find(|p| p.id == kb_id) else {
                continue;
            };
            let (pn, pu, pp) = (
                m["p_negative"].as_f64().unwrap(),
                m["p_neutral"].as_f64().unwrap(),
                m["p_positive"].as_f64().unwrap(),
            );
            let score = if pn > pu && pn > pp {
                -1
            } else if pp > pu && pp > pn {
                1
            } else {
                0
            };
            let topics = self
                .subsets
                .iter()
                .filter(|(_, docs)| docs.contains(&doc_id))
                .map(|(t, _)| t.clone())
                .collect();
            out.push(Fact {
                key: (
                    doc_id.clone(),
                    m["sentence_index"].as_u64().unwrap(),
                    m["start"].as_u64().unwrap(),
                    m["end"].as_u64().unwrap(),
                ),
                outlet: doc.outlet.clone(),
                date: doc.date,
                kb_id,
                name: person.name.clone(),
                gender: person.gender.clone(),
                birth: person.birth,
                country: person.country.clone(),
                politician: person.politician,
                orientation: if person.politician {
                    self.orientation(person)
                } else {
                    None
                },
                score,
                confidence: pn.max(pu).max(pp),
                topics,
            });
        }
        out
    }
}

fn mean(facts: &[&Fact]) -> Option<f64> {
    if facts.is_empty() {
        None
    } else {
        Some(facts.iter().map(|f| f.score).sum::<i64>() as f64 / facts.len() as f64)
    }
}

fn share(count: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| count as f64 / total as f64)
}

/// Sorted by count descending, then name.
fn ranking<'a>(keys: impl Iterator<Item = &'a str>) -> Vec<(String, usize)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for k in keys {
        match counts.iter_mut().find(|(c, _)| c == k) {
            Some(entry) => entry.1 += 1,
            None => counts.push((k.to_string(), 1)),
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    counts
}

pub struct Oracle<'a> {
    pub inputs: &'a Inputs,
    pub pol: Vec<&'a Fact>,
}

impl<'a> Oracle<'a> {
    pub fn new(inputs: &'a Inputs, facts: &'a [Fact]) -> Self {
        Oracle {
            inputs,
            pol: facts.iter().filter(|f| f.politician).collect(),
        }
    }

    fn outlets(&self, limit: usize) -> Vec<(String, usize)> {
        let mut r = ranking(self.pol.iter().map(|f| f.outlet.as_str()));
        r.truncate(limit);
        r
    }

    fn politicians(&self) -> Vec<(String, usize)> {
        ranking(self.pol.iter().map(|f| f.kb_id.as_str()))
    }

    fn of(&self, pred: impl Fn(&Fact) -> bool) -> Vec<&'a Fact> {
        self.pol.iter().copied().filter(|f| pred(f)).collect()
    }

    fn name_of(&self, kb_id: &str) -> String {
        self.pol.iter().find(|f| f.kb_id == kb_id).unwrap().name.clone()
    }

    pub fn outlet_sentiment(&self) -> Table {
        let corpus = mean(&self.pol);
        self.outlets(40)
            .into_iter()
            .map(|(o, c)| {
                let fs = self.of(|f| f.outlet == o);
                vec![t(o), n(c), Cell::Close(mean(&fs)), Cell::Close(corpus)]
            })
            .collect()
    }

    fn orientation_groups(&self, by_topic: bool) -> Vec<(String, Vec<&'a Fact>)> {
        let oriented = self.of(|f| f.orientation.is_some());
        let mut groups = Vec::new();
        if by_topic {
            groups.push((
                "ALL".to_string(),
                oriented.iter().copied().filter(|f| !f.topics.is_empty()).collect(),
            ));
            for topic in &self.inputs.topics {
                groups.push((
                    topic.clone(),
                    oriented.iter().copied().filter(|f| f.topics.contains(topic)).collect(),
                ));
            }
        } else {
            groups.push(("ALL".to_string(), oriented.clone()));
            for (o, _) in self.outlets(40) {
                groups.push((o.clone(), oriented.iter().copied().filter(|f| f.outlet == o).collect()));
            }
        }
        groups.retain(|(_, fs): &(String, Vec<&Fact>)| !fs.is_empty());
        groups
    }

    pub fn orientation_mentions(&self, by_topic: bool) -> Table {
        let mut rows = Vec::new();
        for (g, fs) in self.orientation_groups(by_topic) {
            for o in ORIENTATIONS {
                let c = fs.iter().filter(|f| f.orientation == Some(o)).count();
                rows.push(vec![t(&g), t(o), n(c), Cell::Exact(share(c, fs.len()))]);
            }
        }
        rows
    }

    pub fn orientation_deviation(&self, by_topic: bool) -> Table {
        let mut rows = Vec::new();
        for (g, fs) in self.orientation_groups(by_topic) {
            let group_mean = mean(&fs);
            for o in ORIENTATIONS {
                let sub: Vec<&Fact> = fs.iter().copied().filter(|f| f.orientation == Some(o)).collect();
                let m = mean(&sub);
                rows.push(vec![
                    t(&g),
                    t(o),
                    n(sub.len()),
                    Cell::Close(m),
                    Cell::Close(group_mean),
                    Cell::Close(m.map(|m| m - group_mean.unwrap())),
                ]);
            }
        }
        rows
    }

    pub fn top_politicians(&self) -> Table {
        self.politicians()
            .into_iter()
            .take(10)
            .enumerate()
            .map(|(i, (kb, c))| {
                let fs = self.of(|f| f.kb_id == kb);
                let mut yearly = Vec::new();
                for y in &self.inputs.years {
                    let in_year: Vec<&Fact> = fs.iter().copied().filter(|f| f.date.year() == *y).collect();
                    if let Some(m) = mean(&in_year) {
                        yearly.push(m);
                    }
                }
                let k = yearly.len() as f64;
                let avg = yearly.iter().sum::<f64>() / k;
                let var = yearly.iter().map(|m| (m - avg) * (m - avg)).sum::<f64>() / k;
                vec![
                    n(i + 1),
                    t(&kb),
                    t(self.name_of(&kb)),
                    n(c),
                    Cell::Close(mean(&fs)),
                    Cell::Close(Some(var.sqrt())),
                    n(yearly.len()),
                ]
            })
            .collect()
    }

    pub fn extreme_politicians(&self) -> Table {
        let pool: Vec<(String, usize, f64)> = self
            .politicians()
            .into_iter()
            .take(100)
            .map(|(kb, c)| {
                let m = mean(&self.of(|f| f.kb_id == kb)).unwrap();
                (kb, c, m)
            })
            .collect();
        let mut rows = Vec::new();
        for side in ["highest", "lowest"] {
            let mut sorted = pool.clone();
            sorted.sort_by(|a, b| {
                let by_mean = if side == "highest" {
                    b.2.total_cmp(&a.2)
                } else {
                    a.2.total_cmp(&b.2)
                };
                by_mean.then(b.1.cmp(&a.1)).then(a.0.cmp(&b.0))
            });
            for (i, (kb, c, m)) in sorted.into_iter().take(10).enumerate() {
                rows.push(vec![
                    t(side),
                    n(i + 1),
                    t(&kb),
                    t(self.name_of(&kb)),
                    n(c),
                    Cell::Close(Some(m)),
                ]);
            }
        }
        rows
    }

    fn gender_rows(group: &str, fs: &[&Fact]) -> Table {
        let mut rows = Vec::new();
        for g in GENDERS {
            let sub: Vec<&Fact> = fs.iter().copied().filter(|f| f.gender == g).collect();
            if !sub.is_empty() {
                rows.push(vec![
                    t(group),
                    t(g),
                    n(sub.len()),
                    Cell::Exact(share(sub.len(), fs.len())),
                    Cell::Close(mean(&sub)),
                ]);
            }
        }
        rows
    }

    pub fn gender_by_outlet(&self) -> Table {
        let mut rows = Self::gender_rows("ALL", &self.pol);
        for (o, _) in self.outlets(10) {
            rows.extend(Self::gender_rows(&o, &self.of(|f| f.outlet == o)));
        }
        rows
    }

    pub fn gender_by_year(&self) -> Table {
        let mut rows = Vec::new();
        for y in &self.inputs.years {
            rows.extend(Self::gender_rows(&y.to_string(), &self.of(|f| f.date.year() == *y)));
        }
        rows
    }

    fn age_row(group: &str, fs: &[&Fact]) -> Vec<Cell> {
        let mut days = 0i64;
        let mut aged = 0usize;
        for f in fs {
            if let Some(b) = f.birth {
                if b <= f.date {
                    days += (f.date - b).num_days();
                    aged += 1;
                }
            }
        }
        let mean_age = (aged > 0).then(|| days as f64 / aged as f64 / 365.2425);
        vec![t(group), n(fs.len()), n(aged), Cell::Close(mean_age)]
    }

    pub fn age_by_outlet(&self) -> Table {
        let mut rows = vec![Self::age_row("ALL", &self.pol)];
        for (o, _) in self.outlets(10) {
            rows.push(Self::age_row(&o, &self.of(|f| f.outlet == o)));
        }
        rows
    }

    /// (outlet, mentions cosine, sentiment cosine) in outlet-ranking order.
    pub fn source_similarity(&self) -> Vec<(String, Option<f64>, Option<f64>)> {
        let support: Vec<String> = self.politicians().into_iter().take(1000).map(|(k, _)| k).collect();
        let vectors = |fs: &[&Fact]| -> (Vec<f64>, Vec<Option<f64>>) {
            let mut counts = Vec::new();
            let mut means = Vec::new();
            for kb in &support {
                let sub: Vec<&Fact> = fs.iter().copied().filter(|f| &f.kb_id == kb).collect();
                counts.push(sub.len() as f64);
                means.push(if sub.len() >= 10 { mean(&sub) } else { None });
            }
            (counts, means)
        };
        let cosine = |a: &[f64], b: &[f64]| -> Option<f64> {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            (na * nb > 0.0).then(|| dot / (na * nb))
        };
        let (corpus_counts, corpus_means) = vectors(&self.pol);
        self.outlets(40)
            .into_iter()
            .map(|(o, _)| {
                let (counts, means) = vectors(&self.of(|f| f.outlet == o));
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for (x, y) in means.iter().zip(&corpus_means) {
                    if let (Some(x), Some(y)) = (x, y) {
                        a.push(*x);
                        b.push(*y);
                    }
                }
                let sentiment = if a.is_empty() { None } else { cosine(&a, &b) };
                (o, cosine(&counts, &corpus_counts), sentiment)
            })
            .collect()
    }

    /// `(keys, population)` for a temporal dimension.
    fn temporal_keys(&self, dim: &str) -> (Vec<String>, Vec<&'a Fact>) {
        match dim {
            "orientation" => (
                ORIENTATIONS.iter().map(|s| s.to_string()).collect(),
                self.of(|f| f.orientation.is_some()),
            ),
            "politician" => (
                self.politicians().into_iter().take(10).map(|(k, _)| k).collect(),
                self.pol.clone(),
            ),
            _ => (
                GENDERS
                    .iter()
                    .filter(|g| self.pol.iter().any(|f| f.gender == **g))
                    .map(|s| s.to_string())
                    .collect(),
                self.pol.clone(),
            ),
        }
    }

    pub fn temporal(&self, dim: &str, sentiment: bool) -> Table {
        let (keys, population) = self.temporal_keys(dim);
        let key_of = |f: &Fact| -> String {
            match dim {
                "orientation" => f.orientation.unwrap().to_string(),
                "politician" => f.kb_id.clone(),
                _ => f.gender.clone(),
            }
        };
        let mut rows = Vec::new();
        for y in &self.inputs.years {
            let in_year: Vec<&Fact> = population.iter().copied().filter(|f| f.date.year() == *y).collect();
            for k in &keys {
                let sub: Vec<&Fact> = in_year.iter().copied().filter(|f| &key_of(f) == k).collect();
                let last = if sentiment {
                    Cell::Close(mean(&sub))
                } else {
                    Cell::Exact(share(sub.len(), in_year.len()))
                };
                rows.push(vec![Cell::Int(i64::from(*y)), t(k), n(sub.len()), last]);
            }
        }
        rows
    }

    pub fn corpus_stats(&self) -> Table {
        let inputs = self.inputs;
        let mut rows = vec![vec![t("documents"), t("articles"), n(inputs.docs.len())]];
        let persons: Vec<&Value> = inputs
            .mentions
            .iter()
            .filter(|m| m["entity_type"] == "person")
            .collect();
        rows.push(vec![t("mentions"), t("all_persons"), n(persons.len())]);
        let linked = persons
            .iter()
            .filter(|m| m["link_log_likelihood"].as_f64().is_some_and(|l| l > LINK_THRESHOLD))
            .count();
        rows.push(vec![t("mentions"), t("linked_persons"), n(linked)]);
        rows.push(vec![t("mentions"), t("politicians"), n(self.pol.len())]);
        let mut countries: Vec<&str> = self.pol.iter().map(|f| f.country.as_str()).collect();
        countries.sort();
        countries.dedup();
        for c in countries {
            rows.push(vec![t("country"), t(c), n(self.of(|f| f.country == c).len())]);
        }
        for o in ORIENTATIONS {
            rows.push(vec![
                t("orientation"),
                t(o),
                n(self.of(|f| f.orientation == Some(o)).len()),
            ]);
        }
        for topic in &inputs.topics {
            rows.push(vec![
                t("topic"),
                t(topic),
                n(self.of(|f| f.topics.contains(topic)).len()),
            ]);
        }
        for g in GENDERS {
            rows.push(vec![t("gender"), t(g), n(self.of(|f| f.gender == g).len())]);
        }
        let mut outlets: Vec<&str> = inputs.docs.iter().map(|d| d.outlet.as_str()).collect();
        outlets.sort();
        outlets.dedup();
        for o in outlets {
            rows.push(vec![
                t("outlet_articles"),
                t(o),
                n(inputs.docs.iter().filter(|d| d.outlet == o).count()),
            ]);
        }
        for y in &inputs.years {
            let c = inputs.docs.iter().filter(|d| d.date.year() == *y).count();
            rows.push(vec![t("year_articles"), t(y.to_string()), n(c)]);
        }
        rows
    }

    pub fn confidence_stability(&self) -> Table {
        let mut kept: Vec<&Fact> = Vec::new();
        for class in [-1, 0, 1] {
            let mut members = self.of(|f| f.score == class);
            members.sort_by(|a, b| b.confidence.partial_cmp(&a.confidence).unwrap().then(a.key.cmp(&b.key)));
            let keep = members.len().div_ceil(2);
            kept.extend_from_slice(&members[..keep]);
        }
        let ranked: Vec<(String, usize)> = self.politicians().into_iter().take(1000).collect();
        let (mut cf, mut ck, mut mf, mut mk) = (vec![], vec![], vec![], vec![]);
        for (kb, c) in &ranked {
            let sub: Vec<&Fact> = kept.iter().copied().filter(|f| &f.kb_id == kb).collect();
            cf.push(*c as f64);
            ck.push(sub.len() as f64);
            if let Some(m) = mean(&sub) {
                mf.push(mean(&self.of(|f| &f.kb_id == kb)).unwrap());
                mk.push(m);
            }
        }
        let pearson = |x: &[f64], y: &[f64]| {
            let k = x.len() as f64;
            let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
            let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
            let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
            sxy / (sxx.sqrt() * syy.sqrt())
        };
        let stat = |name: &str, v: f64| vec![t(name), Cell::Close(Some(v))];
        vec![
            stat("entities", ranked.len() as f64),
            stat("surviving_entities", mk.len() as f64),
            stat("total_mentions", self.pol.len() as f64),
            stat("kept_mentions", kept.len() as f64),
            stat("pearson_mentions", pearson(&cf, &ck)),
            stat("pearson_sentiment", pearson(&mf, &mk)),
        ]
    }
}

/// Reports keyed by id, except source similarity, which is checked with its
/// own rank rule.
pub fn expected_tables(o: &Oracle<'_>) -> BTreeMap<&'static str, Table> {
    let mut m = BTreeMap::new();
    m.insert("outlet_sentiment", o.outlet_sentiment());
    m.insert("orientation_mentions_by_outlet", o.orientation_mentions(false));
    m.insert("orientation_mentions_by_topic", o.orientation_mentions(true));
    m.insert("orientation_deviation_by_outlet", o.orientation_deviation(false));
    m.insert("orientation_deviation_by_topic", o.orientation_deviation(true));
    m.insert("top_politicians", o.top_politicians());
    m.insert("extreme_politicians", o.extreme_politicians());
    m.insert("gender_by_outlet", o.gender_by_outlet());
    m.insert("gender_by_year", o.gender_by_year());
    m.insert("age_by_outlet", o.age_by_outlet());
    for dim in ["orientation", "politician", "gender"] {
        let (a, b) = match dim {
            "orientation" => ("temporal_orientation_mentions", "temporal_orientation_sentiment"),
            "politician" => ("temporal_politician_mentions", "temporal_politician_sentiment"),
            _ => ("temporal_gender_mentions", "temporal_gender_sentiment"),
        };
        m.insert(a, o.temporal(dim, false));
        m.insert(b, o.temporal(dim, true));
    }
    m.insert("corpus_stats", o.corpus_stats());
    m.insert("confidence_stability", o.confidence_stability());
    m
}
