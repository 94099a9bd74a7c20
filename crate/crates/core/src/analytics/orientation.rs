use std::collections::BTreeMap;

use crate::kb::Orientation;
use crate::report::{Cell, ColumnKind, Provenance, ReportTable};

use super::{outlet_ranking, share, AnalysisConfig, FactTable, MentionFact, Tally, ALL_GROUP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Outlet,
    Topic,
}

/// Oriented politician facts per group, `ALL` first. For topics, `ALL`
/// covers facts in at least one topic.
fn oriented_groups<'a>(
    facts: &'a FactTable,
    by: GroupBy,
    topics: &[String],
    config: &AnalysisConfig,
) -> Vec<(String, Vec<&'a MentionFact>)> {
    let oriented: Vec<&MentionFact> = facts.politicians().filter(|f| f.orientation.is_some()).collect();
    let mut groups = Vec::new();
    match by {
        GroupBy::Outlet => {
            groups.push((ALL_GROUP.to_string(), oriented.clone()));
            for (outlet, _) in outlet_ranking(facts, config.min_mentions_per_outlet, config.max_outlets) {
                let members = oriented.iter().copied().filter(|f| f.outlet == outlet).collect();
                groups.push((outlet, members));
            }
        }
        GroupBy::Topic => {
            let any = oriented.iter().copied().filter(|f| !f.topic_ids.is_empty()).collect();
            groups.push((ALL_GROUP.to_string(), any));
            for topic in topics {
                let members = oriented
                    .iter()
                    .copied()
                    .filter(|f| f.topic_ids.contains(topic))
                    .collect();
                groups.push((topic.clone(), members));
            }
        }
    }
    groups.retain(|(_, members): &(String, Vec<&MentionFact>)| !members.is_empty());
    groups
}

fn by_orientation(members: &[&MentionFact]) -> BTreeMap<Orientation, Tally> {
    let mut out: BTreeMap<Orientation, Tally> = Orientation::ALL.iter().map(|&o| (o, Tally::default())).collect();
    for f in members {
        out.get_mut(&f.orientation.expect("oriented"))
            .expect("all buckets")
            .add(f.sentiment_score);
    }
    out
}

fn report_name(prefix: &str, by: GroupBy) -> String {
    match by {
        GroupBy::Outlet => format!("{prefix}_by_outlet"),
        GroupBy::Topic => format!("{prefix}_by_topic"),
    }
}

/// Share of each orientation among a group's oriented politician mentions.
pub fn orientation_mention_distribution(
    facts: &FactTable,
    by: GroupBy,
    topics: &[String],
    config: &AnalysisConfig,
) -> ReportTable {
    let mut table = ReportTable::new(
        &report_name("orientation_mentions", by),
        &[
            ("group", ColumnKind::Text),
            ("orientation", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("share", ColumnKind::Real),
        ],
        Provenance::default(),
    );
    for (group, members) in oriented_groups(facts, by, topics, config) {
        let total = members.len() as u64;
        for (o, t) in by_orientation(&members) {
            table.push(vec![
                Cell::text(group.as_str()),
                Cell::text(o.as_str()),
                Cell::int(t.count),
                Cell::real(share(t.count, total)),
            ]);
        }
    }
    table
}

/// Mean score of each orientation minus the group mean over all oriented
/// mentions of the group.
pub fn orientation_sentiment_deviation(
    facts: &FactTable,
    by: GroupBy,
    topics: &[String],
    config: &AnalysisConfig,
) -> ReportTable {
    let mut table = ReportTable::new(
        &report_name("orientation_deviation", by),
        &[
            ("group", ColumnKind::Text),
            ("orientation", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("mean_sentiment", ColumnKind::Real),
            ("group_mean_sentiment", ColumnKind::Real),
            ("deviation", ColumnKind::Real),
        ],
        Provenance::default(),
    );
    for (group, members) in oriented_groups(facts, by, topics, config) {
        let mut overall = Tally::default();
        for f in &members {
            overall.add(f.sentiment_score);
        }
        let group_mean = overall.mean();
        for (o, t) in by_orientation(&members) {
            let mean = t.mean();
            table.push(vec![
                Cell::text(group.as_str()),
                Cell::text(o.as_str()),
                Cell::int(t.count),
                Cell::real(mean),
                Cell::real(group_mean),
                Cell::real(mean.zip(group_mean).map(|(m, g)| m - g)),
            ]);
        }
    }
    table
}
