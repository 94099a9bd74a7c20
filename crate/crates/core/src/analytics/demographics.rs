use std::collections::BTreeMap;

use crate::kb::{age_at, Gender};
use crate::report::{Cell, ColumnKind, Provenance, ReportTable};

use super::{outlet_ranking, share, AnalysisConfig, FactTable, MentionFact, Tally, ALL_GROUP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenderGrouping {
    Outlet,
    Year,
}

fn outlet_groups<'a>(facts: &'a FactTable, config: &AnalysisConfig) -> Vec<(String, Vec<&'a MentionFact>)> {
    let mut groups = vec![(ALL_GROUP.to_string(), facts.politicians().collect::<Vec<_>>())];
    for (outlet, _) in outlet_ranking(facts, config.min_mentions_per_outlet, config.demographic_outlets) {
        let members = facts.politicians().filter(|f| f.outlet == outlet).collect();
        groups.push((outlet, members));
    }
    groups
}

/// Gender shares and mean scores per group; genders without mentions are
/// left out.
pub fn gender_report(
    facts: &FactTable,
    grouping: GenderGrouping,
    years: &[i32],
    config: &AnalysisConfig,
) -> ReportTable {
    let mut table = ReportTable::new(
        match grouping {
            GenderGrouping::Outlet => "gender_by_outlet",
            GenderGrouping::Year => "gender_by_year",
        },
        &[
            ("group", ColumnKind::Text),
            ("gender", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("share", ColumnKind::Real),
            ("mean_sentiment", ColumnKind::Real),
        ],
        Provenance::default(),
    );
    let groups = match grouping {
        GenderGrouping::Outlet => outlet_groups(facts, config),
        GenderGrouping::Year => years
            .iter()
            .map(|&y| (y.to_string(), facts.politicians().filter(|f| f.year == y).collect()))
            .collect(),
    };
    for (group, members) in groups {
        let total = members.len() as u64;
        let mut by_gender: BTreeMap<Gender, Tally> = BTreeMap::new();
        for f in &members {
            by_gender.entry(f.gender).or_default().add(f.sentiment_score);
        }
        for (g, t) in by_gender {
            table.push(vec![
                Cell::text(group.as_str()),
                Cell::text(g.as_str()),
                Cell::int(t.count),
                Cell::real(share(t.count, total)),
                Cell::real(t.mean()),
            ]);
        }
    }
    table
}

/// Age in years at publication, or `None` when the birth date is unknown or
/// after publication.
pub fn fact_age(f: &MentionFact) -> Option<f64> {
    age_at(f.birth_date?, f.published_at).ok()
}

/// Mean politician age at publication per outlet, `ALL` first.
pub fn age_report(facts: &FactTable, config: &AnalysisConfig) -> ReportTable {
    let mut table = ReportTable::new(
        "age_by_outlet",
        &[
            ("outlet", ColumnKind::Text),
            ("mentions", ColumnKind::Integer),
            ("aged_mentions", ColumnKind::Integer),
            ("mean_age", ColumnKind::Real),
        ],
        Provenance::default(),
    );
    for (group, members) in outlet_groups(facts, config) {
        let mut ages = Tally::default();
        for age in members.iter().filter_map(|f| fact_age(f)) {
            ages.add(age);
        }
        table.push(vec![
            Cell::text(group),
            Cell::int(members.len() as u64),
            Cell::int(ages.count),
            Cell::real(ages.mean()),
        ]);
    }
    table
}
