//! Roster generation from per-group demographic specs, and the demographic
//! census of a roster.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentRecord, Demographics, Goals};
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weighted {
    pub value: String,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counted {
    pub value: String,
    pub count: u32,
}

/// How one variable is filled in for a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Draw {
    /// Independent categorical draws.
    Probabilities { categories: Vec<Weighted> },
    /// Exactly these counts, assigned to members in seeded order.
    Counts { categories: Vec<Counted> },
}

impl Draw {
    pub fn categories(&self) -> Vec<&str> {
        match self {
            Draw::Probabilities { categories } => categories.iter().map(|c| c.value.as_str()).collect(),
            Draw::Counts { categories } => categories.iter().map(|c| c.value.as_str()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(flatten)]
    pub draw: Draw,
}

fn default_profile() -> String {
    "I am {name}, a {occupation} ({gender}, age {age_band}, {education}). I am one of the {stance}.".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub size: u32,
    #[serde(default)]
    pub stance_label: String,
    /// Placeholders: `{name}`, `{group}`, `{stance}` and any variable name.
    pub long_term_goal_template: String,
    #[serde(default = "default_profile")]
    pub self_awareness_template: String,
    #[serde(default)]
    pub short_term_goal: String,
    #[serde(default)]
    pub initial_items: Vec<ObjectId>,
    pub initial_region: String,
    #[serde(default)]
    pub distributions: Vec<VariableSpec>,
    /// Drawn uniformly when no `occupation` variable is given.
    #[serde(default)]
    pub occupations: Vec<String>,
    #[serde(default)]
    pub names: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attitude {
    Positive,
    Neutral,
    Negative,
}

impl Attitude {
    pub fn wording(self, name: &str) -> String {
        match self {
            Attitude::Positive => format!("I like {name} and feel I can count on them."),
            Attitude::Neutral => format!("I know {name}, but I have no strong feelings about them."),
            Attitude::Negative => format!("I do not trust {name} and find them hard to deal with."),
        }
    }
}

/// Initial attitude of one agent toward another. Ends name an agent id or a
/// group, which stands for every member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipSeed {
    pub from: String,
    pub to: String,
    pub attitude: Attitude,
}

/// Where the sampling seed comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SeedPolicy {
    /// The session seed.
    #[default]
    Session,
    /// A fixed seed, so every session of the scenario gets the same roster.
    Fixed { seed: u64 },
}

impl SeedPolicy {
    pub fn resolve(self, session_seed: u64) -> u64 {
        match self {
            SeedPolicy::Session => session_seed,
            SeedPolicy::Fixed { seed } => seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub relationships: Vec<RelationshipSeed>,
    #[serde(default)]
    pub seed_policy: SeedPolicy,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopulationError {
    #[error("group `{0}` is empty")]
    EmptyGroup(String),
    #[error("group `{group}`, variable `{variable}`: probabilities sum to {sum}")]
    BadDistribution { group: String, variable: String, sum: f64 },
    #[error("group `{group}`, variable `{variable}`: counts sum to {total}, group size is {size}")]
    CountMismatch { group: String, variable: String, total: u32, size: u32 },
    #[error("relationship from `{0}` to itself")]
    SelfEdge(String),
    #[error("relationship end `{0}` names no agent or group")]
    UnknownEnd(String),
    #[error("group name `{0}` is used twice")]
    DuplicateGroup(String),
}

/// A generated agent plus where and with what it starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledAgent {
    pub record: AgentRecord,
    pub region: String,
    pub items: Vec<ObjectId>,
}

pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

pub fn validate_population(spec: &PopulationSpec) -> Result<(), PopulationError> {
    let mut seen = alloc::collections::BTreeSet::new();
    for g in &spec.groups {
        if !seen.insert(g.name.as_str()) {
            return Err(PopulationError::DuplicateGroup(g.name.clone()));
        }
        if g.size == 0 {
            return Err(PopulationError::EmptyGroup(g.name.clone()));
        }
        for v in &g.distributions {
            match &v.draw {
                Draw::Probabilities { categories } => {
                    let sum: f64 = categories.iter().map(|c| c.p).sum();
                    if categories.is_empty() || categories.iter().any(|c| c.p.is_nan() || c.p < 0.0) || libm::fabs(sum - 1.0) > 1e-9 {
                        return Err(PopulationError::BadDistribution {
                            group: g.name.clone(),
                            variable: v.name.clone(),
                            sum,
                        });
                    }
                }
                Draw::Counts { categories } => {
                    let total: u32 = categories.iter().map(|c| c.count).sum();
                    if total != g.size {
                        return Err(PopulationError::CountMismatch {
                            group: g.name.clone(),
                            variable: v.name.clone(),
                            total,
                            size: g.size,
                        });
                    }
                }
            }
        }
    }
    for r in &spec.relationships {
        if r.from == r.to && !spec.groups.iter().any(|g| g.name == r.from) {
            return Err(PopulationError::SelfEdge(r.from.clone()));
        }
    }
    Ok(())
}

fn fill(template: &str, vars: &BTreeMap<&str, String>) -> String {
    let mut out = String::from(template);
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

/// Draws a roster. Pure in `(spec, seed)`; group sizes are exact.
pub fn sample_population(spec: &PopulationSpec, seed: u64, wm_capacity: usize) -> Result<Vec<SampledAgent>, PopulationError> {
    validate_population(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roster: Vec<SampledAgent> = Vec::new();
    for g in &spec.groups {
        let n = g.size as usize;
        let mut profiles = alloc::vec![Demographics::default(); n];
        for v in &g.distributions {
            match &v.draw {
                Draw::Probabilities { categories } => {
                    for p in profiles.iter_mut() {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        let mut pick = &categories[categories.len() - 1].value;
                        for c in categories {
                            acc += c.p;
                            if u < acc {
                                pick = &c.value;
                                break;
                            }
                        }
                        p.set(&v.name, pick.clone());
                    }
                }
                Draw::Counts { categories } => {
                    let mut bag: Vec<&str> = categories
                        .iter()
                        .flat_map(|c| core::iter::repeat_n(c.value.as_str(), c.count as usize))
                        .collect();
                    for i in (1..bag.len()).rev() {
                        let j = rng.random_range(0..=i);
                        bag.swap(i, j);
                    }
                    for (p, value) in profiles.iter_mut().zip(bag) {
                        p.set(&v.name, value.to_string());
                    }
                }
            }
        }
        if !g.distributions.iter().any(|v| v.name == "occupation") && !g.occupations.is_empty() {
            for p in profiles.iter_mut() {
                p.occupation = g.occupations[rng.random_range(0..g.occupations.len())].clone();
            }
        }
        for (i, profile) in profiles.into_iter().enumerate() {
            let id = AgentId::new(format!("{}-{:02}", slug(&g.name), i + 1));
            let name = g.names.get(i).cloned().unwrap_or_else(|| format!("{} {}", g.name, i + 1));
            let mut vars: BTreeMap<&str, String> = BTreeMap::new();
            vars.insert("name", name.clone());
            vars.insert("group", g.name.clone());
            vars.insert("stance", if g.stance_label.is_empty() { g.name.clone() } else { g.stance_label.clone() });
            vars.insert("gender", profile.gender.clone());
            vars.insert("age_band", profile.age_band.clone());
            vars.insert("age", profile.age_band.clone());
            vars.insert("education", profile.education.clone());
            vars.insert("occupation", profile.occupation.clone());
            for (k, v) in &profile.extra {
                vars.insert(k.as_str(), v.clone());
            }
            let goals = Goals::new(fill(&g.long_term_goal_template, &vars), g.short_term_goal.clone());
            let awareness = fill(&g.self_awareness_template, &vars);
            let record =
                AgentRecord::new(id, name, g.name.clone(), profile.clone(), awareness, goals, wm_capacity, Coord::new(0, 0));
            let items = g.initial_items.iter().skip(i).step_by(n).cloned().collect();
            roster.push(SampledAgent { record, region: g.initial_region.clone(), items });
        }
    }
    install_relationships(&mut roster, &spec.relationships)?;
    Ok(roster)
}

fn resolve_end(roster: &[SampledAgent], end: &str) -> Result<Vec<usize>, PopulationError> {
    let by_group: Vec<usize> = (0..roster.len()).filter(|&i| roster[i].record.group == end).collect();
    if !by_group.is_empty() {
        return Ok(by_group);
    }
    roster
        .iter()
        .position(|a| a.record.id.as_str() == end || a.record.name == end)
        .map(|i| alloc::vec![i])
        .ok_or_else(|| PopulationError::UnknownEnd(end.to_string()))
}

/// Writes relationship seeds into object memory, as impressions held by
/// `from` of `to`.
pub fn install_relationships(roster: &mut [SampledAgent], seeds: &[RelationshipSeed]) -> Result<(), PopulationError> {
    for s in seeds {
        let from = resolve_end(roster, &s.from)?;
        let to = resolve_end(roster, &s.to)?;
        for &f in &from {
            for &t in &to {
                if f == t {
                    continue;
                }
                let (tid, tname) = (roster[t].record.id.to_string(), roster[t].record.name.clone());
                roster[f].record.om.set(tid, s.attitude.wording(&tname));
            }
        }
    }
    Ok(())
}

/// Largest-remainder percentages over `counts`, summing to 100 when the
/// total is positive. Ties go to the earlier category.
pub fn percentages(counts: &[u32]) -> Vec<u32> {
    let total: u32 = counts.iter().sum();
    if total == 0 {
        return alloc::vec![0; counts.len()];
    }
    let shares: Vec<f64> = counts.iter().map(|&c| f64::from(c) * 100.0 / f64::from(total)).collect();
    let mut out: Vec<u32> = shares.iter().map(|s| libm::floor(*s) as u32).collect();
    let short = 100 - out.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - libm::floor(shares[a]);
        let rb = shares[b] - libm::floor(shares[b]);
        rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(short as usize) {
        out[i] += 1;
    }
    out
}

/// Which groups and categories a census reports, in display order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusLayout {
    pub groups: Vec<String>,
    pub variables: Vec<(String, Vec<String>)>,
}

impl CensusLayout {
    pub fn from_spec(spec: &PopulationSpec) -> Self {
        let mut variables: Vec<(String, Vec<String>)> = Vec::new();
        for g in &spec.groups {
            for v in &g.distributions {
                let slot = match variables.iter().position(|(n, _)| *n == v.name) {
                    Some(i) => i,
                    None => {
                        variables.push((v.name.clone(), Vec::new()));
                        variables.len() - 1
                    }
                };
                for c in v.draw.categories() {
                    if !variables[slot].1.iter().any(|x| x == c) {
                        variables[slot].1.push(c.to_string());
                    }
                }
            }
        }
        Self { groups: spec.groups.iter().map(|g| g.name.clone()).collect(), variables }
    }

    pub fn with_group_order(mut self, order: &[&str]) -> Self {
        self.groups.sort_by_key(|g| order.iter().position(|o| o == g).unwrap_or(usize::MAX));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCell {
    pub count: u32,
    pub percent: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub variable: String,
    pub category: String,
    pub per_group: Vec<CensusCell>,
    pub total: CensusCell,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub groups: Vec<String>,
    pub rows: Vec<CensusRow>,
}

impl Census {
    pub fn row(&self, variable: &str, category: &str) -> Option<&CensusRow> {
        self.rows.iter().find(|r| r.variable == variable && r.category == category)
    }

    /// Plain-text table: `Variable | Category | g1 | g2 | ... | Total`.
    pub fn to_table(&self) -> String {
        let mut out = format!("Variable | Category | {} | Total\n", self.groups.join(" | "));
        for r in &self.rows {
            let cells: Vec<String> = r.per_group.iter().map(|c| format!("{} ({}%)", c.count, c.percent)).collect();
            out.push_str(&format!(
                "{} | {} | {} | {} ({}%)\n",
                r.variable,
                r.category,
                cells.join(" | "),
                r.total.count,
                r.total.percent
            ));
        }
        out
    }
}

/// Counts and percentages per variable per group.
pub fn roster_census(roster: &[AgentRecord], layout: &CensusLayout) -> Census {
    if roster.is_empty() {
        return Census::default();
    }
    let mut rows = Vec::new();
    for (variable, categories) in &layout.variables {
        let mut counts = alloc::vec![alloc::vec![0u32; layout.groups.len()]; categories.len()];
        for a in roster {
            let Some(g) = layout.groups.iter().position(|g| *g == a.group) else { continue };
            let Some(v) = a.profile.get(variable) else { continue };
            if let Some(c) = categories.iter().position(|c| c == v) {
                counts[c][g] += 1;
            }
        }
        let column_pcts: Vec<Vec<u32>> = (0..layout.groups.len())
            .map(|g| percentages(&counts.iter().map(|row| row[g]).collect::<Vec<_>>()))
            .collect();
        let totals: Vec<u32> = counts.iter().map(|row| row.iter().sum()).collect();
        let total_pcts = percentages(&totals);
        for (c, category) in categories.iter().enumerate() {
            rows.push(CensusRow {
                variable: variable.clone(),
                category: category.clone(),
                per_group: (0..layout.groups.len())
                    .map(|g| CensusCell { count: counts[c][g], percent: column_pcts[g][c] })
                    .collect(),
                total: CensusCell { count: totals[c], percent: total_pcts[c] },
            });
        }
    }
    Census { groups: layout.groups.clone(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn group(name: &str, size: u32, draw: Draw) -> GroupSpec {
        GroupSpec {
            name: name.into(),
            size,
            stance_label: String::new(),
            long_term_goal_template: "live well as a {occupation}".into(),
            self_awareness_template: default_profile(),
            short_term_goal: String::new(),
            initial_items: Vec::new(),
            initial_region: "Plaza".into(),
            distributions: vec![VariableSpec { name: "gender".into(), draw }],
            occupations: vec!["baker".into()],
            names: Vec::new(),
        }
    }

    fn probs(p: &[(&str, f64)]) -> Draw {
        Draw::Probabilities { categories: p.iter().map(|(v, p)| Weighted { value: (*v).into(), p: *p }).collect() }
    }

    #[test]
    fn percentages_follow_largest_remainder() {
        assert_eq!(percentages(&[8, 11, 8, 3]), vec![27, 36, 27, 10]);
        assert_eq!(percentages(&[7, 15, 8]), vec![23, 50, 27]);
        assert_eq!(percentages(&[14, 16]), vec![47, 53]);
        assert_eq!(percentages(&[0, 0]), vec![0, 0]);
    }

    #[test]
    fn degenerate_distribution() {
        let spec = PopulationSpec { groups: vec![group("A", 12, probs(&[("Male", 1.0), ("Female", 0.0)]))], relationships: vec![], ..Default::default() };
        let roster = sample_population(&spec, 3, 10).unwrap();
        assert_eq!(roster.len(), 12);
        assert!(roster.iter().all(|a| a.record.profile.gender == "Male"));
        assert_eq!(roster[0].record.id.as_str(), "a-01");
        assert_eq!(roster[0].record.goals.long_term(), "live well as a baker");
    }

    #[test]
    fn law_of_large_numbers() {
        let spec =
            PopulationSpec { groups: vec![group("A", 10_000, probs(&[("Male", 0.47), ("Female", 0.53)]))], relationships: vec![], ..Default::default() };
        let roster = sample_population(&spec, 42, 10).unwrap();
        let male = roster.iter().filter(|a| a.record.profile.gender == "Male").count() as f64 / 10_000.0;
        assert!((male - 0.47).abs() < 0.02, "{male}");
        assert_eq!(sample_population(&spec, 42, 10).unwrap(), roster);
    }

    #[test]
    fn bad_specs() {
        let spec = PopulationSpec { groups: vec![group("A", 5, probs(&[("Male", 0.5), ("Female", 0.4)]))], relationships: vec![], ..Default::default() };
        assert!(matches!(sample_population(&spec, 1, 10), Err(PopulationError::BadDistribution { .. })));
        let spec = PopulationSpec { groups: vec![group("A", 0, probs(&[("Male", 1.0)]))], relationships: vec![], ..Default::default() };
        assert_eq!(sample_population(&spec, 1, 10), Err(PopulationError::EmptyGroup("A".into())));
        let counts = Draw::Counts { categories: vec![Counted { value: "Male".into(), count: 3 }] };
        let spec = PopulationSpec { groups: vec![group("A", 4, counts)], relationships: vec![], ..Default::default() };
        assert!(matches!(sample_population(&spec, 1, 10), Err(PopulationError::CountMismatch { .. })));
    }

    #[test]
    fn relationships_become_impressions() {
        let spec = PopulationSpec {
            groups: vec![group("A", 2, probs(&[("Male", 1.0)])), group("B", 1, probs(&[("Female", 1.0)]))],
            relationships: vec![
                RelationshipSeed { from: "a-01".into(), to: "b-01".into(), attitude: Attitude::Negative },
                RelationshipSeed { from: "A".into(), to: "A".into(), attitude: Attitude::Positive },
            ],
            ..Default::default()
        };
        let roster = sample_population(&spec, 1, 10).unwrap();
        assert!(roster[0].record.om.get("b-01").unwrap().contains("do not trust"));
        assert!(roster[0].record.om.get("a-02").unwrap().contains("like"));
        assert!(roster[0].record.om.get("a-01").is_none());
        let bad = PopulationSpec {
            groups: spec.groups.clone(),
            relationships: vec![RelationshipSeed { from: "a-01".into(), to: "a-01".into(), attitude: Attitude::Neutral }],
            ..Default::default()
        };
        assert_eq!(sample_population(&bad, 1, 10), Err(PopulationError::SelfEdge("a-01".into())));
    }

    #[test]
    fn empty_roster_census() {
        assert_eq!(roster_census(&[], &CensusLayout::default()), Census::default());
    }
}
