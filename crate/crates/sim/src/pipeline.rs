//! End-to-end runs of the three shipped studies.
//!
//! Each study runs its scenario(s) on one backend, takes the measurements
//! the study calls for, optionally exports every run, and computes the
//! inferential statistics. Scripted researcher agents speak from fixed
//! message pools so runs stay reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use gridsoc_core::analytics::{agent_dimension_means, AnalyticsError};
use gridsoc_core::decision::Backend;
use gridsoc_core::population::{roster_census, Census, CensusLayout};
use gridsoc_core::session::{AttachTarget, NewResident, Scenario, Session, SessionError};
use gridsoc_core::AgentId;
use gridsoc_stats::{cohens_d, paired_t_test, tukey_hsd, two_way_anova, StatResult, StatsError, BOOTSTRAP_N};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::backend::{BackendSetupError, BackendSpec};
use crate::export::{export_run, tables, ExportError, ExportManifest};
use crate::load::{sample_lexicon, shipped_scenario, write_runlog, LoadError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Backend(#[from] BackendSetupError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub seed: u64,
    pub backend: BackendSpec,
    /// Exports go under this directory when set.
    pub out: Option<PathBuf>,
}

impl PipelineOptions {
    pub fn mock(seed: u64) -> Self {
        Self { seed, backend: BackendSpec::mock(), out: None }
    }
}

/// One statistic, or why it could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedStat {
    pub test: String,
    pub label: String,
    pub result: Option<StatResult>,
    pub error: Option<String>,
}

impl NamedStat {
    fn from(test: &str, label: &str, r: Result<StatResult, StatsError>) -> Self {
        let (result, error) = match r {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self { test: test.into(), label: label.into(), result, error }
    }
}

pub struct RunOutput {
    pub label: String,
    pub session: Session,
    pub manifest: Option<ExportManifest>,
}

impl RunOutput {
    /// Row count of an exported table, computed in memory.
    pub fn rows(&self, table: &str) -> Result<usize, ExportError> {
        Ok(tables(&self.session)?.iter().find(|t| t.name == table).map_or(0, |t| t.rows().len()))
    }
}

pub struct StudyReport {
    pub study: String,
    pub runs: Vec<RunOutput>,
    pub stats: Vec<NamedStat>,
    pub census: Option<Census>,
    pub summary: Value,
    pub elapsed_secs: f64,
}

impl StudyReport {
    pub fn run(&self, label: &str) -> Option<&RunOutput> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn stat(&self, test: &str, label: &str) -> Option<&NamedStat> {
        self.stats.iter().find(|s| s.test == test && s.label == label)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io { path: parent.into(), source })?;
    }
    fs::write(path, bytes).map_err(|source| PipelineError::Io { path: path.into(), source })
}

fn start(
    label: &str,
    scenario: Scenario,
    opts: &PipelineOptions,
) -> Result<(Session, Box<dyn Backend + Send>), PipelineError> {
    let backend = opts.backend.build(opts.seed, scenario.config.embed_dim)?;
    let s = Session::create(label, Arc::new(scenario), Arc::new(sample_lexicon()), opts.seed, opts.backend.kind.as_str())?;
    Ok((s, backend))
}

fn finish(study: &str, label: &str, session: Session, opts: &PipelineOptions) -> Result<RunOutput, PipelineError> {
    let manifest = match &opts.out {
        Some(out) => {
            let dir = out.join(study).join(label);
            let m = export_run(&session, &dir)?;
            write_runlog(&dir.join("runlog.jsonl"), session.log())?;
            write(&dir.join("scenario.json"), &serde_json::to_vec_pretty(session.scenario()).expect("scenario serializes"))?;
            Some(m)
        }
        None => None,
    };
    Ok(RunOutput { label: label.into(), session, manifest })
}

fn write_report(study: &str, report: &StudyReport, opts: &PipelineOptions) -> Result<(), PipelineError> {
    let Some(out) = &opts.out else { return Ok(()) };
    let doc = json!({
        "study": study,
        "seed": opts.seed,
        "backend": opts.backend.kind.as_str(),
        "stats": report.stats,
        "summary": report.summary,
    });
    write(&out.join(study).join("stats.json"), &serde_json::to_vec_pretty(&doc).expect("stats serialize"))
}

/// Submits a move to `region` plus, when someone is in view, a chat with
/// one of them. Anything the grammar rejects degrades to the bare move and
/// then to idling.
fn researcher_turn(s: &mut Session, agent: &AgentId, region: &str, message: &str) -> Result<(), SessionError> {
    let others: Vec<AgentId> = s
        .perception(agent)
        .map(|p| p.visible_agents.into_iter().map(|a| a.id).collect())
        .unwrap_or_default();
    let mut attempts = Vec::new();
    if !others.is_empty() {
        let who = &others[s.round_index() as usize % others.len()];
        attempts.push(format!("go to {region}\nchat with {who}: {message}"));
    }
    attempts.push(format!("go to {region}"));
    for text in attempts {
        if let Ok(draft) = s.draft_from_text(agent, &text) {
            if s.submit(draft).is_ok() {
                return Ok(());
            }
        }
    }
    log::debug!("researcher `{agent}` idles in round {}", s.round_index());
    Ok(())
}

pub const STUDY1_ENVIRONMENTS: [(&str, &str); 2] = [("low", "study1_low"), ("high", "study1_high")];
pub const STUDY1_DIMENSIONS: [&str; 3] = ["distrust", "exploitation", "indifference"];
const STUDY1_ROUNDS: u64 = 50;
const STUDY1_QUESTION: &str = "How has the time in isolation changed the way you see your neighbours?";

/// Same roster in a low-greenery and a high-greenery environment; paired
/// comparisons of the fragmentation dimensions.
pub fn study1(opts: &PipelineOptions) -> Result<StudyReport, PipelineError> {
    let clock = Instant::now();
    let mut runs = Vec::new();
    for (label, name) in STUDY1_ENVIRONMENTS {
        let scenario = shipped_scenario(name)?;
        let rounds = if scenario.rounds > 0 { scenario.rounds } else { STUDY1_ROUNDS };
        let (mut s, mut backend) = start(label, scenario, opts)?;
        s.run_until(rounds, backend.as_mut());
        s.questionnaire(None, None, backend.as_mut())?;
        for agent in s.agent_ids() {
            s.interview(&agent, STUDY1_QUESTION, backend.as_mut())?;
        }
        runs.push(finish("study1", label, s, opts)?);
    }
    let mut stats = Vec::new();
    let mut means = BTreeMap::new();
    for dim in STUDY1_DIMENSIONS {
        let per_env: Vec<BTreeMap<AgentId, f64>> = runs
            .iter()
            .map(|r| {
                let s = &r.session;
                agent_dimension_means(&s.measurements().questionnaire, &s.scenario().questionnaire, dim)
            })
            .collect();
        let (low, high) = (&per_env[0], &per_env[1]);
        let paired: Vec<(f64, f64)> = low.iter().filter_map(|(a, l)| high.get(a).map(|h| (*h, *l))).collect();
        let (h, l): (Vec<f64>, Vec<f64>) = paired.into_iter().unzip();
        means.insert(dim, json!({ "low": mean(&l), "high": mean(&h), "pairs": h.len() }));
        stats.push(NamedStat::from("paired_t", dim, paired_t_test(&h, &l)));
        stats.push(NamedStat::from("cohens_d", dim, cohens_d(&h, &l, 0.95, BOOTSTRAP_N, opts.seed)));
    }
    let ambient: BTreeMap<&str, Value> =
        runs.iter().map(|r| (r.label.as_str(), json!(ambient_means(&r.session)))).collect();
    let summary = json!({ "dimension_means": means, "ambient_mood_mean": ambient });
    let report =
        StudyReport { study: "study1".into(), runs, stats, census: None, summary, elapsed_secs: clock.elapsed().as_secs_f64() };
    write_report("study1", &report, opts)?;
    Ok(report)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per region, the mean of its ambient mood over rounds where it is defined.
fn ambient_means(s: &Session) -> BTreeMap<String, Option<f64>> {
    s.map()
        .regions
        .iter()
        .map(|r| {
            let series: Vec<f64> = s.samples().iter().filter_map(|x| x.ambient_mood(&r.name)).collect();
            (r.name.clone(), mean(&series))
        })
        .collect()
}

pub const STANCES: [&str; 2] = ["environmental", "economic"];
pub const STRATEGIES: [&str; 2] = ["rational", "emotional"];
const STUDY2_ROUNDS: u64 = 21;
const STUDY2_TOUR: [&str; 3] = ["Community Center", "Neighborhood Park", "Residential Street"];

fn study2_pool(stance: &str, strategy: &str) -> [&'static str; 3] {
    match (stance, strategy) {
        ("environmental", "rational") => [
            "Incinerators of this size emit dioxins and fine particles; nearby towns saw asthma visits rise.",
            "Recycling and composting could cut our waste by half for less money than the plant.",
            "The site sits upwind of the park and two schools, so the exposure would land on children.",
        ],
        ("environmental", "emotional") => [
            "Imagine our kids breathing that smoke on the playground every single day. I could not bear it.",
            "I moved here for clean air and quiet mornings. Losing that would break my heart.",
            "This park is where we grieve, celebrate and heal together. Please do not let them poison it.",
        ],
        ("economic", "rational") => [
            "The plant would bring about two hundred jobs and lower waste fees for every household here.",
            "Modern filters keep emissions under the legal limits, and the tax revenue funds our schools.",
            "Shipping our trash out costs the town more each year; local processing stops that drain.",
        ],
        _ => [
            "I have watched neighbours lose their jobs and their pride. This plant could give families hope again.",
            "My father worked at a plant like this and it put me through school. I am grateful every day.",
            "Our young people keep leaving. I want them to have a future right here at home.",
        ],
    }
}

pub fn study2_label(stance: &str, strategy: &str) -> String {
    format!("{stance}_{strategy}")
}

/// The census layout used for the demographic table.
pub fn study2_layout(scenario: &Scenario) -> CensusLayout {
    CensusLayout::from_spec(&scenario.population)
}

/// The Study-2 roster census straight from the scenario, without running it.
pub fn study2_census(seed: u64) -> Result<Census, PipelineError> {
    let scenario = shipped_scenario("study2_incinerator")?;
    let layout = study2_layout(&scenario);
    let s = Session::create("census", Arc::new(scenario), Arc::new(sample_lexicon()), seed, "mock")?;
    let roster: Vec<_> = s.engine().state().agents.values().cloned().collect();
    Ok(roster_census(&roster, &layout))
}

/// A researcher joins as a new resident and argues one side with one kind of
/// appeal; residents then rate their trust in the researcher (1-10).
/// Stance by strategy, two-way between-run design.
pub fn study2(opts: &PipelineOptions) -> Result<StudyReport, PipelineError> {
    let clock = Instant::now();
    let mut runs = Vec::new();
    let mut values = Vec::new();
    let mut factor_stance = Vec::new();
    let mut factor_strategy = Vec::new();
    let mut by_condition: Vec<(String, Vec<f64>)> = Vec::new();
    let mut census = None;
    let mut roster_sizes = BTreeMap::new();
    for stance in STANCES {
        for strategy in STRATEGIES {
            let label = study2_label(stance, strategy);
            let scenario = shipped_scenario("study2_incinerator")?;
            let rounds = if scenario.rounds > 0 { scenario.rounds } else { STUDY2_ROUNDS };
            let layout = study2_layout(&scenario);
            let (mut s, mut backend) = start(&label, scenario, opts)?;
            if census.is_none() {
                let roster: Vec<_> = s.engine().state().agents.values().cloned().collect();
                census = Some(roster_census(&roster, &layout));
            }
            let residents = s.agent_ids();
            let researcher = NewResident {
                name: "Alex Rivera".into(),
                group: "Researcher".into(),
                self_awareness: format!("I just moved into the neighbourhood and I hold a {stance} view on the plant."),
                long_term_goal: format!("Win neighbours over to the {stance} side of the incinerator debate."),
                short_term_goal: "meet the neighbours".into(),
            };
            let handle = s.attach("researcher", &AttachTarget::NewResident(researcher))?;
            roster_sizes.insert(label.clone(), s.agent_ids().len());
            let pool = study2_pool(stance, strategy);
            while s.round_index() < rounds {
                let r = s.round_index() as usize;
                let region = STUDY2_TOUR[(r * STUDY2_TOUR.len()) / rounds as usize];
                researcher_turn(&mut s, &handle.agent, region, pool[r % pool.len()])?;
                s.step(backend.as_mut());
            }
            let ratings = s.trust(Some(&residents), &handle.agent, backend.as_mut())?;
            s.questionnaire(Some(&residents), None, backend.as_mut())?;
            let vals: Vec<f64> = ratings.iter().filter_map(|t| t.value).map(|v| v as f64).collect();
            for v in &vals {
                values.push(*v);
                factor_stance.push(stance);
                factor_strategy.push(strategy);
            }
            by_condition.push((label.clone(), vals));
            runs.push(finish("study2", &label, s, opts)?);
        }
    }
    let mut stats = Vec::new();
    match two_way_anova(&values, &factor_stance, &factor_strategy) {
        Ok(table) => stats.extend(table.results().into_iter().map(|r| {
            let label = match r.label.as_str() {
                "A" => "stance",
                "B" => "strategy",
                _ => "stance:strategy",
            };
            NamedStat { test: "anova2way".into(), label: label.into(), result: Some(r), error: None }
        })),
        Err(e) => stats.push(NamedStat::from("anova2way", "trust", Err(e))),
    }
    match tukey_hsd(&by_condition, 0.05) {
        Ok(pairs) => stats.extend(pairs.into_iter().map(|r| NamedStat {
            test: "tukey_hsd".into(),
            label: r.label.clone(),
            result: Some(r),
            error: None,
        })),
        Err(e) => stats.push(NamedStat::from("tukey_hsd", "trust", Err(e))),
    }
    let pick = |want: &dyn Fn(&str) -> bool| -> Vec<f64> {
        by_condition.iter().filter(|(l, _)| want(l)).flat_map(|(_, v)| v.iter().copied()).collect()
    };
    let rational = pick(&|l| l.ends_with("_rational"));
    let emotional = pick(&|l| l.ends_with("_emotional"));
    let env = pick(&|l| l.starts_with("environmental_"));
    let econ = pick(&|l| l.starts_with("economic_"));
    stats.push(NamedStat::from("cohens_d", "rational-emotional", cohens_d(&rational, &emotional, 0.95, BOOTSTRAP_N, opts.seed)));
    stats.push(NamedStat::from("cohens_d", "environmental-economic", cohens_d(&env, &econ, 0.95, BOOTSTRAP_N, opts.seed)));
    let trust_means: BTreeMap<&str, Value> =
        by_condition.iter().map(|(l, v)| (l.as_str(), json!({ "mean": mean(v), "n": v.len() }))).collect();
    let summary = json!({
        "trust": trust_means,
        "roster_after_spawn": roster_sizes,
        "census_table": census.as_ref().map(Census::to_table),
    });
    let report = StudyReport {
        study: "study2".into(),
        runs,
        stats,
        census,
        summary,
        elapsed_secs: clock.elapsed().as_secs_f64(),
    };
    if let (Some(out), Some(c)) = (&opts.out, &report.census) {
        write(&out.join("study2").join("census.txt"), c.to_table().as_bytes())?;
        write(&out.join("study2").join("census.json"), &serde_json::to_vec_pretty(c).expect("census serializes"))?;
    }
    write_report("study2", &report, opts)?;
    Ok(report)
}

pub const STUDY3_PHASES: [u64; 3] = [25, 50, 75];
const STUDY3_SLOT: &str = "Temporary Worker";
const STUDY3_TOUR: [&str; 3] = ["Bar Area", "Seating Area", "Reading Area"];
const STUDY3_LINES: [&str; 4] = [
    "Hi, I just started here this week. How is your day going?",
    "Can I get you anything else? The pastries just came out.",
    "I am still learning the machine, so thanks for your patience.",
    "What brings you to the cafe today?",
];
const STUDY3_QUESTION: &str = "How do you feel about the people in this cafe right now?";

/// A researcher works a shift as a temporary worker; the cafe is measured
/// at each phase boundary.
pub fn study3(opts: &PipelineOptions) -> Result<StudyReport, PipelineError> {
    let clock = Instant::now();
    let scenario = shipped_scenario("study3_cafe")?;
    let phases = if scenario.phases.is_empty() { STUDY3_PHASES.to_vec() } else { scenario.phases.clone() };
    let (mut s, mut backend) = start("cafe", scenario, opts)?;
    let residents = s.agent_ids();
    let handle = s.attach("researcher", &AttachTarget::Slot { group: STUDY3_SLOT.into() })?;
    let mut phase_summaries = Vec::new();
    for &phase in &phases {
        while s.round_index() < phase {
            let r = s.round_index() as usize;
            let region = STUDY3_TOUR[(r / 10) % STUDY3_TOUR.len()];
            researcher_turn(&mut s, &handle.agent, region, STUDY3_LINES[r % STUDY3_LINES.len()])?;
            s.step(backend.as_mut());
        }
        let responses = s.questionnaire(Some(&residents), None, backend.as_mut())?;
        for agent in &residents {
            s.interview(agent, STUDY3_QUESTION, backend.as_mut())?;
        }
        let by_item: BTreeMap<String, Option<f64>> = s
            .scenario()
            .questionnaire
            .iter()
            .map(|item| {
                let v: Vec<f64> =
                    responses.iter().filter(|r| r.item == item.id).filter_map(|r| r.value).map(|v| v as f64).collect();
                (item.id.clone(), mean(&v))
            })
            .collect();
        let moods: BTreeMap<String, Option<f64>> =
            s.map().regions.iter().map(|r| (r.name.clone(), s.ambient_mood(&r.name).ok().flatten())).collect();
        phase_summaries.push(json!({ "round": phase, "item_means": by_item, "ambient_mood": moods }));
    }
    let engagement = gridsoc_core::analytics::engagement_count(s.log(), &handle.agent)?;
    let summary = json!({
        "researcher": handle.agent,
        "phases": phase_summaries,
        "engagement_total": engagement.iter().sum::<u64>(),
    });
    let run = finish("study3", "cafe", s, opts)?;
    let report = StudyReport {
        study: "study3".into(),
        runs: vec![run],
        stats: Vec::new(),
        census: None,
        summary,
        elapsed_secs: clock.elapsed().as_secs_f64(),
    };
    write_report("study3", &report, opts)?;
    Ok(report)
}

pub fn run_all(opts: &PipelineOptions) -> Result<Vec<StudyReport>, PipelineError> {
    Ok(vec![study1(opts)?, study2(opts)?, study3(opts)?])
}
