//! CSV exports of a session. Every table is UTF-8 with a header row and
//! `round` as its first column; the same session always exports to the
//! same bytes.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use gridsoc_core::analytics::{engagement_count, executed_chats, AnalyticsError};
use gridsoc_core::digest::{hex_digest_of, sha256, to_hex};
use gridsoc_core::engine::runlog::{ControlRecord, LogEntry};
use gridsoc_core::events::{Cause, FiredEvent};
use gridsoc_core::session::{spawned_agents, Session};
use gridsoc_core::AgentId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedFile {
    pub name: String,
    /// Data rows, header excluded.
    pub rows: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub session: String,
    pub scenario: String,
    pub scenario_digest: String,
    pub seed: u64,
    pub backend: String,
    pub config_digest: String,
    pub round_index: u64,
    pub state_digest: String,
    pub log_head: String,
    pub log_lines: usize,
    pub files: Vec<ExportedFile>,
}

impl ExportManifest {
    pub fn file(&self, name: &str) -> Option<&ExportedFile> {
        self.files.iter().find(|f| f.name == name)
    }
}

pub const POSITIONS: &str = "positions.csv";
pub const EMOTIONS: &str = "emotions.csv";
pub const CHATS: &str = "chats.csv";
pub const QUESTIONNAIRE: &str = "questionnaire.csv";
pub const TRUST: &str = "trust.csv";
pub const INTERVIEWS: &str = "interviews.csv";
pub const EVENTS: &str = "events.csv";
pub const AMBIENT_MOOD: &str = "ambient_mood.csv";
pub const HEATMAP: &str = "heatmap.csv";
pub const ENGAGEMENT: &str = "engagement.csv";
pub const MANIFEST: &str = "manifest.json";

/// A table built in memory before it is written.
pub struct Table {
    pub name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn positions(s: &Session) -> Table {
    let mut t = Table::new(POSITIONS, &["round", "agent", "x", "y", "region"]);
    for sample in s.samples() {
        for a in &sample.agents {
            t.push(vec![
                sample.round.to_string(),
                a.agent.to_string(),
                a.position.x.to_string(),
                a.position.y.to_string(),
                opt(a.region.as_deref()),
            ]);
        }
    }
    t
}

fn emotions(s: &Session) -> Table {
    let mut t = Table::new(EMOTIONS, &["round", "agent", "v", "a", "d", "overall"]);
    for sample in s.samples() {
        for a in &sample.agents {
            t.push(vec![
                sample.round.to_string(),
                a.agent.to_string(),
                num(a.emotion.valence),
                num(a.emotion.arousal),
                num(a.emotion.dominance),
                num(a.overall),
            ]);
        }
    }
    t
}

fn chats(s: &Session) -> Table {
    let mut t = Table::new(CHATS, &["round", "receipt_seq", "speaker", "target", "listeners", "utterance"]);
    for (round, c) in executed_chats(s.log()) {
        for target in &c.targets {
            t.push(vec![
                round.to_string(),
                c.receipt_seq.to_string(),
                c.speaker.to_string(),
                target.to_string(),
                c.listeners.len().to_string(),
                c.utterance.clone(),
            ]);
        }
    }
    t
}

fn questionnaire(s: &Session) -> Table {
    let mut t = Table::new(QUESTIONNAIRE, &["round", "agent", "item", "dimension", "value", "asked"]);
    let items = &s.scenario().questionnaire;
    for r in &s.measurements().questionnaire {
        let dimension = items.iter().find(|i| i.id == r.item).map(|i| i.dimension.as_str()).unwrap_or("");
        t.push(vec![
            r.round.to_string(),
            r.agent.to_string(),
            r.item.clone(),
            dimension.into(),
            opt(r.value),
            r.answers.len().to_string(),
        ]);
    }
    t
}

fn trust(s: &Session) -> Table {
    let mut t = Table::new(TRUST, &["round", "agent", "target", "value"]);
    for r in &s.measurements().trust {
        t.push(vec![r.round.to_string(), r.agent.to_string(), r.target.to_string(), opt(r.value)]);
    }
    t
}

fn interviews(s: &Session) -> Table {
    let mut t = Table::new(INTERVIEWS, &["round", "agent", "question", "answer", "error"]);
    for r in &s.measurements().interviews {
        t.push(vec![
            r.round.to_string(),
            r.agent.to_string(),
            r.question.clone(),
            r.answer.clone(),
            opt(r.error.as_deref()),
        ]);
    }
    t
}

fn cause_columns(c: &Cause) -> (&'static str, String) {
    match c {
        Cause::Schedule => ("schedule", String::new()),
        Cause::Existence { object } => ("existence", object.to_string()),
        Cause::Action { receipt_seq, agent } => ("action", format!("{agent}#{receipt_seq}")),
        Cause::Chain { parent } => ("chain", parent.clone()),
        Cause::Injected => ("injected", String::new()),
    }
}

fn events(s: &Session) -> Table {
    let mut t = Table::new(EVENTS, &["round", "stamp", "event", "cause", "detail", "misfired"]);
    for e in s.log().entries() {
        let fired: &[FiredEvent] = match e {
            LogEntry::Round(r) => &r.fired_events,
            LogEntry::Control { record: ControlRecord::Inject { fired, .. }, .. } => fired,
            _ => &[],
        };
        for f in fired {
            let (cause, detail) = cause_columns(&f.cause);
            t.push(vec![
                f.round.to_string(),
                e.stamp(),
                f.event.clone(),
                cause.into(),
                detail,
                opt(f.misfired.as_deref()),
            ]);
        }
    }
    t
}

fn ambient_mood(s: &Session) -> Table {
    let mut t = Table::new(AMBIENT_MOOD, &["round", "region", "agents", "mood"]);
    for sample in s.samples() {
        for region in &s.map().regions {
            let n = sample.agents.iter().filter(|a| a.region.as_deref() == Some(region.name.as_str())).count();
            t.push(vec![sample.round.to_string(), region.name.clone(), n.to_string(), opt(sample.ambient_mood(&region.name).map(num))]);
        }
    }
    t
}

/// Chats per round by initiator group and target group, every pair listed.
fn heatmap(s: &Session) -> Result<Table, ExportError> {
    let mut t = Table::new(HEATMAP, &["round", "from_group", "to_group", "count"]);
    let labels = s.group_labels();
    let group_of = s.group_of();
    let k = labels.len();
    let index = |a: &AgentId| -> Result<usize, AnalyticsError> {
        let g = group_of.get(a).ok_or_else(|| AnalyticsError::Ungrouped(a.clone()))?;
        labels.iter().position(|l| l == g).ok_or_else(|| AnalyticsError::UnknownGroup(g.clone()))
    };
    let mut per_round = vec![vec![0u64; k * k]; s.round_index() as usize];
    for (round, c) in executed_chats(s.log()) {
        let Some(cells) = per_round.get_mut(round as usize) else { continue };
        let i = index(&c.speaker)?;
        for target in &c.targets {
            cells[i * k + index(target)?] += 1;
        }
    }
    for (round, cells) in per_round.iter().enumerate() {
        for (i, from) in labels.iter().enumerate() {
            for (j, to) in labels.iter().enumerate() {
                t.push(vec![round.to_string(), from.clone(), to.clone(), cells[i * k + j].to_string()]);
            }
        }
    }
    Ok(t)
}

/// Agents spawned into the session or ever controlled by a human.
pub fn researchers(s: &Session) -> Vec<AgentId> {
    let mut out: BTreeSet<AgentId> = spawned_agents(s.log()).into_iter().collect();
    for e in s.log().entries() {
        if let LogEntry::Control { record: ControlRecord::Attach { agent, .. }, .. } = e {
            out.insert(agent.clone());
        }
    }
    out.into_iter().collect()
}

fn engagement(s: &Session) -> Result<Table, ExportError> {
    let mut t = Table::new(ENGAGEMENT, &["round", "researcher", "agents"]);
    for r in researchers(s) {
        let series = engagement_count(s.log(), &r)?;
        for (round, n) in series.iter().enumerate() {
            t.push(vec![round.to_string(), r.to_string(), n.to_string()]);
        }
    }
    Ok(t)
}

/// All tables of a session, in manifest order.
pub fn tables(s: &Session) -> Result<Vec<Table>, ExportError> {
    Ok(vec![
        positions(s),
        emotions(s),
        chats(s),
        questionnaire(s),
        trust(s),
        interviews(s),
        events(s),
        ambient_mood(s),
        heatmap(s)?,
        engagement(s)?,
    ])
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ExportError> {
    fs::write(path, bytes).map_err(|source| ExportError::Io { path: path.into(), source })
}

/// Writes every table plus `manifest.json` into `dir`, creating it.
pub fn export_run(s: &Session, dir: &Path) -> Result<ExportManifest, ExportError> {
    fs::create_dir_all(dir).map_err(|source| ExportError::Io { path: dir.into(), source })?;
    let genesis = s.log().genesis();
    let mut files = Vec::new();
    for t in tables(s)? {
        let bytes = t.to_bytes()?;
        write(&dir.join(t.name), &bytes)?;
        files.push(ExportedFile { name: t.name.into(), rows: t.rows().len(), sha256: to_hex(&sha256(&bytes)) });
    }
    let manifest = ExportManifest {
        session: s.id().into(),
        scenario: s.scenario().name.clone(),
        scenario_digest: s.scenario().digest(),
        seed: s.seed(),
        backend: genesis.map(|g| g.backend.clone()).unwrap_or_default(),
        config_digest: hex_digest_of(s.engine().config()),
        round_index: s.round_index(),
        state_digest: s.state_digest(),
        log_head: s.log().head().into(),
        log_lines: s.log().len(),
        files,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write(&dir.join(MANIFEST), json.as_bytes())?;
    Ok(manifest)
}
