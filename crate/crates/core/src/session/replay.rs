//! Re-execution of a run log against its scenario.
//!
//! Recorded submissions are re-submitted in receipt order and resolved
//! again; after every entry the engine digest is compared with the one the
//! log recorded. Impressions come from the log, embeddings from the same
//! hashing embedder the offline backends use.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ControlHandle, Session, SessionError};
use crate::agent::Lexicon;
use crate::analytics::RoundSample;
use crate::decision::ReplayBackend;
use crate::engine::runlog::{ControlRecord, LogEntry, RunLog};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceKind {
    /// The hash chain is broken at this line.
    Chain { error: String },
    /// Re-execution produced a different state.
    Digest { expected: String, actual: String },
    /// The entry could not be re-executed at all.
    Rejected { reason: String },
}

/// First log line at which the replay disagrees with the recording.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub seq: u64,
    /// Round stamp of the entry: `r`, `r.k` or `genesis`.
    pub stamp: String,
    /// Round the entry belongs to; `None` for genesis.
    pub round: Option<u64>,
    pub kind: DivergenceKind,
}

impl core::fmt::Display for Divergence {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "line {} (round {}): ", self.seq, self.stamp)?;
        match &self.kind {
            DivergenceKind::Chain { error } => write!(f, "{error}"),
            DivergenceKind::Digest { expected, actual } => write!(f, "state digest {actual}, recorded {expected}"),
            DivergenceKind::Rejected { reason } => write!(f, "{reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub final_digest: String,
    /// Log lines re-executed, genesis included.
    pub entries: usize,
    pub divergence: Option<Divergence>,
}

fn entry_round(entry: &LogEntry) -> Option<u64> {
    match entry {
        LogEntry::Genesis(_) => None,
        LogEntry::Round(r) => Some(r.round),
        LogEntry::FreeAction { record, .. } => Some(record.round),
        LogEntry::Control { round, .. } => Some(*round),
    }
}

fn reexecute(s: &mut Session, entry: &LogEntry, backend: &mut ReplayBackend) -> Result<(), String> {
    match entry {
        LogEntry::Genesis(_) => return Err("a second genesis entry".into()),
        LogEntry::Round(r) => {
            if r.round != s.round_index() {
                return Err(format!("round {} recorded while the engine is at round {}", r.round, s.round_index()));
            }
            let mut subs: alloc::vec::Vec<_> = r.submissions.iter().collect();
            subs.sort_by_key(|x| x.receipt_seq);
            for sub in subs {
                s.engine.submit_action(sub.draft()).map_err(|e| format!("submission from `{}`: {e}", sub.agent))?;
            }
            let report = s.engine.resolve_round(backend);
            s.samples.push(RoundSample::take(report.round_index, s.engine.map(), s.engine.state()));
        }
        LogEntry::FreeAction { record, .. } => {
            s.engine.free_action(record.submission.draft(), backend).map_err(|e| format!("free action: {e}"))?;
        }
        LogEntry::Control { record, .. } => match record {
            ControlRecord::Spawn { record } => {
                s.engine.insert_agent(record.clone()).map_err(|e| format!("spawn: {e}"))?;
            }
            ControlRecord::Attach { agent, human } => {
                s.handles.insert(agent.clone(), ControlHandle { human: human.clone(), agent: agent.clone(), free_action: false });
            }
            ControlRecord::Detach { agent } => {
                s.handles.remove(agent);
            }
            ControlRecord::SetFreeAction { agent, on } => {
                if let Some(h) = s.handles.get_mut(agent) {
                    h.free_action = *on;
                }
            }
            ControlRecord::Inject { event, .. } => {
                s.engine.inject_event(event.clone());
            }
        },
    }
    Ok(())
}

/// Replays `log` and returns the rebuilt session with a report.
pub(super) fn rebuild(
    scenario: Arc<super::Scenario>,
    lexicon: Arc<Lexicon>,
    log: &RunLog,
) -> Result<(Session, ReplayReport), SessionError> {
    let Some(genesis) = log.genesis() else {
        let seed = scenario.config.seed;
        let s = Session::create("replay", scenario, lexicon, seed, "replay")?;
        let report = ReplayReport { final_digest: s.state_digest(), entries: 0, divergence: None };
        return Ok((s, report));
    };
    if genesis.scenario_digest != scenario.digest() {
        return Err(SessionError::ScenarioMismatch);
    }
    let mut s = Session::create("replay", scenario, lexicon, genesis.seed, &genesis.backend)?;
    let mut backend = ReplayBackend::from_log(log, genesis.seed, genesis.config.embed_dim);
    let chain = log.verify_chain().err().map(|e| {
        let line = log.lines().get(e.seq() as usize);
        Divergence {
            seq: e.seq(),
            stamp: line.map(|l| l.entry.stamp()).unwrap_or_default(),
            round: line.and_then(|l| entry_round(&l.entry)),
            kind: DivergenceKind::Chain { error: format!("{e}") },
        }
    });
    let mut executed = None;
    let mut entries = 0;
    for line in log.lines() {
        entries += 1;
        let e = &line.entry;
        if line.seq > 0 {
            if let Err(reason) = reexecute(&mut s, e, &mut backend) {
                executed = Some((line.seq, e, DivergenceKind::Rejected { reason }));
                break;
            }
        }
        let actual = s.state_digest();
        if actual != e.state_digest() {
            executed = Some((line.seq, e, DivergenceKind::Digest { expected: e.state_digest().into(), actual }));
            break;
        }
    }
    let executed = executed.map(|(seq, e, kind)| Divergence { seq, stamp: e.stamp(), round: entry_round(e), kind });
    let divergence = match (chain, executed) {
        (Some(a), Some(b)) => Some(if a.seq <= b.seq { a } else { b }),
        (a, b) => a.or(b),
    };
    let report = ReplayReport { final_digest: s.state_digest(), entries, divergence };
    Ok((s, report))
}

/// Replays `log` and reports the final digest and the first divergence.
pub fn replay(scenario: Arc<super::Scenario>, lexicon: Arc<Lexicon>, log: &RunLog) -> Result<ReplayReport, SessionError> {
    rebuild(scenario, lexicon, log).map(|(_, r)| r)
}
