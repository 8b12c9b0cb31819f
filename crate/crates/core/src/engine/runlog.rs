//! Append-only run log with a hash chain.
//!
//! Every line carries `digest = sha256(prev_digest_hex || canonical_json(entry))`,
//! so editing any entry breaks the chain from that line on.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    ActionSubmission, ChatDelivery, EngineConfig, FreeActionRecord, RoundReport, StateDelta, SubmissionOutcome,
};
use crate::agent::AgentRecord;
use crate::digest;
use crate::events::{EventSpec, FiredEvent};
use crate::geom::Coord;
use crate::ids::AgentId;

/// Digest that precedes the first entry.
pub const ZERO_DIGEST: &str = "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genesis {
    pub scenario: String,
    pub scenario_digest: String,
    pub seed: u64,
    pub backend: String,
    pub config: EngineConfig,
    pub agents: Vec<(AgentId, Coord)>,
    pub state_digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub submissions: Vec<ActionSubmission>,
    pub outcomes: Vec<SubmissionOutcome>,
    pub deltas: Vec<StateDelta>,
    pub chats: Vec<ChatDelivery>,
    pub fired_events: Vec<FiredEvent>,
    pub diagnostics: Vec<String>,
    pub rng_state_digest: String,
    pub state_digest: String,
}

impl RoundRecord {
    pub fn from_report(report: RoundReport, rng_state_digest: String, state_digest: String) -> Self {
        Self {
            round: report.round_index,
            submissions: report.submissions,
            outcomes: report.outcomes,
            deltas: report.state_deltas,
            chats: report.chats_delivered,
            fired_events: report.fired_events,
            diagnostics: report.diagnostics,
            rng_state_digest,
            state_digest,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ControlRecord {
    Spawn { record: AgentRecord },
    Attach { agent: AgentId, human: String },
    Detach { agent: AgentId },
    SetFreeAction { agent: AgentId, on: bool },
    Inject { event: EventSpec, fired: Vec<FiredEvent>, deltas: Vec<StateDelta> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    Genesis(Genesis),
    Round(RoundRecord),
    FreeAction { record: FreeActionRecord, state_digest: String },
    Control { round: u64, record: ControlRecord, state_digest: String },
}

impl LogEntry {
    pub fn state_digest(&self) -> &str {
        match self {
            LogEntry::Genesis(g) => &g.state_digest,
            LogEntry::Round(r) => &r.state_digest,
            LogEntry::FreeAction { state_digest, .. } | LogEntry::Control { state_digest, .. } => state_digest,
        }
    }

    /// `r` for rounds, `r.k` for free actions.
    pub fn stamp(&self) -> String {
        match self {
            LogEntry::Genesis(_) => "genesis".into(),
            LogEntry::Round(r) => alloc::format!("{}", r.round),
            LogEntry::FreeAction { record, .. } => alloc::format!("{}.{}", record.round, record.sub_seq),
            LogEntry::Control { round, .. } => alloc::format!("{round}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub seq: u64,
    pub prev: String,
    pub digest: String,
    pub entry: LogEntry,
}

fn link(prev: &str, entry: &LogEntry) -> String {
    let mut bytes = Vec::from(prev.as_bytes());
    bytes.extend_from_slice(digest::canonical_json(entry).as_bytes());
    digest::to_hex(&digest::sha256(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("line {seq}: expected sequence number {expected}")]
    Sequence { seq: u64, expected: u64 },
    #[error("line {seq} ({stamp}): previous-digest link is broken")]
    Link { seq: u64, stamp: String },
    #[error("line {seq} ({stamp}): digest does not match its contents")]
    Digest { seq: u64, stamp: String },
}

impl ChainError {
    pub fn seq(&self) -> u64 {
        match self {
            ChainError::Sequence { seq, .. } | ChainError::Link { seq, .. } | ChainError::Digest { seq, .. } => *seq,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    lines: Vec<LogLine>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lines(lines: Vec<LogLine>) -> Self {
        Self { lines }
    }

    pub fn head(&self) -> &str {
        self.lines.last().map_or(ZERO_DIGEST, |l| l.digest.as_str())
    }

    pub fn append(&mut self, entry: LogEntry) -> &LogLine {
        let prev = String::from(self.head());
        let digest = link(&prev, &entry);
        let seq = self.lines.len() as u64;
        self.lines.push(LogLine { seq, prev, digest, entry });
        self.lines.last().expect("just pushed")
    }

    pub fn lines(&self) -> &[LogLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &LogEntry> {
        self.lines.iter().map(|l| &l.entry)
    }

    pub fn rounds(&self) -> impl Iterator<Item = &RoundRecord> {
        self.entries().filter_map(|e| match e {
            LogEntry::Round(r) => Some(r),
            _ => None,
        })
    }

    pub fn genesis(&self) -> Option<&Genesis> {
        match self.lines.first().map(|l| &l.entry) {
            Some(LogEntry::Genesis(g)) => Some(g),
            _ => None,
        }
    }

    /// Checks sequence numbers, links and digests; reports the first bad line.
    pub fn verify_chain(&self) -> Result<(), ChainError> {
        let mut prev = String::from(ZERO_DIGEST);
        for (i, l) in self.lines.iter().enumerate() {
            if l.seq != i as u64 {
                return Err(ChainError::Sequence { seq: l.seq, expected: i as u64 });
            }
            if l.prev != prev {
                return Err(ChainError::Link { seq: l.seq, stamp: l.entry.stamp() });
            }
            if link(&l.prev, &l.entry) != l.digest {
                return Err(ChainError::Digest { seq: l.seq, stamp: l.entry.stamp() });
            }
            prev = l.digest.clone();
        }
        Ok(())
    }
}
