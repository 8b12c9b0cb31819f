//! Backends that answer from recorded material.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{template_impression, AskRequest, Backend, BackendError, DecisionRequest, DecisionResponse, TargetInfo};
use crate::agent::{AgentRecord, Embedder, HashingEmbedder};
use crate::engine::runlog::RunLog;
use crate::engine::StateDelta;
use crate::ids::AgentId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CannedReply {
    Reply(DecisionResponse),
    /// Simulates a failed call.
    Error { message: String },
}

/// Replays decisions keyed by `(round, agent)`; each key holds the replies
/// for successive attempts.
#[derive(Clone, Debug)]
pub struct CannedBackend {
    replies: BTreeMap<(u64, AgentId), VecDeque<CannedReply>>,
    answers: BTreeMap<AgentId, VecDeque<String>>,
    impressions: BTreeMap<(AgentId, String), String>,
    embedder: HashingEmbedder,
    calls: Vec<(u64, AgentId)>,
}

impl CannedBackend {
    pub fn new(seed: u64, embed_dim: usize) -> Self {
        Self {
            replies: BTreeMap::new(),
            answers: BTreeMap::new(),
            impressions: BTreeMap::new(),
            embedder: HashingEmbedder::new(embed_dim, seed),
            calls: Vec::new(),
        }
    }

    pub fn push_reply(&mut self, round: u64, agent: AgentId, reply: CannedReply) {
        self.replies.entry((round, agent)).or_default().push_back(reply);
    }

    pub fn push_answer(&mut self, agent: AgentId, answer: impl Into<String>) {
        self.answers.entry(agent).or_default().push_back(answer.into());
    }

    pub fn set_impression(&mut self, agent: AgentId, target: impl Into<String>, text: impl Into<String>) {
        self.impressions.insert((agent, target.into()), text.into());
    }

    /// Every `decide` call so far, in order.
    pub fn calls(&self) -> &[(u64, AgentId)] {
        &self.calls
    }
}

impl Backend for CannedBackend {
    fn name(&self) -> &str {
        "canned"
    }

    fn decide(&mut self, request: &DecisionRequest, _feedback: Option<&str>) -> Result<DecisionResponse, BackendError> {
        let key = (request.round_index, request.agent.id.clone());
        self.calls.push(key.clone());
        match self.replies.get_mut(&key).and_then(VecDeque::pop_front) {
            Some(CannedReply::Reply(r)) => Ok(r),
            Some(CannedReply::Error { message }) => Err(BackendError::Transport(message)),
            None => Err(BackendError::Missing { round: key.0, agent: key.1 }),
        }
    }

    fn embed(&mut self, text: &str) -> Vec<f64> {
        self.embedder.embed(text)
    }

    fn describe_impression(&mut self, agent: &AgentRecord, target: &TargetInfo) -> String {
        self.impressions
            .get(&(agent.id.clone(), target.id.clone()))
            .cloned()
            .unwrap_or_else(|| template_impression(agent, target))
    }

    fn ask(&mut self, request: &AskRequest) -> Result<String, BackendError> {
        self.answers
            .get_mut(&request.agent.id)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| BackendError::Missing { round: request.round_index, agent: request.agent.id.clone() })
    }
}

/// Serves the impressions recorded in a run log; used when re-executing
/// logged submissions.
#[derive(Clone, Debug)]
pub struct ReplayBackend {
    impressions: BTreeMap<(AgentId, String), String>,
    embedder: HashingEmbedder,
}

impl ReplayBackend {
    pub fn from_log(log: &RunLog, seed: u64, embed_dim: usize) -> Self {
        let mut impressions = BTreeMap::new();
        let deltas = log.entries().flat_map(|e| match e {
            crate::engine::runlog::LogEntry::Round(r) => r.deltas.iter(),
            crate::engine::runlog::LogEntry::FreeAction { record, .. } => record.deltas.iter(),
            _ => [].iter(),
        });
        for d in deltas {
            if let StateDelta::Impression { agent, target, text } = d {
                impressions.entry((agent.clone(), target.clone())).or_insert_with(|| text.clone());
            }
        }
        Self { impressions, embedder: HashingEmbedder::new(embed_dim, seed) }
    }
}

impl Backend for ReplayBackend {
    fn name(&self) -> &str {
        "replay"
    }

    fn decide(&mut self, request: &DecisionRequest, _feedback: Option<&str>) -> Result<DecisionResponse, BackendError> {
        Err(BackendError::Missing { round: request.round_index, agent: request.agent.id.clone() })
    }

    fn embed(&mut self, text: &str) -> Vec<f64> {
        self.embedder.embed(text)
    }

    fn describe_impression(&mut self, agent: &AgentRecord, target: &TargetInfo) -> String {
        self.impressions
            .get(&(agent.id.clone(), target.id.clone()))
            .cloned()
            .unwrap_or_else(|| template_impression(agent, target))
    }

    fn ask(&mut self, request: &AskRequest) -> Result<String, BackendError> {
        Err(BackendError::Missing { round: request.round_index, agent: request.agent.id.clone() })
    }
}
