//! Decisions: request assembly, the backend interface, grammar parsing and
//! the retry-then-idle loop.

mod canned;
pub mod grammar;
mod mock;
pub mod prompt;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canned::{CannedBackend, CannedReply, ReplayBackend};
pub use grammar::{parse_action, parse_decision, ParseError, ParsedAction, ParsedDecision, Registry};
pub use mock::MockBackend;

use crate::agent::{retrieve_memories, vad_to_words, AgentRecord};
use crate::engine::{Engine, MindUpdate, Origin, Perception, SubmissionDraft};
use crate::ids::AgentId;

/// What the agent knows about itself when deciding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: AgentId,
    pub name: String,
    pub group: String,
    pub self_awareness: String,
    pub situational_cognition: String,
    pub long_term_goal: String,
    pub short_term_goal: String,
    pub emotion_words: String,
    pub overall_emotion: f64,
    pub states: Vec<String>,
    pub recent_actions: Vec<String>,
}

impl AgentSnapshot {
    pub fn of(agent: &AgentRecord) -> Self {
        Self {
            id: agent.id.clone(),
            name: agent.name.clone(),
            group: agent.group.clone(),
            self_awareness: agent.self_awareness().to_string(),
            situational_cognition: agent.situational_cognition.clone(),
            long_term_goal: agent.goals.long_term().to_string(),
            short_term_goal: agent.goals.short_term.clone(),
            emotion_words: vad_to_words(agent.emotion).unwrap_or_else(|_| "emotionally neutral".into()),
            overall_emotion: crate::agent::overall_emotion(agent.emotion),
            states: agent.states.iter().cloned().collect(),
            recent_actions: agent.wm.iter().map(|e| e.text.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecalledMemory {
    pub round: u64,
    pub text: String,
    pub similarity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub round_index: u64,
    pub agent: AgentSnapshot,
    pub perception: Perception,
    pub recalled: Vec<RecalledMemory>,
    /// Impressions of perceived agents, objects and carried items, by id.
    pub impressions: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub action_text: String,
    pub new_short_term_goal: String,
    pub new_cognition: String,
}

/// Something an agent is about to interact with for the first time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetInfo {
    pub id: String,
    pub name: String,
    /// `agent`, `furniture` or `item`.
    pub kind: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    /// Answer with an integer in `min..=max`.
    Scale { prompt: String, dimension: String, min: i64, max: i64 },
    Open { question: String },
}

/// An out-of-band question put to an agent. Answering never changes the
/// agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AskRequest {
    pub round_index: u64,
    pub agent: AgentSnapshot,
    pub region: Option<String>,
    pub query: Query,
    /// Set on a re-ask after an unusable answer.
    pub retry_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("malformed reply: {0}")]
    Reply(String),
    #[error("no recorded reply for agent `{agent}` in round {round}")]
    Missing { round: u64, agent: AgentId },
}

pub trait Backend {
    fn name(&self) -> &str;

    /// `feedback` carries the parse error of a rejected earlier attempt.
    fn decide(&mut self, request: &DecisionRequest, feedback: Option<&str>) -> Result<DecisionResponse, BackendError>;

    fn decide_batch(
        &mut self,
        batch: &[(DecisionRequest, Option<String>)],
    ) -> Vec<Result<DecisionResponse, BackendError>> {
        batch.iter().map(|(r, f)| self.decide(r, f.as_deref())).collect()
    }

    fn embed(&mut self, text: &str) -> Vec<f64>;

    fn describe_impression(&mut self, agent: &AgentRecord, target: &TargetInfo) -> String;

    fn ask(&mut self, request: &AskRequest) -> Result<String, BackendError>;
}

/// Builds the decision request for `agent` from its perception and interior.
pub fn assemble_request(engine: &Engine, agent: &AgentId, backend: &mut dyn Backend) -> Option<DecisionRequest> {
    let perception = engine.build_perception(agent)?;
    assemble_with(engine, perception, backend)
}

/// As [`assemble_request`] with a perception already built.
pub fn assemble_with(engine: &Engine, perception: Perception, backend: &mut dyn Backend) -> Option<DecisionRequest> {
    let record = engine.agent(&perception.agent)?;
    let mut recalled = Vec::new();
    if !record.ltm.is_empty() {
        let query = backend.embed(&record.situational_cognition);
        if let Ok(hits) = retrieve_memories(&record.ltm, &query, engine.config().retrieval_k) {
            recalled = hits
                .into_iter()
                .map(|(e, sim)| RecalledMemory {
                    round: e.round,
                    text: format!("{} | {}", e.cognition_text, e.action_text),
                    similarity: sim,
                })
                .collect();
        }
    }
    let mut impressions = BTreeMap::new();
    let referents = perception
        .visible_agents
        .iter()
        .map(|a| a.id.as_str())
        .chain(perception.visible_objects.iter().map(|o| o.id.as_str()))
        .chain(perception.inventory.iter().map(|o| o.id.as_str()));
    for id in referents {
        if let Some(text) = record.om.get(id) {
            impressions.insert(id.to_string(), text.to_string());
        }
    }
    Some(DecisionRequest {
        round_index: perception.round_index,
        agent: AgentSnapshot::of(record),
        perception,
        recalled,
        impressions,
    })
}

/// One backend call made while deciding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub reply: Option<DecisionResponse>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub draft: SubmissionDraft,
    pub attempts: Vec<Attempt>,
    pub idled: bool,
}

fn to_draft(request: &DecisionRequest, parsed: ParsedDecision, reply: &DecisionResponse) -> SubmissionDraft {
    SubmissionDraft {
        agent: request.agent.id.clone(),
        round_index: request.round_index,
        movement: parsed.movement,
        standard: parsed.standard,
        origin: Origin::Model,
        mind: Some(MindUpdate { cognition: reply.new_cognition.clone(), short_term_goal: reply.new_short_term_goal.clone() }),
    }
}

fn idle(request: &DecisionRequest) -> SubmissionDraft {
    SubmissionDraft {
        agent: request.agent.id.clone(),
        round_index: request.round_index,
        movement: None,
        standard: None,
        origin: Origin::Model,
        mind: None,
    }
}

fn judge(
    reply: Result<DecisionResponse, BackendError>,
    registry: &Registry<'_>,
) -> (Attempt, Option<(ParsedDecision, DecisionResponse)>, Option<String>) {
    match reply {
        Ok(r) => match parse_decision(&r.action_text, registry) {
            Ok(p) => (Attempt { reply: Some(r.clone()), error: None }, Some((p, r)), None),
            Err(e) => {
                let note = format!("`{}` was rejected: {e}", r.action_text.trim());
                (Attempt { reply: Some(r), error: Some(e.to_string()) }, None, Some(note))
            }
        },
        // Transport failures idle the agent without a retry.
        Err(e) => (Attempt { reply: None, error: Some(e.to_string()) }, None, None),
    }
}

/// Asks the backend, retrying once on an unparseable reply, then idles.
pub fn decide_for(engine: &Engine, request: &DecisionRequest, backend: &mut dyn Backend) -> Decision {
    decide_many(engine, core::slice::from_ref(request), backend).pop().expect("one request, one decision")
}

/// Batched [`decide_for`]: each pass goes to the backend as one batch.
pub fn decide_many(engine: &Engine, requests: &[DecisionRequest], backend: &mut dyn Backend) -> Vec<Decision> {
    let registries: Vec<Registry<'_>> = requests.iter().map(|r| Registry::for_perception(engine, &r.perception)).collect();
    let mut out: Vec<Decision> =
        requests.iter().map(|r| Decision { draft: idle(r), attempts: Vec::new(), idled: true }).collect();
    let first: Vec<(DecisionRequest, Option<String>)> = requests.iter().map(|r| (r.clone(), None)).collect();
    let replies = backend.decide_batch(&first);
    let mut retry: Vec<(usize, String)> = Vec::new();
    for (i, reply) in replies.into_iter().enumerate() {
        let (attempt, ok, note) = judge(reply, &registries[i]);
        out[i].attempts.push(attempt);
        if let Some((p, r)) = ok {
            out[i].draft = to_draft(&requests[i], p, &r);
            out[i].idled = false;
        } else if let Some(n) = note {
            retry.push((i, n));
        }
    }
    if retry.is_empty() {
        return out;
    }
    let second: Vec<(DecisionRequest, Option<String>)> =
        retry.iter().map(|(i, n)| (requests[*i].clone(), Some(n.clone()))).collect();
    let replies = backend.decide_batch(&second);
    for ((i, _), reply) in retry.iter().zip(replies) {
        let (attempt, ok, _) = judge(reply, &registries[*i]);
        out[*i].attempts.push(attempt);
        if let Some((p, r)) = ok {
            out[*i].draft = to_draft(&requests[*i], p, &r);
            out[*i].idled = false;
        }
    }
    out
}

/// Deterministic impression text shared by the offline backends.
pub fn template_impression(agent: &AgentRecord, target: &TargetInfo) -> String {
    let what = if target.description.is_empty() { target.kind.clone() } else { target.description.clone() };
    format!("{} ({}): {}. First met while trying to {}.", target.name, target.kind, what, agent.goals.short_term.trim_end_matches('.'))
}
