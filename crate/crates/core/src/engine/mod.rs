//! Round engine: submissions, movement and standard-action resolution,
//! interior updates, events and perceptions.
//!
//! One round runs in a fixed order:
//! 1. movements, in receipt order, planned against round-start occupancy;
//! 2. standard actions, in receipt order, after a conflict pass in which only
//!    the earliest action per contested item or furniture is eligible;
//! 3. interior updates (cognition, emotion, long-term memory, goal);
//! 4. event triggers and chain resolution;
//! 5. feedback for the next perceptions, then the round index advances.

mod action;
mod execute;
pub mod path;
mod perception;
pub mod runlog;
pub mod sight;
mod state;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{
    ActionSubmission, ActionVerb, ChatDelivery, MindUpdate, MoveAction, MoveTarget, Origin, Outcome, Place, PutMode,
    Referent, StandardAction, StateDelta, SubmissionDraft, SubmissionOutcome,
};
pub use path::{compute_path, nearest_matching};
pub use perception::{Perception, SeenAgent, SeenObject, SeenRegion};
pub use sight::{line_of_sight, visible_cells};
pub use state::{Feedback, HeardChat, ObjectStatus, WorldState};

use crate::agent::{AgentRecord, Lexicon};
use crate::decision::Backend;
use crate::events::{self, EventSpec, FiredEvent};
use crate::geom::Coord;
use crate::ids::AgentId;
use crate::rng::SessionRng;
use crate::text;
use crate::world::{ObjectKind, WorldMap};

/// Cells an agent may walk in one round.
pub const MOVE_BUDGET: usize = 20;
pub const DEFAULT_PERCEPTION_RADIUS: u32 = 10;
/// Nominal duration of one round; not tied to any clock.
pub const NOMINAL_SECONDS_PER_ROUND: u32 = 15;

fn default_radius() -> u32 {
    DEFAULT_PERCEPTION_RADIUS
}
fn default_wm() -> usize {
    crate::agent::DEFAULT_WM_CAPACITY
}
fn default_k() -> usize {
    crate::agent::DEFAULT_RETRIEVAL_K
}
fn default_budget() -> usize {
    MOVE_BUDGET
}
fn default_dim() -> usize {
    crate::agent::DEFAULT_EMBED_DIM
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default = "default_radius")]
    pub perception_radius: u32,
    #[serde(default = "default_wm")]
    pub wm_capacity: usize,
    #[serde(default = "default_k")]
    pub retrieval_k: usize,
    #[serde(default = "default_budget")]
    pub move_budget: usize,
    #[serde(default = "default_dim")]
    pub embed_dim: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            perception_radius: DEFAULT_PERCEPTION_RADIUS,
            wm_capacity: default_wm(),
            retrieval_k: default_k(),
            move_budget: MOVE_BUDGET,
            embed_dim: default_dim(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubmitError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("submission is for round {got}, but the current round is {expected}")]
    WrongRound { expected: u64, got: u64 },
    #[error("agent `{agent}` already submitted a {slot} action this round")]
    DuplicateSlot { agent: AgentId, slot: &'static str },
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown agent `{0}` in action")]
    UnknownTarget(String),
    #[error("coordinate {0} is outside the map")]
    OutOfBounds(Coord),
    #[error("chat has {words} words; the limit is {limit}")]
    ChatTooLong { words: usize, limit: usize },
    #[error("chat utterance is empty")]
    EmptyUtterance,
    #[error("chat names no recipient")]
    NoRecipients,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpawnError {
    #[error("agent `{0}` already exists")]
    Duplicate(AgentId),
    #[error("cell {0} is not open ground")]
    NotWalkable(Coord),
    #[error("cell {0} is occupied")]
    Occupied(Coord),
}

/// Resolution of one round.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round_index: u64,
    pub submissions: Vec<ActionSubmission>,
    pub outcomes: Vec<SubmissionOutcome>,
    pub state_deltas: Vec<StateDelta>,
    pub chats_delivered: Vec<ChatDelivery>,
    pub fired_events: Vec<FiredEvent>,
    pub diagnostics: Vec<String>,
}

/// A free-action submission executed between rounds, stamped `round.sub_seq`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeActionRecord {
    pub round: u64,
    pub sub_seq: u32,
    pub submission: ActionSubmission,
    pub outcome: SubmissionOutcome,
    pub deltas: Vec<StateDelta>,
    pub chats: Vec<ChatDelivery>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Slots {
    movement: bool,
    standard: bool,
}

/// Scratch output of action execution.
#[derive(Default)]
struct Effects {
    deltas: Vec<StateDelta>,
    chats: Vec<ChatDelivery>,
    feedback: BTreeMap<AgentId, Feedback>,
}

impl Effects {
    fn fb(&mut self, id: &AgentId) -> &mut Feedback {
        self.feedback.entry(id.clone()).or_default()
    }
}

#[derive(Clone, Debug)]
pub struct Engine {
    map: Arc<WorldMap>,
    lexicon: Arc<Lexicon>,
    config: EngineConfig,
    events: Vec<EventSpec>,
    state: WorldState,
    rng: SessionRng,
    queue: Vec<ActionSubmission>,
    slots: BTreeMap<AgentId, Slots>,
    free_claims: BTreeSet<String>,
    free_executed: Vec<(ActionSubmission, SubmissionOutcome)>,
    free_seq: u32,
}

impl Engine {
    pub fn new(map: Arc<WorldMap>, lexicon: Arc<Lexicon>, config: EngineConfig, events: Vec<EventSpec>) -> Self {
        let state = WorldState::from_map(&map);
        let rng = SessionRng::new(config.seed);
        Self {
            map,
            lexicon,
            config,
            events,
            state,
            rng,
            queue: Vec::new(),
            slots: BTreeMap::new(),
            free_claims: BTreeSet::new(),
            free_executed: Vec::new(),
            free_seq: 0,
        }
    }

    pub fn map(&self) -> &WorldMap {
        &self.map
    }

    pub fn map_arc(&self) -> Arc<WorldMap> {
        self.map.clone()
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Direct mutable access, for scenario setup and tests.
    pub fn state_mut(&mut self) -> &mut WorldState {
        &mut self.state
    }

    pub fn events(&self) -> &[EventSpec] {
        &self.events
    }

    pub fn add_event(&mut self, spec: EventSpec) {
        self.events.retain(|e| e.id != spec.id);
        self.events.push(spec);
    }

    pub fn rng(&mut self) -> &mut SessionRng {
        &mut self.rng
    }

    pub fn round_index(&self) -> u64 {
        self.state.round_index
    }

    pub fn agent(&self, id: &AgentId) -> Option<&AgentRecord> {
        self.state.agents.get(id)
    }

    pub fn pending_submissions(&self) -> &[ActionSubmission] {
        &self.queue
    }

    /// Digest of everything that determines future behavior.
    pub fn state_digest(&self) -> String {
        crate::digest::hex_digest_of(&(&self.state, &self.rng, &self.events))
    }

    pub fn rng_state_digest(&self) -> String {
        self.rng.state_digest()
    }

    /// Places a new agent on the map.
    pub fn insert_agent(&mut self, agent: AgentRecord) -> Result<(), SpawnError> {
        if self.state.agents.contains_key(&agent.id) {
            return Err(SpawnError::Duplicate(agent.id));
        }
        if !self.map.is_walkable(agent.position) {
            return Err(SpawnError::NotWalkable(agent.position));
        }
        if self.state.agents.values().any(|a| a.position == agent.position) {
            return Err(SpawnError::Occupied(agent.position));
        }
        self.state.agents.insert(agent.id.clone(), agent);
        Ok(())
    }

    fn check_referents(&self, draft: &SubmissionDraft) -> Result<(), SubmitError> {
        let obj = |id: &crate::ids::ObjectId| {
            if self.state.objects.contains_key(id) {
                Ok(())
            } else {
                Err(SubmitError::UnknownObject(id.to_string()))
            }
        };
        let agent = |id: &AgentId| {
            if self.state.agents.contains_key(id) {
                Ok(())
            } else {
                Err(SubmitError::UnknownTarget(id.to_string()))
            }
        };
        let region = |name: &str| {
            if self.map.region_ci(name).is_some() {
                Ok(())
            } else {
                Err(SubmitError::UnknownRegion(name.into()))
            }
        };
        if let Some(m) = &draft.movement {
            match &m.target {
                MoveTarget::Region(r) => region(r)?,
                MoveTarget::Cell(c) if !self.map.in_bounds(*c) => return Err(SubmitError::OutOfBounds(*c)),
                MoveTarget::Cell(_) => {}
            }
        }
        match &draft.standard {
            None => {}
            Some(StandardAction::Use { object }) => obj(object)?,
            Some(StandardAction::Apply { item, target }) => {
                obj(item)?;
                match target {
                    Referent::Agent(a) => agent(a)?,
                    Referent::Object(o) => obj(o)?,
                }
            }
            Some(StandardAction::Take { item }) => obj(item)?,
            Some(StandardAction::Put { item, place, .. }) => {
                obj(item)?;
                match place {
                    Place::Region(r) => region(r)?,
                    Place::Furniture(f) => obj(f)?,
                }
            }
            Some(StandardAction::Give { item, to }) => {
                obj(item)?;
                agent(to)?;
            }
            Some(StandardAction::Chat { to, utterance }) => {
                if to.is_empty() {
                    return Err(SubmitError::NoRecipients);
                }
                for a in to {
                    agent(a)?;
                }
                if text::word_count(utterance) == 0 {
                    return Err(SubmitError::EmptyUtterance);
                }
            }
        }
        Ok(())
    }

    /// Validates a draft and applies the chat word limit. Returns the
    /// normalized draft and whether a model chat was truncated.
    fn vet(&self, mut draft: SubmissionDraft) -> Result<(SubmissionDraft, bool), SubmitError> {
        if !self.state.agents.contains_key(&draft.agent) {
            return Err(SubmitError::UnknownAgent(draft.agent));
        }
        if draft.round_index != self.state.round_index {
            return Err(SubmitError::WrongRound { expected: self.state.round_index, got: draft.round_index });
        }
        self.check_referents(&draft)?;
        let mut truncated = false;
        if let Some(StandardAction::Chat { utterance, .. }) = &mut draft.standard {
            let words = text::word_count(utterance);
            if words > text::CHAT_WORD_LIMIT {
                match draft.origin {
                    Origin::Human => return Err(SubmitError::ChatTooLong { words, limit: text::CHAT_WORD_LIMIT }),
                    Origin::Model => {
                        *utterance = text::truncate_words(utterance, text::CHAT_WORD_LIMIT);
                        truncated = true;
                    }
                }
            }
        }
        Ok((draft, truncated))
    }

    /// Queues a submission for the current round and returns its receipt
    /// sequence number.
    pub fn submit_action(&mut self, draft: SubmissionDraft) -> Result<u64, SubmitError> {
        let (draft, truncated) = self.vet(draft)?;
        let slots = self.slots.get(&draft.agent).copied().unwrap_or_default();
        if draft.movement.is_some() && slots.movement {
            return Err(SubmitError::DuplicateSlot { agent: draft.agent, slot: "movement" });
        }
        if draft.standard.is_some() && slots.standard {
            return Err(SubmitError::DuplicateSlot { agent: draft.agent, slot: "standard" });
        }
        let entry = self.slots.entry(draft.agent.clone()).or_default();
        entry.movement |= draft.movement.is_some();
        entry.standard |= draft.standard.is_some();
        let receipt_seq = self.queue.len() as u64;
        self.queue.push(ActionSubmission {
            receipt_seq,
            agent: draft.agent,
            round_index: draft.round_index,
            movement: draft.movement,
            standard: draft.standard,
            origin: draft.origin,
            mind: draft.mind,
            truncated_chat: truncated,
        });
        Ok(receipt_seq)
    }

    /// Conflict keys: contested items and exclusively used furniture.
    fn conflict_keys(&self, a: &StandardAction) -> Vec<String> {
        let item = |id: &crate::ids::ObjectId| format!("item:{id}");
        match a {
            StandardAction::Use { object } => match self.map.object(object.as_str()).map(|o| o.kind) {
                Some(ObjectKind::Furniture) => alloc::vec![format!("furniture:{object}")],
                _ => alloc::vec![item(object)],
            },
            StandardAction::Apply { item: i, .. }
            | StandardAction::Take { item: i }
            | StandardAction::Put { item: i, .. }
            | StandardAction::Give { item: i, .. } => alloc::vec![item(i)],
            StandardAction::Chat { .. } => Vec::new(),
        }
    }

    fn conflict_reason(a: &StandardAction) -> &'static str {
        match a {
            StandardAction::Take { .. } => "item already taken",
            StandardAction::Use { .. } => "already in use by an earlier action",
            _ => "item already claimed by an earlier action",
        }
    }

    /// Resolves every queued submission and advances the round.
    pub fn resolve_round(&mut self, backend: &mut dyn Backend) -> RoundReport {
        let round = self.state.round_index;
        let subs = core::mem::take(&mut self.queue);
        self.slots.clear();
        let mut fx = Effects { feedback: core::mem::take(&mut self.state.incoming), ..Effects::default() };
        let mut outcomes: Vec<SubmissionOutcome> = subs
            .iter()
            .map(|s| SubmissionOutcome { receipt_seq: s.receipt_seq, agent: s.agent.clone(), movement: None, standard: None })
            .collect();
        let mut diagnostics = Vec::new();
        for s in subs.iter().filter(|s| s.truncated_chat) {
            diagnostics.push(format!("chat from `{}` truncated to {} words", s.agent, text::CHAT_WORD_LIMIT));
        }

        let start = self.state.occupied();
        let mut live = self.state.occupancy();
        for (i, sub) in subs.iter().enumerate() {
            if let Some(mv) = &sub.movement {
                let o = self.run_move(round, &sub.agent, mv, &start, &mut live, &mut fx);
                if let Some(r) = o.reason() {
                    fx.fb(&sub.agent).failures.push(format!("{mv}: {r}"));
                }
                outcomes[i].movement = Some(o);
            }
        }

        let mut first_by_key: BTreeMap<String, usize> = BTreeMap::new();
        for (i, sub) in subs.iter().enumerate() {
            if let Some(a) = &sub.standard {
                for k in self.conflict_keys(a) {
                    first_by_key.entry(k).or_insert(i);
                }
            }
        }
        for (i, sub) in subs.iter().enumerate() {
            let Some(a) = &sub.standard else { continue };
            let lost = self.conflict_keys(a).iter().any(|k| self.free_claims.contains(k) || first_by_key[k] != i);
            let first_chat = fx.chats.len();
            let o = if lost {
                Outcome::failed(Self::conflict_reason(a))
            } else {
                self.run_standard(round, &sub.agent, a, backend, &mut fx)
            };
            for c in &mut fx.chats[first_chat..] {
                c.receipt_seq = sub.receipt_seq;
            }
            if let Some(r) = o.reason() {
                fx.fb(&sub.agent).failures.push(format!("{a}: {r}"));
            }
            outcomes[i].standard = Some(o);
        }

        for sub in &subs {
            let Some(mind) = &sub.mind else { continue };
            let action_text = sub.action_text();
            let lexicon = self.lexicon.clone();
            let Some(agent) = self.state.agents.get_mut(&sub.agent) else { continue };
            if !mind.short_term_goal.trim().is_empty() {
                agent.goals.short_term = mind.short_term_goal.clone();
            }
            if let Err(e) = agent.update_interior(round, &mind.cognition, &action_text, &lexicon, &mut |t| backend.embed(t)) {
                diagnostics.push(format!("interior update for `{}` skipped: {e}", sub.agent));
            }
        }

        let free = core::mem::take(&mut self.free_executed);
        let executed: Vec<(&ActionSubmission, &SubmissionOutcome)> =
            free.iter().map(|(s, o)| (s, o)).chain(subs.iter().zip(outcomes.iter())).collect();
        let initial = events::evaluate_triggers(&self.events, round, &self.map, &self.state, &executed);
        let chain = events::resolve_chain(&self.events, &self.map, &mut self.state, initial);
        drop(executed);
        fx.deltas.extend(chain.deltas);
        diagnostics.extend(chain.diagnostics);
        for (id, f) in core::mem::take(&mut self.state.incoming) {
            fx.fb(&id).extend(f);
        }

        self.state.feedback = fx.feedback;
        self.free_claims.clear();
        self.free_seq = 0;
        self.state.round_index += 1;
        RoundReport {
            round_index: round,
            submissions: subs,
            outcomes,
            state_deltas: fx.deltas,
            chats_delivered: fx.chats,
            fired_events: chain.fired,
            diagnostics,
        }
    }

    /// Executes a free-action submission immediately against the current
    /// state. Per-round slot limits do not apply; the movement budget and
    /// chat word limit do.
    pub fn free_action(&mut self, draft: SubmissionDraft, backend: &mut dyn Backend) -> Result<FreeActionRecord, SubmitError> {
        let (draft, truncated) = self.vet(draft)?;
        let round = self.state.round_index;
        let sub_seq = self.free_seq;
        self.free_seq += 1;
        let sub = ActionSubmission {
            receipt_seq: u64::from(sub_seq),
            agent: draft.agent,
            round_index: round,
            movement: draft.movement,
            standard: draft.standard,
            origin: draft.origin,
            mind: draft.mind,
            truncated_chat: truncated,
        };
        let mut fx = Effects::default();
        let mut outcome = SubmissionOutcome { receipt_seq: sub.receipt_seq, agent: sub.agent.clone(), movement: None, standard: None };
        if let Some(mv) = &sub.movement {
            let occ = self.state.occupied();
            let mut live = self.state.occupancy();
            outcome.movement = Some(self.run_move(round, &sub.agent, mv, &occ, &mut live, &mut fx));
        }
        if let Some(a) = &sub.standard {
            let o = self.run_standard(round, &sub.agent, a, backend, &mut fx);
            for c in &mut fx.chats {
                c.receipt_seq = sub.receipt_seq;
            }
            if o.is_executed() {
                self.free_claims.extend(self.conflict_keys(a));
            }
            outcome.standard = Some(o);
        }
        if let Some(mind) = &sub.mind {
            let action_text = sub.action_text();
            let lexicon = self.lexicon.clone();
            if let Some(agent) = self.state.agents.get_mut(&sub.agent) {
                if !mind.short_term_goal.trim().is_empty() {
                    agent.goals.short_term = mind.short_term_goal.clone();
                }
                let _ = agent.update_interior(round, &mind.cognition, &action_text, &lexicon, &mut |t| backend.embed(t));
            }
        }
        for (id, f) in fx.feedback {
            if id != sub.agent {
                self.state.feedback_mut(&id).extend(f);
            }
        }
        self.free_executed.push((sub.clone(), outcome.clone()));
        Ok(FreeActionRecord { round, sub_seq, submission: sub, outcome, deltas: fx.deltas, chats: fx.chats })
    }

    /// Applies an injected event right away, outside the trigger pass.
    pub fn inject_event(&mut self, spec: EventSpec) -> events::ChainReport {
        let fired = FiredEvent {
            event: spec.id.clone(),
            round: self.state.round_index,
            cause: events::Cause::Injected,
            misfired: None,
        };
        self.add_event(spec);
        events::resolve_chain(&self.events, &self.map, &mut self.state, alloc::vec![fired])
    }

    /// Cells visible from `c` under the configured radius.
    pub fn visible_from(&self, c: Coord) -> BTreeSet<Coord> {
        visible_cells(&self.map, c, self.config.perception_radius)
    }
}
