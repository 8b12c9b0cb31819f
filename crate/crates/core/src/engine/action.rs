//! Actions, submissions and their outcomes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};
use crate::world::{EffectVerb, ObjectPlace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveTarget {
    Region(String),
    Cell(Coord),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveAction {
    pub target: MoveTarget,
}

impl MoveAction {
    pub fn to_region(name: impl Into<String>) -> Self {
        Self { target: MoveTarget::Region(name.into()) }
    }

    pub fn to_cell(c: Coord) -> Self {
        Self { target: MoveTarget::Cell(c) }
    }
}

impl fmt::Display for MoveAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.target {
            MoveTarget::Region(r) => write!(f, "go to {r}"),
            MoveTarget::Cell(c) => write!(f, "go to {},{}", c.x, c.y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionVerb {
    Go,
    Use,
    Apply,
    Take,
    Put,
    Give,
    Chat,
}

impl ActionVerb {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionVerb::Go => "go",
            ActionVerb::Use => "use",
            ActionVerb::Apply => "apply",
            ActionVerb::Take => "take",
            ActionVerb::Put => "put",
            ActionVerb::Give => "give",
            ActionVerb::Chat => "chat",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PutMode {
    In,
    On,
}

/// Agent or object on the receiving end of `apply`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Referent {
    Agent(AgentId),
    Object(ObjectId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Region(String),
    Furniture(ObjectId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StandardAction {
    Use { object: ObjectId },
    Apply { item: ObjectId, target: Referent },
    Take { item: ObjectId },
    Put { item: ObjectId, mode: PutMode, place: Place },
    Give { item: ObjectId, to: AgentId },
    Chat { to: Vec<AgentId>, utterance: String },
}

impl StandardAction {
    pub fn verb(&self) -> ActionVerb {
        match self {
            StandardAction::Use { .. } => ActionVerb::Use,
            StandardAction::Apply { .. } => ActionVerb::Apply,
            StandardAction::Take { .. } => ActionVerb::Take,
            StandardAction::Put { .. } => ActionVerb::Put,
            StandardAction::Give { .. } => ActionVerb::Give,
            StandardAction::Chat { .. } => ActionVerb::Chat,
        }
    }

    /// Ids this action targets, for action triggers and engagement counts.
    pub fn target_ids(&self) -> Vec<&str> {
        match self {
            StandardAction::Use { object } => alloc::vec![object.as_str()],
            StandardAction::Apply { item, target } => match target {
                Referent::Agent(a) => alloc::vec![item.as_str(), a.as_str()],
                Referent::Object(o) => alloc::vec![item.as_str(), o.as_str()],
            },
            StandardAction::Take { item } => alloc::vec![item.as_str()],
            StandardAction::Put { item, place, .. } => match place {
                Place::Region(r) => alloc::vec![item.as_str(), r.as_str()],
                Place::Furniture(f) => alloc::vec![item.as_str(), f.as_str()],
            },
            StandardAction::Give { item, to } => alloc::vec![item.as_str(), to.as_str()],
            StandardAction::Chat { to, .. } => to.iter().map(AgentId::as_str).collect(),
        }
    }

    /// Agents this action is directed at; they get a working-memory entry.
    pub fn recipients(&self) -> Vec<&AgentId> {
        match self {
            StandardAction::Apply { target: Referent::Agent(a), .. } => alloc::vec![a],
            StandardAction::Give { to, .. } => alloc::vec![to],
            StandardAction::Chat { to, .. } => to.iter().collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for StandardAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardAction::Use { object } => write!(f, "use {object}"),
            StandardAction::Apply { item, target } => match target {
                Referent::Agent(a) => write!(f, "apply {item} to {a}"),
                Referent::Object(o) => write!(f, "apply {item} to {o}"),
            },
            StandardAction::Take { item } => write!(f, "take {item}"),
            StandardAction::Put { item, mode, place } => {
                let m = match mode {
                    PutMode::In => "in",
                    PutMode::On => "on",
                };
                match place {
                    Place::Region(r) => write!(f, "put {item} {m} {r}"),
                    Place::Furniture(o) => write!(f, "put {item} {m} {o}"),
                }
            }
            StandardAction::Give { item, to } => write!(f, "give {item} to {to}"),
            StandardAction::Chat { to, utterance } => {
                let names: Vec<&str> = to.iter().map(AgentId::as_str).collect();
                write!(f, "chat with {}: {utterance}", names.join(", "))
            }
        }
    }
}

/// Who produced a submission. Over-long chats from models are truncated,
/// from humans rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Model,
    Human,
}

/// New cognition and short-term goal produced alongside the actions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MindUpdate {
    pub cognition: String,
    pub short_term_goal: String,
}

/// A submission before the engine stamps it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionDraft {
    pub agent: AgentId,
    pub round_index: u64,
    #[serde(default)]
    pub movement: Option<MoveAction>,
    #[serde(default)]
    pub standard: Option<StandardAction>,
    pub origin: Origin,
    #[serde(default)]
    pub mind: Option<MindUpdate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSubmission {
    pub receipt_seq: u64,
    pub agent: AgentId,
    pub round_index: u64,
    pub movement: Option<MoveAction>,
    pub standard: Option<StandardAction>,
    pub origin: Origin,
    pub mind: Option<MindUpdate>,
    /// Set when a model chat was cut to the word limit.
    #[serde(default)]
    pub truncated_chat: bool,
}

impl ActionSubmission {
    pub fn draft(&self) -> SubmissionDraft {
        SubmissionDraft {
            agent: self.agent.clone(),
            round_index: self.round_index,
            movement: self.movement.clone(),
            standard: self.standard.clone(),
            origin: self.origin,
            mind: self.mind.clone(),
        }
    }

    /// Grammar text of the chosen actions, `idle` when there are none.
    pub fn action_text(&self) -> String {
        let mut parts = Vec::new();
        if let Some(m) = &self.movement {
            parts.push(format!("{m}"));
        }
        if let Some(s) = &self.standard {
            parts.push(format!("{s}"));
        }
        if parts.is_empty() {
            "idle".into()
        } else {
            parts.join("; ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Executed,
    Failed { reason: String },
}

impl Outcome {
    pub fn failed(reason: impl Into<String>) -> Self {
        Outcome::Failed { reason: reason.into() }
    }

    pub fn is_executed(&self) -> bool {
        matches!(self, Outcome::Executed)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Outcome::Failed { reason } => Some(reason),
            Outcome::Executed => None,
        }
    }
}

/// Resolution of one submission: one slot outcome per submitted action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionOutcome {
    pub receipt_seq: u64,
    pub agent: AgentId,
    pub movement: Option<Outcome>,
    pub standard: Option<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "delta", rename_all = "snake_case")]
pub enum StateDelta {
    Moved { agent: AgentId, from: Coord, to: Coord, steps: u32 },
    AgentState { agent: AgentId, verb: EffectVerb, label: String },
    ObjectState { object: ObjectId, verb: EffectVerb, label: String },
    ObjectPlaced { object: ObjectId, from: ObjectPlace, to: ObjectPlace },
    Goal { agent: AgentId, goal: String },
    Spawned { agent: AgentId, at: Coord },
    /// A first impression stored in the agent's object memory.
    Impression { agent: AgentId, target: String, text: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatDelivery {
    pub receipt_seq: u64,
    pub speaker: AgentId,
    pub targets: Vec<AgentId>,
    /// Everyone who heard it, targets included.
    pub listeners: Vec<AgentId>,
    pub utterance: String,
}
