//! Mutable world state owned by the engine.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::action::MoveTarget;
use crate::agent::AgentRecord;
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};
use crate::world::{ObjectPlace, StateSet, WorldMap};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectStatus {
    pub states: StateSet,
    pub place: ObjectPlace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeardChat {
    pub round: u64,
    pub speaker: AgentId,
    pub speaker_name: String,
    pub utterance: String,
    /// True when the listener was a named target rather than a bystander.
    pub addressed: bool,
}

/// What an agent learns about its own previous round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub failures: Vec<String>,
    pub state_changes: Vec<String>,
    pub notices: Vec<String>,
    pub heard: Vec<HeardChat>,
}

impl Feedback {
    pub fn is_empty(&self) -> bool {
        self.failures.is_empty() && self.state_changes.is_empty() && self.notices.is_empty() && self.heard.is_empty()
    }

    pub fn extend(&mut self, other: Feedback) {
        self.failures.extend(other.failures);
        self.state_changes.extend(other.state_changes);
        self.notices.extend(other.notices);
        self.heard.extend(other.heard);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub round_index: u64,
    pub agents: BTreeMap<AgentId, AgentRecord>,
    pub objects: BTreeMap<ObjectId, ObjectStatus>,
    /// Move targets left over from a truncated path.
    pub pending: BTreeMap<AgentId, MoveTarget>,
    /// Feedback produced by the last resolved round.
    pub feedback: BTreeMap<AgentId, Feedback>,
    /// Feedback produced since then (free actions, injections).
    pub incoming: BTreeMap<AgentId, Feedback>,
    /// Ids of `once` events that have fired.
    pub fired_once: BTreeSet<String>,
}

impl WorldState {
    /// Object states and places from the map; no agents.
    pub fn from_map(map: &WorldMap) -> Self {
        let objects = map
            .objects
            .iter()
            .map(|o| (o.id.clone(), ObjectStatus { states: o.states.clone(), place: o.location.clone() }))
            .collect();
        Self { objects, ..Self::default() }
    }

    pub fn occupancy(&self) -> BTreeMap<Coord, AgentId> {
        self.agents.values().map(|a| (a.position, a.id.clone())).collect()
    }

    pub fn occupied(&self) -> BTreeSet<Coord> {
        self.agents.values().map(|a| a.position).collect()
    }

    /// Cell an object currently sits on, following furniture and carriers.
    pub fn object_coord(&self, id: &ObjectId) -> Option<Coord> {
        let mut place = &self.objects.get(id)?.place;
        for _ in 0..4 {
            match place {
                ObjectPlace::At(c) => return Some(*c),
                ObjectPlace::Carried(a) => return self.agents.get(a).map(|a| a.position),
                ObjectPlace::On(f) => place = &self.objects.get(f)?.place,
                ObjectPlace::Stock => return None,
            }
        }
        None
    }

    pub fn agent_name<'a>(&'a self, id: &'a AgentId) -> &'a str {
        self.agents.get(id).map(|a| a.name.as_str()).unwrap_or(id.as_str())
    }

    pub fn feedback_mut(&mut self, id: &AgentId) -> &mut Feedback {
        self.incoming.entry(id.clone()).or_default()
    }
}
