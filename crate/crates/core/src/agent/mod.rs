//! The agent interior: demographics, goals, emotion and memory.

pub mod embed;
pub mod memory;
pub mod vad;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};
use crate::world::StateSet;

pub use embed::{Embedder, HashingEmbedder, DEFAULT_EMBED_DIM};
pub use memory::{
    cosine, retrieve_memories, DimensionMismatch, LongTermMemory, LongTermMemoryEntry, ObjectMemory, WmEntry,
    WorkingMemory, DEFAULT_RETRIEVAL_K, DEFAULT_WM_CAPACITY,
};
pub use vad::{overall_emotion, score_vad, vad_to_words, Lexicon, LexiconError, OutOfRange, VadVector};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    pub gender: String,
    pub age_band: String,
    pub education: String,
    pub occupation: String,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

impl Demographics {
    /// Value of a named variable; `extra` is consulted for anything beyond
    /// the four fixed ones.
    pub fn get(&self, variable: &str) -> Option<&str> {
        match variable {
            "gender" => Some(&self.gender),
            "age_band" | "age" => Some(&self.age_band),
            "education" => Some(&self.education),
            "occupation" => Some(&self.occupation),
            other => self.extra.get(other).map(String::as_str),
        }
    }

    pub fn set(&mut self, variable: &str, value: String) {
        match variable {
            "gender" => self.gender = value,
            "age_band" | "age" => self.age_band = value,
            "education" => self.education = value,
            "occupation" => self.occupation = value,
            other => {
                self.extra.insert(other.into(), value);
            }
        }
    }
}

/// Long-term goal is fixed at creation; the short-term goal is rewritten
/// every round and by interventions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goals {
    long_term: String,
    pub short_term: String,
}

impl Goals {
    pub fn new(long_term: impl Into<String>, short_term: impl Into<String>) -> Self {
        Self { long_term: long_term.into(), short_term: short_term.into() }
    }

    pub fn long_term(&self) -> &str {
        &self.long_term
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: AgentId,
    pub name: String,
    pub group: String,
    pub profile: Demographics,
    self_awareness: String,
    pub situational_cognition: String,
    pub goals: Goals,
    pub emotion: VadVector,
    pub wm: WorkingMemory,
    pub ltm: LongTermMemory,
    pub om: ObjectMemory,
    pub inventory: Vec<ObjectId>,
    pub position: Coord,
    pub states: StateSet,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InteriorError {
    #[error("situational cognition must not be empty")]
    EmptyCognition,
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
}

impl AgentRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: AgentId,
        name: impl Into<String>,
        group: impl Into<String>,
        profile: Demographics,
        self_awareness: impl Into<String>,
        goals: Goals,
        wm_capacity: usize,
        position: Coord,
    ) -> Self {
        Self {
            id,
            name: name.into(),
            group: group.into(),
            profile,
            self_awareness: self_awareness.into(),
            situational_cognition: String::new(),
            goals,
            emotion: VadVector::ZERO,
            wm: WorkingMemory::new(wm_capacity),
            ltm: LongTermMemory::new(),
            om: ObjectMemory::default(),
            inventory: Vec::new(),
            position,
            states: StateSet::new(),
        }
    }

    pub fn self_awareness(&self) -> &str {
        &self.self_awareness
    }

    pub fn holds(&self, item: &ObjectId) -> bool {
        self.inventory.contains(item)
    }

    /// Stores a freshly generated cognition.
    ///
    /// Active state labels are appended as a trailing clause, emotion is
    /// rescored from the new cognition, and the cognition/action pair is
    /// filed in long-term memory.
    pub fn update_interior(
        &mut self,
        round: u64,
        new_cognition: &str,
        action_text: &str,
        lexicon: &Lexicon,
        embedder: &mut dyn FnMut(&str) -> Vec<f64>,
    ) -> Result<(), InteriorError> {
        let cognition = new_cognition.trim();
        if cognition.is_empty() {
            return Err(InteriorError::EmptyCognition);
        }
        let stored = with_state_clause(cognition, &self.states);
        let embedding = embedder(&stored);
        self.ltm.push(LongTermMemoryEntry {
            round,
            cognition_text: stored.clone(),
            action_text: action_text.into(),
            embedding,
        })?;
        self.emotion = score_vad(cognition, lexicon);
        self.situational_cognition = stored;
        Ok(())
    }
}

/// `"<cognition> (current state: a, b)"`, or the cognition unchanged when
/// there are no states.
pub fn with_state_clause(cognition: &str, states: &StateSet) -> String {
    if states.is_empty() {
        return cognition.into();
    }
    let labels: Vec<&str> = states.iter().map(String::as_str).collect();
    format!("{cognition} (current state: {})", labels.join(", "))
}
