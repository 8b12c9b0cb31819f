//! Scenario documents: map, population, events, questionnaire and engine
//! settings in one file.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::NewResident;
use crate::analytics::LikertItem;
use crate::engine::EngineConfig;
use crate::events::{validate_events, EventError, EventSpec};
use crate::population::{validate_population, PopulationError, PopulationSpec};
use crate::world::{MapDocument, MapError, ObjectKind, WorldMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub map: MapDocument,
    pub population: PopulationSpec,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub questionnaire: Vec<LikertItem>,
    #[serde(default)]
    pub config: EngineConfig,
    /// Where new residents enter. Spawning is refused without one.
    #[serde(default)]
    pub spawn_region: Option<String>,
    /// Round boundaries at which the study pipeline pauses to measure.
    #[serde(default)]
    pub phases: Vec<u64>,
    /// Default run length.
    #[serde(default)]
    pub rounds: u64,
    /// Role templates a human can attach to by group. The agent is created
    /// in the spawn region on first attach.
    #[serde(default)]
    pub slots: Vec<NewResident>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("population: {0}")]
    Population(#[from] PopulationError),
    #[error("events: {0}")]
    Events(#[from] EventError),
    #[error("{what} names unknown region `{region}`")]
    UnknownRegion { what: String, region: String },
    #[error("group `{group}` starts with `{item}`, which is not an item on the map")]
    UnknownItem { group: String, item: String },
    #[error("item `{0}` is handed out twice")]
    SharedItem(String),
    #[error("questionnaire item `{0}`: {1}")]
    Questionnaire(String, &'static str),
    #[error("slot `{0}` needs a spawn region")]
    SlotWithoutSpawn(String),
    #[error("slot group `{0}` is declared twice")]
    DuplicateSlot(String),
    #[error("region `{region}` has {free} free cells for {needed} agents")]
    RegionFull { region: String, free: usize, needed: usize },
}

impl Scenario {
    /// Loads the map and checks every cross-reference.
    pub fn check(&self) -> Result<WorldMap, ScenarioError> {
        let map = WorldMap::from_document(&self.map)?;
        validate_events(&self.events, &map)?;
        validate_population(&self.population)?;
        let region = |what: String, name: &str| {
            if map.region(name).is_some() {
                Ok(())
            } else {
                Err(ScenarioError::UnknownRegion { what, region: name.into() })
            }
        };
        let mut handed = BTreeSet::new();
        for g in &self.population.groups {
            region(alloc::format!("group `{}`", g.name), &g.initial_region)?;
            for item in &g.initial_items {
                match map.object(item.as_str()) {
                    Some(o) if o.kind == ObjectKind::Item => {}
                    _ => return Err(ScenarioError::UnknownItem { group: g.name.clone(), item: item.to_string() }),
                }
                if !handed.insert(item.clone()) {
                    return Err(ScenarioError::SharedItem(item.to_string()));
                }
            }
        }
        if let Some(r) = &self.spawn_region {
            region("spawn_region".into(), r)?;
        }
        let mut slot_groups = BTreeSet::new();
        for slot in &self.slots {
            if self.spawn_region.is_none() {
                return Err(ScenarioError::SlotWithoutSpawn(slot.group.clone()));
            }
            if !slot_groups.insert(slot.group.as_str()) {
                return Err(ScenarioError::DuplicateSlot(slot.group.clone()));
            }
        }
        let mut ids = BTreeSet::new();
        for q in &self.questionnaire {
            if !ids.insert(q.id.as_str()) {
                return Err(ScenarioError::Questionnaire(q.id.clone(), "duplicate id"));
            }
            if q.scale[0] >= q.scale[1] {
                return Err(ScenarioError::Questionnaire(q.id.clone(), "scale minimum must be below its maximum"));
            }
        }
        Ok(map)
    }

    pub fn digest(&self) -> String {
        crate::digest::hex_digest_of(self)
    }

    pub fn slot(&self, group: &str) -> Option<&NewResident> {
        self.slots.iter().find(|s| s.group == group)
    }

    pub fn agent_count(&self) -> u32 {
        self.population.groups.iter().map(|g| g.size).sum()
    }
}
