//! The grid world: textures, cells, region areas and stateful objects.
//!
//! A [`WorldMap`] is immutable once built. Object states, item locations and
//! agent occupancy change during a run and live in the engine instead.

mod document;
mod validate;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};

pub use document::{CellDoc, EffectDoc, LocationDoc, MapDocument, ObjectDoc, RegionDoc, TextureDoc};
pub use validate::{validate_map, Violation};

/// Real-world extent of one cell edge.
pub const CELL_SCALE_FEET: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureCategory {
    Ground,
    Wall,
    Furniture,
    Item,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Texture {
    pub id: String,
    pub category: TextureCategory,
    pub display_glyph: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub coord: Coord,
    pub ground: Option<String>,
    /// Wall texture, if any.
    pub blocker: Option<String>,
    /// Furniture standing on this cell. Items never block and are tracked by
    /// the engine.
    pub occupant_object: Option<ObjectId>,
}

impl GridCell {
    pub fn is_wall(&self) -> bool {
        self.blocker.is_some()
    }

    /// Ground without a wall or furniture on it.
    pub fn is_walkable(&self) -> bool {
        self.ground.is_some() && self.blocker.is_none() && self.occupant_object.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionArea {
    pub name: String,
    pub description: String,
    pub cells: BTreeSet<Coord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectVerb {
    Add,
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectTarget {
    Actor,
    Object,
}

/// One entry of an object's `function` attribute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateEffect {
    pub verb: EffectVerb,
    pub label: String,
    pub target: EffectTarget,
}

impl StateEffect {
    pub fn add(label: impl Into<String>, target: EffectTarget) -> Self {
        Self { verb: EffectVerb::Add, label: label.into(), target }
    }

    pub fn remove(label: impl Into<String>, target: EffectTarget) -> Self {
        Self { verb: EffectVerb::Remove, label: label.into(), target }
    }
}

pub type StateSet = BTreeSet<String>;

/// Adds or removes one label. Both directions are idempotent.
pub fn apply_state_effect(states: &mut StateSet, effect: &StateEffect) -> bool {
    match effect.verb {
        EffectVerb::Add => states.insert(effect.label.clone()),
        EffectVerb::Remove => states.remove(&effect.label),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Furniture,
    Item,
}

/// Where an object currently is.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectPlace {
    At(Coord),
    Carried(AgentId),
    /// Placed on a piece of furniture.
    On(ObjectId),
    /// Not in the world; items here serve as templates for agents' initial
    /// inventories.
    Stock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldObject {
    pub id: ObjectId,
    pub name: String,
    pub kind: ObjectKind,
    pub description: String,
    pub function: Vec<StateEffect>,
    pub states: StateSet,
    pub location: ObjectPlace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldMap {
    pub width: u32,
    pub height: u32,
    pub textures: Vec<Texture>,
    /// Row-major, `width * height` entries.
    pub cells: Vec<GridCell>,
    pub regions: Vec<RegionArea>,
    pub objects: Vec<WorldObject>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("{path}: missing field `{field}`")]
    MissingField { path: String, field: String },
    #[error("{path}: object `{object}` is missing the `{attribute}` attribute")]
    MissingAttribute { path: String, object: String, attribute: String },
    #[error("{path}: unknown texture `{texture}`")]
    DanglingTexture { path: String, texture: String },
    #[error("{path}: texture `{texture}` is a {found:?} texture, expected {expected:?}")]
    WrongTextureCategory { path: String, texture: String, expected: TextureCategory, found: TextureCategory },
    #[error("{path}: unknown object `{object}`")]
    DanglingObject { path: String, object: String },
    #[error("{path}: coordinate {coord} outside {width}x{height} map")]
    OutOfBounds { path: String, coord: Coord, width: u32, height: u32 },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("map failed validation: {}", .0.first().map(|v| v.message.as_str()).unwrap_or(""))]
    Violations(Vec<Violation>),
    #[error("coordinate {0} outside the map")]
    CoordOutOfBounds(Coord),
}

impl WorldMap {
    pub fn in_bounds(&self, c: Coord) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as u32) < self.width && (c.y as u32) < self.height
    }

    fn index(&self, c: Coord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn cell(&self, c: Coord) -> Option<&GridCell> {
        self.in_bounds(c).then(|| &self.cells[self.index(c)])
    }

    pub fn cell_index(&self, c: Coord) -> Option<usize> {
        self.in_bounds(c).then(|| self.index(c))
    }

    pub fn is_wall(&self, c: Coord) -> bool {
        self.cell(c).is_some_and(GridCell::is_wall)
    }

    /// Ground with neither wall nor furniture.
    pub fn is_walkable(&self, c: Coord) -> bool {
        self.cell(c).is_some_and(GridCell::is_walkable)
    }

    pub fn texture(&self, id: &str) -> Option<&Texture> {
        self.textures.iter().find(|t| t.id == id)
    }

    pub fn region(&self, name: &str) -> Option<&RegionArea> {
        self.regions.iter().find(|r| r.name == name)
    }

    pub fn region_ci(&self, name: &str) -> Option<&RegionArea> {
        self.regions.iter().find(|r| r.name.eq_ignore_ascii_case(name))
    }

    pub fn object(&self, id: &str) -> Option<&WorldObject> {
        self.objects.iter().find(|o| o.id.as_str() == id)
    }

    /// Name of the region containing `coord`, if any.
    pub fn region_of(&self, coord: Coord) -> Result<Option<&str>, MapError> {
        if !self.in_bounds(coord) {
            return Err(MapError::CoordOutOfBounds(coord));
        }
        Ok(self.regions.iter().find(|r| r.cells.contains(&coord)).map(|r| r.name.as_str()))
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let w = self.width as i32;
        (0..self.height as i32).flat_map(move |y| (0..w).map(move |x| Coord::new(x, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn chair_adds_comfort() {
        let mut s = StateSet::new();
        apply_state_effect(&mut s, &StateEffect::add("feeling comfortable", EffectTarget::Actor));
        assert_eq!(s.iter().collect::<Vec<_>>(), ["feeling comfortable"]);
    }

    #[test]
    fn repair_tool_removes_damage() {
        let mut s: StateSet = ["damaged".to_string()].into();
        apply_state_effect(&mut s, &StateEffect::remove("damaged", EffectTarget::Object));
        assert!(s.is_empty());
    }

    #[test]
    fn removing_absent_label_is_noop() {
        let mut s: StateSet = ["damaged".to_string()].into();
        let changed = apply_state_effect(&mut s, &StateEffect::remove("wet", EffectTarget::Object));
        assert!(!changed);
        assert_eq!(s.len(), 1);
    }

    proptest::proptest! {
        #[test]
        fn effects_are_idempotent(labels in proptest::collection::btree_set("[a-c]{1,2}", 0..5), label in "[a-c]{1,2}", add in proptest::bool::ANY) {
            let effect = if add { StateEffect::add(label, EffectTarget::Actor) } else { StateEffect::remove(label, EffectTarget::Actor) };
            let mut once = labels.clone();
            apply_state_effect(&mut once, &effect);
            let mut twice = once.clone();
            apply_state_effect(&mut twice, &effect);
            proptest::prop_assert_eq!(once, twice);
        }
    }
}
