//! Per-agent perception: what an agent sees, hears and learns about its
//! previous round.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Engine, Feedback, HeardChat, MoveTarget};
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};
use crate::world::{ObjectKind, StateSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeenAgent {
    pub id: AgentId,
    pub name: String,
    pub coord: Coord,
    pub region: Option<String>,
    /// Outward appearance: name, group and visible states.
    pub surface: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeenObject {
    pub id: ObjectId,
    pub name: String,
    pub kind: ObjectKind,
    pub description: String,
    pub states: StateSet,
    pub coord: Coord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeenRegion {
    pub name: String,
    pub description: String,
    /// Closest visible cell of the region (Manhattan, then coord order).
    pub nearest: Coord,
    pub distance: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perception {
    pub round_index: u64,
    pub agent: AgentId,
    pub position: Coord,
    pub region: Option<String>,
    pub visible_cells: BTreeSet<Coord>,
    pub visible_regions: Vec<SeenRegion>,
    pub visible_agents: Vec<SeenAgent>,
    pub visible_objects: Vec<SeenObject>,
    pub heard_chat: Vec<HeardChat>,
    pub own_failures: Vec<String>,
    pub own_state_changes: Vec<String>,
    pub notices: Vec<String>,
    pub pending_destination: Option<MoveTarget>,
    pub inventory: Vec<SeenObject>,
}

impl Engine {
    /// Perception of `agent` at the current round boundary, or `None` for an
    /// unknown agent.
    pub fn build_perception(&self, agent: &AgentId) -> Option<Perception> {
        self.perception_with(agent, &self.state.occupancy())
    }

    /// As [`Engine::build_perception`], reusing an occupancy map built once
    /// for many perceivers.
    pub fn perception_with(&self, agent: &AgentId, occupancy: &BTreeMap<Coord, AgentId>) -> Option<Perception> {
        let me = self.state.agents.get(agent)?;
        let pos = me.position;
        let visible = self.visible_from(pos);

        let mut regions: BTreeMap<&str, SeenRegion> = BTreeMap::new();
        for r in &self.map.regions {
            let best = r.cells.iter().filter(|c| visible.contains(c)).min_by_key(|c| (c.manhattan(pos), **c));
            if let Some(&c) = best {
                regions.insert(
                    r.name.as_str(),
                    SeenRegion { name: r.name.clone(), description: r.description.clone(), nearest: c, distance: c.manhattan(pos) },
                );
            }
        }
        let mut visible_regions: Vec<SeenRegion> = regions.into_values().collect();
        visible_regions.sort_by(|a, b| (a.distance, &a.name).cmp(&(b.distance, &b.name)));

        let mut visible_agents: Vec<SeenAgent> = visible
            .iter()
            .filter_map(|c| occupancy.get(c))
            .filter(|id| *id != agent)
            .filter_map(|id| self.state.agents.get(id))
            .map(|a| {
                let mut surface = alloc::format!("{} ({})", a.name, a.group);
                if !a.states.is_empty() {
                    let labels: Vec<&str> = a.states.iter().map(String::as_str).collect();
                    surface.push_str(&alloc::format!(", appears {}", labels.join(", ")));
                }
                SeenAgent {
                    id: a.id.clone(),
                    name: a.name.clone(),
                    coord: a.position,
                    region: self.map.region_of(a.position).ok().flatten().map(String::from),
                    surface,
                }
            })
            .collect();
        visible_agents.sort_by(|a, b| (a.coord.chebyshev(pos), &a.id).cmp(&(b.coord.chebyshev(pos), &b.id)));

        let seen = |id: &ObjectId, coord: Coord| -> Option<SeenObject> {
            let o = self.map.object(id.as_str())?;
            let status = self.state.objects.get(id)?;
            Some(SeenObject {
                id: id.clone(),
                name: o.name.clone(),
                kind: o.kind,
                description: o.description.clone(),
                states: status.states.clone(),
                coord,
            })
        };
        let mut visible_objects: Vec<SeenObject> = Vec::new();
        for (id, status) in &self.state.objects {
            let coord = match &status.place {
                crate::world::ObjectPlace::At(c) => Some(*c),
                crate::world::ObjectPlace::On(_) => self.state.object_coord(id),
                _ => None,
            };
            if let Some(c) = coord.filter(|c| visible.contains(c)) {
                visible_objects.extend(seen(id, c));
            }
        }
        visible_objects.sort_by(|a, b| (a.coord.chebyshev(pos), &a.id).cmp(&(b.coord.chebyshev(pos), &b.id)));
        let inventory = me.inventory.iter().filter_map(|id| seen(id, pos)).collect();

        let mut fb = Feedback::default();
        if let Some(f) = self.state.feedback.get(agent) {
            fb.extend(f.clone());
        }
        if let Some(f) = self.state.incoming.get(agent) {
            fb.extend(f.clone());
        }

        Some(Perception {
            round_index: self.state.round_index,
            agent: agent.clone(),
            position: pos,
            region: self.map.region_of(pos).ok().flatten().map(String::from),
            visible_cells: visible,
            visible_regions,
            visible_agents,
            visible_objects,
            heard_chat: fb.heard,
            own_failures: fb.failures,
            own_state_changes: fb.state_changes,
            notices: fb.notices,
            pending_destination: self.state.pending.get(agent).cloned(),
            inventory,
        })
    }
}
