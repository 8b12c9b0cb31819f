//! The human-editable map document and its conversion to [`WorldMap`].
//!
//! Field names are fixed:
//! `{width, height, textures[], cells[], regions[], objects[]}` with
//! texture `{id, category, glyph}`, cell `{x, y, ground, blocker}`,
//! region `{name, description, cells[[x,y]...]}` and object
//! `{id, name, type, description, function[{verb,label,target}], states[], location}`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    validate_map, EffectTarget, EffectVerb, GridCell, MapError, ObjectKind, ObjectPlace, RegionArea, StateEffect,
    Texture, TextureCategory, WorldMap, WorldObject,
};
use crate::geom::Coord;
use crate::ids::{AgentId, ObjectId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub width: u32,
    pub height: u32,
    pub textures: Vec<TextureDoc>,
    pub cells: Vec<CellDoc>,
    pub regions: Vec<RegionDoc>,
    pub objects: Vec<ObjectDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureDoc {
    pub id: String,
    pub category: TextureCategory,
    pub glyph: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDoc {
    pub x: i32,
    pub y: i32,
    #[serde(default)]
    pub ground: Option<String>,
    #[serde(default)]
    pub blocker: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDoc {
    pub name: String,
    pub description: String,
    pub cells: Vec<Coord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectDoc {
    pub verb: EffectVerb,
    pub label: String,
    pub target: EffectTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LocationDoc {
    Cell(Coord),
    Carrier { carrier: String },
    On { on: String },
}

/// The five authoring attributes are optional here so that a missing one
/// can be reported by object id instead of as a generic parse error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectDoc {
    pub id: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(rename = "type", default)]
    pub kind: Option<ObjectKind>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub function: Option<Vec<EffectDoc>>,
    #[serde(default)]
    pub states: Option<Vec<String>>,
    #[serde(default)]
    pub location: Option<LocationDoc>,
}

impl MapDocument {
    /// A `width x height` floor with a `floor` ground texture on every cell
    /// and an unused `brick` wall texture.
    pub fn open_floor(width: u32, height: u32) -> MapDocument {
        let mut cells = Vec::new();
        for y in 0..height as i32 {
            for x in 0..width as i32 {
                cells.push(CellDoc { x, y, ground: Some("floor".into()), blocker: None });
            }
        }
        MapDocument {
            width,
            height,
            textures: alloc::vec![
                TextureDoc { id: "floor".into(), category: TextureCategory::Ground, glyph: ".".into() },
                TextureDoc { id: "brick".into(), category: TextureCategory::Wall, glyph: "#".into() },
            ],
            cells,
            regions: Vec::new(),
            objects: Vec::new(),
        }
    }

    /// Puts a `brick` blocker on `(x, y)`. Out-of-range coords are ignored.
    pub fn set_wall(&mut self, x: i32, y: i32) {
        if let Some(c) = self.cells.iter_mut().find(|c| c.x == x && c.y == y) {
            c.blocker = Some("brick".into());
        }
    }
}

fn oob(path: String, coord: Coord, doc: &MapDocument) -> MapError {
    MapError::OutOfBounds { path, coord, width: doc.width, height: doc.height }
}

impl WorldMap {
    /// Resolves references, checks bounds and runs [`validate_map`].
    pub fn from_document(doc: &MapDocument) -> Result<WorldMap, MapError> {
        let map = Self::from_document_unchecked(doc)?;
        let violations = validate_map(&map);
        if violations.is_empty() {
            Ok(map)
        } else {
            Err(MapError::Violations(violations))
        }
    }

    /// Like [`WorldMap::from_document`] but skips invariant validation.
    /// Structural errors (dangling references, bounds) are still reported.
    pub fn from_document_unchecked(doc: &MapDocument) -> Result<WorldMap, MapError> {
        let in_bounds =
            |c: Coord| c.x >= 0 && c.y >= 0 && (c.x as u32) < doc.width && (c.y as u32) < doc.height;

        let textures: Vec<Texture> = doc
            .textures
            .iter()
            .map(|t| Texture { id: t.id.clone(), category: t.category, display_glyph: t.glyph.clone() })
            .collect();
        let mut categories: BTreeMap<&str, TextureCategory> = BTreeMap::new();
        for t in &textures {
            categories.entry(t.id.as_str()).or_insert(t.category);
        }
        let check_texture = |path: String, id: &str, expected: TextureCategory| -> Result<(), MapError> {
            match categories.get(id) {
                None => Err(MapError::DanglingTexture { path, texture: id.to_string() }),
                Some(&found) if found != expected => {
                    Err(MapError::WrongTextureCategory { path, texture: id.to_string(), expected, found })
                }
                Some(_) => Ok(()),
            }
        };

        let w = doc.width as usize;
        let mut cells: Vec<GridCell> = (0..doc.height as i32)
            .flat_map(|y| (0..doc.width as i32).map(move |x| Coord::new(x, y)))
            .map(|coord| GridCell { coord, ground: None, blocker: None, occupant_object: None })
            .collect();
        for (i, c) in doc.cells.iter().enumerate() {
            let coord = Coord::new(c.x, c.y);
            if !in_bounds(coord) {
                return Err(oob(format!("cells[{i}]"), coord, doc));
            }
            let cell = &mut cells[c.y as usize * w + c.x as usize];
            // Later entries layer over earlier ones.
            if let Some(g) = &c.ground {
                check_texture(format!("cells[{i}].ground"), g, TextureCategory::Ground)?;
                cell.ground = Some(g.clone());
            }
            if let Some(b) = &c.blocker {
                check_texture(format!("cells[{i}].blocker"), b, TextureCategory::Wall)?;
                cell.blocker = Some(b.clone());
            }
        }

        let mut regions = Vec::with_capacity(doc.regions.len());
        for (i, r) in doc.regions.iter().enumerate() {
            let mut set = BTreeSet::new();
            for (j, &coord) in r.cells.iter().enumerate() {
                if !in_bounds(coord) {
                    return Err(oob(format!("regions[{i}].cells[{j}]"), coord, doc));
                }
                set.insert(coord);
            }
            regions.push(RegionArea { name: r.name.clone(), description: r.description.clone(), cells: set });
        }

        let ids: BTreeSet<&str> = doc.objects.iter().map(|o| o.id.as_str()).collect();
        let mut objects = Vec::with_capacity(doc.objects.len());
        for (i, o) in doc.objects.iter().enumerate() {
            let path = format!("objects[{i}]");
            let missing = |attribute: &str| MapError::MissingAttribute {
                path: path.clone(),
                object: o.id.clone(),
                attribute: attribute.to_string(),
            };
            let name = o.name.clone().ok_or_else(|| missing("name"))?;
            let kind = o.kind.ok_or_else(|| missing("type"))?;
            let description = o.description.clone().ok_or_else(|| missing("description"))?;
            let function = o
                .function
                .as_ref()
                .ok_or_else(|| missing("function"))?
                .iter()
                .map(|e| StateEffect { verb: e.verb, label: e.label.clone(), target: e.target })
                .collect();
            let states = o.states.as_ref().ok_or_else(|| missing("states"))?.iter().cloned().collect();
            let location = match &o.location {
                None => ObjectPlace::Stock,
                Some(LocationDoc::Cell(c)) => {
                    if !in_bounds(*c) {
                        return Err(oob(format!("{path}.location"), *c, doc));
                    }
                    ObjectPlace::At(*c)
                }
                Some(LocationDoc::Carrier { carrier }) => ObjectPlace::Carried(AgentId::new(carrier.clone())),
                Some(LocationDoc::On { on }) => {
                    if !ids.contains(on.as_str()) {
                        return Err(MapError::DanglingObject { path: format!("{path}.location.on"), object: on.clone() });
                    }
                    ObjectPlace::On(ObjectId::new(on.clone()))
                }
            };
            objects.push(WorldObject { id: ObjectId::new(o.id.clone()), name, kind, description, function, states, location });
        }

        for o in &objects {
            if let (ObjectKind::Furniture, ObjectPlace::At(c)) = (o.kind, &o.location) {
                let cell = &mut cells[c.y as usize * w + c.x as usize];
                if cell.occupant_object.is_none() {
                    cell.occupant_object = Some(o.id.clone());
                }
            }
        }

        Ok(WorldMap { width: doc.width, height: doc.height, textures, cells, regions, objects })
    }

    pub fn to_document(&self) -> MapDocument {
        MapDocument {
            width: self.width,
            height: self.height,
            textures: self
                .textures
                .iter()
                .map(|t| TextureDoc { id: t.id.clone(), category: t.category, glyph: t.display_glyph.clone() })
                .collect(),
            cells: self
                .cells
                .iter()
                .filter(|c| c.ground.is_some() || c.blocker.is_some())
                .map(|c| CellDoc { x: c.coord.x, y: c.coord.y, ground: c.ground.clone(), blocker: c.blocker.clone() })
                .collect(),
            regions: self
                .regions
                .iter()
                .map(|r| RegionDoc {
                    name: r.name.clone(),
                    description: r.description.clone(),
                    cells: r.cells.iter().copied().collect(),
                })
                .collect(),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    id: o.id.0.clone(),
                    name: Some(o.name.clone()),
                    kind: Some(o.kind),
                    description: Some(o.description.clone()),
                    function: Some(
                        o.function.iter().map(|e| EffectDoc { verb: e.verb, label: e.label.clone(), target: e.target }).collect(),
                    ),
                    states: Some(o.states.iter().cloned().collect()),
                    location: match &o.location {
                        ObjectPlace::At(c) => Some(LocationDoc::Cell(*c)),
                        ObjectPlace::Carried(a) => Some(LocationDoc::Carrier { carrier: a.0.clone() }),
                        ObjectPlace::On(f) => Some(LocationDoc::On { on: f.0.clone() }),
                        ObjectPlace::Stock => None,
                    },
                })
                .collect(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn open_doc(width: u32, height: u32) -> MapDocument {
        MapDocument::open_floor(width, height)
    }

    fn chair(id: &str, at: Coord) -> ObjectDoc {
        ObjectDoc {
            id: id.into(),
            name: Some("Chair".into()),
            kind: Some(ObjectKind::Furniture),
            description: Some("a wooden chair".into()),
            function: Some(vec![EffectDoc { verb: EffectVerb::Add, label: "feeling comfortable".into(), target: EffectTarget::Actor }]),
            states: Some(vec![]),
            location: Some(LocationDoc::Cell(at)),
        }
    }

    #[test]
    fn minimal_three_by_three() {
        let map = WorldMap::from_document(&open_doc(3, 3)).unwrap();
        assert_eq!(map.cells.len(), 9);
        assert!(map.regions.is_empty());
    }

    #[test]
    fn missing_function_names_object_and_attribute() {
        let mut doc = open_doc(3, 3);
        let mut c = chair("chair-1", Coord::new(1, 1));
        c.function = None;
        doc.objects.push(c);
        let err = WorldMap::from_document(&doc).unwrap_err();
        match &err {
            MapError::MissingAttribute { path, object, attribute } => {
                assert_eq!(path, "objects[0]");
                assert_eq!(object, "chair-1");
                assert_eq!(attribute, "function");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("chair-1"));
    }

    #[test]
    fn dangling_texture_has_path() {
        let mut doc = open_doc(2, 2);
        doc.cells[3].ground = Some("lava".into());
        assert_eq!(
            WorldMap::from_document(&doc).unwrap_err(),
            MapError::DanglingTexture { path: "cells[3].ground".into(), texture: "lava".into() }
        );
    }

    #[test]
    fn out_of_bounds_object() {
        let mut doc = open_doc(2, 2);
        doc.objects.push(chair("c", Coord::new(5, 0)));
        assert!(matches!(WorldMap::from_document(&doc), Err(MapError::OutOfBounds { path, .. }) if path == "objects[0].location"));
    }

    #[test]
    fn wall_texture_cannot_be_ground() {
        let mut doc = open_doc(2, 2);
        doc.cells[0].ground = Some("brick".into());
        assert!(matches!(WorldMap::from_document(&doc), Err(MapError::WrongTextureCategory { .. })));
    }

    #[test]
    fn document_round_trip() {
        let mut doc = open_doc(4, 3);
        doc.cells[5].blocker = Some("brick".into());
        doc.regions.push(RegionDoc { name: "Nook".into(), description: "quiet".into(), cells: vec![Coord::new(0, 0), Coord::new(1, 0)] });
        doc.objects.push(chair("chair-1", Coord::new(3, 2)));
        let map = WorldMap::from_document(&doc).unwrap();
        let again = WorldMap::from_document(&map.to_document()).unwrap();
        assert_eq!(map, again);
        let json = serde_json::to_string(&map.to_document()).unwrap();
        let parsed: MapDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(WorldMap::from_document(&parsed).unwrap(), map);
    }

    #[test]
    fn region_lookup() {
        let mut doc = open_doc(4, 4);
        doc.regions.push(RegionDoc { name: "Reading Area".into(), description: "".into(), cells: vec![Coord::new(0, 0), Coord::new(1, 0)] });
        let map = WorldMap::from_document(&doc).unwrap();
        assert_eq!(map.region_of(Coord::new(1, 0)).unwrap(), Some("Reading Area"));
        assert_eq!(map.region_of(Coord::new(3, 3)).unwrap(), None);
        assert!(map.region_of(Coord::new(9, 0)).is_err());
    }
}
