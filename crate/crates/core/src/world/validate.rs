use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ObjectKind, ObjectPlace, WorldMap};
use crate::geom::Coord;

/// One broken map invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

fn v(rule: &'static str, message: String) -> Violation {
    Violation { rule, message }
}

/// Checks every map invariant; an empty report means the map is valid.
pub fn validate_map(map: &WorldMap) -> Vec<Violation> {
    let mut out = Vec::new();

    if map.cells.len() != (map.width as usize) * (map.height as usize) {
        out.push(v("grid-shape", format!("{} cells for a {}x{} map", map.cells.len(), map.width, map.height)));
        return out;
    }
    for (i, c) in map.cells.iter().enumerate() {
        let expect = Coord::new((i % map.width as usize) as i32, (i / map.width as usize) as i32);
        if c.coord != expect {
            out.push(v("grid-shape", format!("cell #{i} has coord {} but sits at {expect}", c.coord)));
        }
    }

    let mut seen = BTreeSet::new();
    for t in &map.textures {
        if !seen.insert(t.id.as_str()) {
            out.push(v("unique-texture", format!("duplicate texture id `{}`", t.id)));
        }
    }

    let mut names = BTreeSet::new();
    let mut owner: BTreeMap<Coord, &str> = BTreeMap::new();
    for r in &map.regions {
        if !names.insert(r.name.as_str()) {
            out.push(v("unique-region", format!("duplicate region name `{}`", r.name)));
        }
        for &c in &r.cells {
            match map.cell(c) {
                None => out.push(v("in-bounds", format!("region `{}` cell {c} is out of bounds", r.name))),
                Some(cell) if cell.is_wall() => {
                    out.push(v("region-ground", format!("region `{}` cell {c} is a wall", r.name)))
                }
                Some(cell) if cell.ground.is_none() => {
                    out.push(v("region-ground", format!("region `{}` cell {c} has no ground", r.name)))
                }
                Some(_) => {}
            }
            if let Some(other) = owner.insert(c, r.name.as_str()) {
                if other != r.name {
                    out.push(v("region-overlap", format!("cell {c} belongs to both `{other}` and `{}`", r.name)));
                }
            }
        }
    }

    let mut ids = BTreeSet::new();
    let mut furniture_at: BTreeMap<Coord, &str> = BTreeMap::new();
    for o in &map.objects {
        if !ids.insert(o.id.as_str()) {
            out.push(v("unique-object", format!("duplicate object id `{}`", o.id)));
        }
        for e in &o.function {
            if e.label.trim().is_empty() || e.label.trim() != e.label {
                out.push(v("effect-label", format!("object `{}` has a malformed state label `{}`", o.id, e.label)));
            }
        }
        match (&o.location, o.kind) {
            (ObjectPlace::At(c), kind) => match map.cell(*c) {
                None => out.push(v("in-bounds", format!("object `{}` at {c} is out of bounds", o.id))),
                Some(cell) if cell.is_wall() || cell.ground.is_none() => {
                    out.push(v("object-ground", format!("object `{}` at {c} is not on open ground", o.id)))
                }
                Some(_) => {
                    if kind == ObjectKind::Furniture {
                        if let Some(prev) = furniture_at.insert(*c, o.id.as_str()) {
                            out.push(v("one-furniture-per-cell", format!("`{prev}` and `{}` share {c}", o.id)));
                        }
                    }
                }
            },
            (_, ObjectKind::Furniture) => {
                out.push(v("furniture-fixed", format!("furniture `{}` must be placed on a cell", o.id)))
            }
            (ObjectPlace::On(f), ObjectKind::Item)
                if !map.objects.iter().any(|x| &x.id == f && x.kind == ObjectKind::Furniture) =>
            {
                out.push(v("item-on-furniture", format!("item `{}` is on `{f}`, which is not furniture", o.id)));
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::document::tests::open_doc;
    use super::super::{RegionDoc, TextureCategory, TextureDoc};
    use super::*;
    use alloc::vec;

    #[test]
    fn region_on_wall_is_one_violation() {
        let mut doc = open_doc(3, 3);
        doc.cells[4].blocker = Some("brick".into());
        doc.regions.push(RegionDoc { name: "Hall".into(), description: "".into(), cells: vec![Coord::new(1, 1), Coord::new(0, 0)] });
        let map = WorldMap::from_document_unchecked(&doc).unwrap();
        let report = validate_map(&map);
        assert_eq!(report.len(), 1, "{report:?}");
        assert!(report[0].message.contains("Hall") && report[0].message.contains("(1, 1)"));
    }

    #[test]
    fn duplicate_texture_is_one_violation() {
        let mut doc = open_doc(2, 2);
        doc.textures.push(TextureDoc { id: "floor".into(), category: TextureCategory::Ground, glyph: ",".into() });
        let map = WorldMap::from_document_unchecked(&doc).unwrap();
        assert_eq!(validate_map(&map).len(), 1);
    }

    #[test]
    fn overlapping_regions_reported() {
        let mut doc = open_doc(3, 3);
        doc.regions.push(RegionDoc { name: "A".into(), description: "".into(), cells: vec![Coord::new(0, 0)] });
        doc.regions.push(RegionDoc { name: "B".into(), description: "".into(), cells: vec![Coord::new(0, 0)] });
        let map = WorldMap::from_document_unchecked(&doc).unwrap();
        let report = validate_map(&map);
        assert!(report.iter().any(|x| x.rule == "region-overlap"));
    }
}
