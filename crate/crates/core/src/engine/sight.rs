//! Line of sight between cell centers.
//!
//! A ray is blocked when it passes through the interior of a wall cell, or
//! squeezes through a lattice corner whose two side cells are both walls.
//! The traversal is exact integer arithmetic, so `a` sees `b` iff `b` sees `a`.

use alloc::collections::BTreeSet;

use crate::geom::Coord;
use crate::world::WorldMap;

/// Whether the segment between the centers of `a` and `b` is unobstructed.
/// The endpoints themselves are not tested.
pub fn line_of_sight(map: &WorldMap, a: Coord, b: Coord) -> bool {
    let dx = (b.x - a.x).unsigned_abs() as i64;
    let dy = (b.y - a.y).unsigned_abs() as i64;
    let sx = (b.x - a.x).signum();
    let sy = (b.y - a.y).signum();
    let (mut x, mut y) = (a.x, a.y);
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < dx || iy < dy {
        // Compare the parameters of the next vertical and horizontal
        // boundary crossings: (2ix+1)/(2dx) against (2iy+1)/(2dy).
        let decision = (1 + 2 * ix) * dy - (1 + 2 * iy) * dx;
        if decision == 0 {
            if map.is_wall(Coord::new(x + sx, y)) && map.is_wall(Coord::new(x, y + sy)) {
                return false;
            }
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        let c = Coord::new(x, y);
        if c != b && map.is_wall(c) {
            return false;
        }
    }
    true
}

/// Non-wall cells within Chebyshev `radius` of `from` with a clear line of
/// sight. A viewer standing on open ground always sees its own cell.
pub fn visible_cells(map: &WorldMap, from: Coord, radius: u32) -> BTreeSet<Coord> {
    let mut out = BTreeSet::new();
    if !map.in_bounds(from) {
        return out;
    }
    let r = radius as i32;
    for y in (from.y - r)..=(from.y + r) {
        for x in (from.x - r)..=(from.x + r) {
            let c = Coord::new(x, y);
            if map.in_bounds(c) && !map.is_wall(c) && line_of_sight(map, from, c) {
                out.insert(c);
            }
        }
    }
    out
}
