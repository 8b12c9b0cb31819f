//! Grid pathfinding: 4-connected A* with a Manhattan heuristic.

use alloc::collections::{BTreeSet, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::geom::{Coord, Dir};
use crate::world::WorldMap;

/// Open-set entry. Ties on `f` fall back to `h`, then insertion order, so
/// expansion order is fully deterministic.
#[derive(PartialEq, Eq)]
struct Node {
    f: u32,
    h: u32,
    seq: u64,
    at: Coord,
}

impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.f, self.h, self.seq).cmp(&(o.f, o.h, o.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn passable(map: &WorldMap, blocked: &BTreeSet<Coord>, c: Coord) -> bool {
    map.is_walkable(c) && !blocked.contains(&c)
}

/// Shortest path from `from` to `to`, excluding `from` and including `to`.
///
/// Walls, furniture cells and every coord in `blocked` are impassable
/// (`from` itself is exempt). Neighbors expand in N, E, S, W order. Returns
/// `None` when the target cannot be reached, and an empty path when
/// `from == to`.
pub fn compute_path(map: &WorldMap, from: Coord, to: Coord, blocked: &BTreeSet<Coord>) -> Option<Vec<Coord>> {
    if !map.in_bounds(from) || !map.in_bounds(to) {
        return None;
    }
    if from == to {
        return Some(Vec::new());
    }
    if !passable(map, blocked, to) {
        return None;
    }
    let n = map.cells.len();
    let idx = |c: Coord| map.cell_index(c).expect("in bounds");
    let mut g = vec![u32::MAX; n];
    let mut parent: Vec<Option<Coord>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    g[idx(from)] = 0;
    let h0 = from.manhattan(to);
    open.push(Reverse(Node { f: h0, h: h0, seq, at: from }));
    while let Some(Reverse(node)) = open.pop() {
        let i = idx(node.at);
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if node.at == to {
            let mut path = vec![to];
            let mut cur = to;
            while let Some(p) = parent[idx(cur)] {
                if p == from {
                    break;
                }
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for d in Dir::ALL {
            let next = d.step(node.at);
            if !map.in_bounds(next) || !passable(map, blocked, next) {
                continue;
            }
            let j = idx(next);
            let cost = g[i] + 1;
            if closed[j] || cost >= g[j] {
                continue;
            }
            g[j] = cost;
            parent[j] = Some(node.at);
            seq += 1;
            let h = next.manhattan(to);
            open.push(Reverse(Node { f: cost + h, h, seq, at: next }));
        }
    }
    None
}

/// Breadth-first search from `from` to the nearest passable cell that
/// satisfies `goal`, with the same passability rules as [`compute_path`].
/// Ties at equal distance resolve by N, E, S, W expansion order.
pub fn nearest_matching(
    map: &WorldMap,
    from: Coord,
    blocked: &BTreeSet<Coord>,
    goal: impl Fn(Coord) -> bool,
) -> Option<Coord> {
    if !map.in_bounds(from) {
        return None;
    }
    if goal(from) {
        return Some(from);
    }
    let mut seen = vec![false; map.cells.len()];
    let idx = |c: Coord| map.cell_index(c).expect("in bounds");
    seen[idx(from)] = true;
    let mut q = VecDeque::from([from]);
    while let Some(c) = q.pop_front() {
        for d in Dir::ALL {
            let n = d.step(c);
            if !map.in_bounds(n) || seen[idx(n)] || !passable(map, blocked, n) {
                continue;
            }
            seen[idx(n)] = true;
            if goal(n) {
                return Some(n);
            }
            q.push_back(n);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{MapDocument, WorldMap};

    fn open_map(w: u32, h: u32) -> WorldMap {
        WorldMap::from_document(&MapDocument::open_floor(w, h)).unwrap()
    }

    #[test]
    fn identity_is_empty() {
        let m = open_map(3, 3);
        assert_eq!(compute_path(&m, Coord::new(0, 0), Coord::new(0, 0), &BTreeSet::new()), Some(Vec::new()));
    }

    #[test]
    fn corridor_is_straight() {
        let m = open_map(5, 1);
        let p = compute_path(&m, Coord::new(0, 0), Coord::new(4, 0), &BTreeSet::new()).unwrap();
        assert_eq!(p, [Coord::new(1, 0), Coord::new(2, 0), Coord::new(3, 0), Coord::new(4, 0)]);
    }

    #[test]
    fn occupied_target_is_unreachable() {
        let m = open_map(5, 1);
        let blocked = BTreeSet::from([Coord::new(2, 0)]);
        assert_eq!(compute_path(&m, Coord::new(0, 0), Coord::new(4, 0), &blocked), None);
        assert_eq!(compute_path(&m, Coord::new(0, 0), Coord::new(2, 0), &blocked), None);
    }

    #[test]
    fn nearest_matching_finds_closest() {
        let m = open_map(5, 5);
        let got = nearest_matching(&m, Coord::new(0, 0), &BTreeSet::new(), |c| c.x == 3);
        assert_eq!(got, Some(Coord::new(3, 0)));
    }
}
