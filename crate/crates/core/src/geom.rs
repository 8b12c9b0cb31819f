//! Grid coordinates.

use core::fmt;

use serde::{Deserialize, Serialize};

/// A cell index pair. `y` grows southwards.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(i32, i32)", into = "(i32, i32)")]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Coord) -> u32 {
        let dx = (self.x - other.x).unsigned_abs();
        let dy = (self.y - other.y).unsigned_abs();
        dx.max(dy)
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        (self.x - other.x).unsigned_abs() + (self.y - other.y).unsigned_abs()
    }

    /// Chebyshev distance of at most one, including the cell itself.
    pub fn is_adjacent(self, other: Coord) -> bool {
        self.chebyshev(other) <= 1
    }

    /// 4-neighbours in expansion order N, E, S, W.
    pub fn neighbors4(self) -> [Coord; 4] {
        Dir::ALL.map(|d| d.step(self))
    }
}

impl From<(i32, i32)> for Coord {
    fn from((x, y): (i32, i32)) -> Self {
        Self::new(x, y)
    }
}

impl From<Coord> for (i32, i32) {
    fn from(c: Coord) -> Self {
        (c.x, c.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    North,
    East,
    South,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::East, Dir::South, Dir::West];

    pub fn step(self, c: Coord) -> Coord {
        match self {
            Dir::North => c.offset(0, -1),
            Dir::East => c.offset(1, 0),
            Dir::South => c.offset(0, 1),
            Dir::West => c.offset(-1, 0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let a = Coord::new(1, 1);
        let b = Coord::new(4, -1);
        assert_eq!(a.chebyshev(b), 3);
        assert_eq!(a.manhattan(b), 5);
        assert!(a.is_adjacent(Coord::new(2, 2)));
        assert!(!a.is_adjacent(Coord::new(3, 2)));
    }

    #[test]
    fn serializes_as_pair() {
        let c = Coord::new(3, 7);
        assert_eq!(serde_json::to_string(&c).unwrap(), "[3,7]");
        let back: Coord = serde_json::from_str("[3,7]").unwrap();
        assert_eq!(back, c);
    }
}
