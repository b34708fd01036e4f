//! Planar geometry shared by every module: continuous points in meters,
//! integer grid cells, and polyline helpers.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A continuous position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Integer grid cell, `x` is the column and `y` the row (row 0 at the bottom).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    /// Chebyshev distance in cells.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

/// A polyline of waypoints.
pub type Path = Vec<Point>;

/// Sum of Euclidean segment lengths.
pub fn path_length(path: &[Point]) -> f64 {
    path.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point reached after travelling `s` meters along `path`, clamped to its ends.
pub fn point_along(path: &[Point], s: f64) -> Option<Point> {
    let first = *path.first()?;
    if s <= 0.0 {
        return Some(first);
    }
    let mut left = s;
    for w in path.windows(2) {
        let seg = w[0].dist(w[1]);
        if left <= seg {
            if seg == 0.0 {
                return Some(w[1]);
            }
            return Some(w[0].lerp(w[1], left / seg));
        }
        left -= seg;
    }
    path.last().copied()
}

/// Removes consecutive duplicate waypoints.
pub fn dedup_path(path: &mut Path) {
    path.dedup_by(|a, b| a == b);
}
