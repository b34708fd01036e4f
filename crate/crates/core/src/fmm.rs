//! Fast Marching distance fields over the free space of a grid, and path
//! extraction by steepest descent.
//!
//! The solver is first order on the 8-neighbourhood: besides the single-cell
//! updates along axes and diagonals, each of the eight triangles formed
//! by the cell, an axis neighbour and the adjacent diagonal neighbour gives
//! the exact minimum of the linear interpolation across the triangle edge.
//! This keeps every value between the straight-line distance and the
//! 8-connected chamfer distance (see the tests).

use crate::geom::{dedup_path, path_length, Cell, Path, Point};
use crate::world::GridMap;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FmmError {
    #[error("source {0} is outside the grid")]
    OutOfBounds(Point),
    #[error("source {0} lies on an occupied cell")]
    SourceOccupied(Point),
    #[error("no path from {from}: unreachable")]
    Unreachable { from: Point },
}

/// Geodesic cost from a source to every cell, `f64::INFINITY` where
/// unreachable.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    source: Point,
    source_cell: Cell,
    values: Vec<f64>,
    map_stamp: u64,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    value: f64,
    idx: u32,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Descent order for ties: E, N, W, S, NE, NW, SW, SE.
const DESCENT: [(isize, isize); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

#[inline]
fn triangle(ua: f64, ud: f64, h: f64) -> f64 {
    let t = (ua - ud) / h;
    if t <= 0.0 {
        ua + h
    } else if t >= FRAC_1_SQRT_2 {
        ud + SQRT_2 * h
    } else {
        ua + h * (1.0 - t * t).sqrt()
    }
}

const CACHE_CAP: usize = 256;

thread_local! {
    static FIELDS: RefCell<HashMap<(u64, usize), Rc<Vec<f64>>>> = RefCell::new(HashMap::new());
}

/// [`propagate`], memoised per thread on the map fingerprint and the source
/// cell, which are all the values depend on.
pub(crate) fn propagate_cached(map: &GridMap, source: Point) -> Result<DistanceField, FmmError> {
    let sc = map.cell_of(source).ok_or(FmmError::OutOfBounds(source))?;
    let key = (map.fingerprint(), map.idx(sc));
    if let Some(values) = FIELDS.with(|f| f.borrow().get(&key).cloned()) {
        return Ok(DistanceField {
            width: map.width(),
            height: map.height(),
            resolution: map.resolution(),
            source,
            source_cell: sc,
            values: values.as_ref().clone(),
            map_stamp: key.0,
        });
    }
    let field = propagate(map, source)?;
    FIELDS.with(|f| {
        let mut f = f.borrow_mut();
        if f.len() >= CACHE_CAP {
            f.clear();
        }
        f.insert(key, Rc::new(field.values.clone()));
    });
    Ok(field)
}

/// Propagates a wavefront from `source` over the free cells of `map`.
pub fn propagate(map: &GridMap, source: Point) -> Result<DistanceField, FmmError> {
    let sc = map.cell_of(source).ok_or(FmmError::OutOfBounds(source))?;
    if map.is_occupied(sc) {
        return Err(FmmError::SourceOccupied(source));
    }
    let (w, hgt) = (map.width() as isize, map.height() as isize);
    let h = map.resolution();
    let occ = map.cells();
    let n = occ.len();
    let mut values = vec![f64::INFINITY; n];
    let mut known = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(256);
    let s_idx = map.idx(sc);
    values[s_idx] = 0.0;
    heap.push(Frontier {
        value: 0.0,
        idx: s_idx as u32,
    });

    let at = |x: isize, y: isize| -> Option<usize> {
        (x >= 0 && y >= 0 && x < w && y < hgt).then(|| (y * w + x) as usize)
    };

    while let Some(Frontier { value, idx }) = heap.pop() {
        let u = idx as usize;
        if known[u] || value > values[u] {
            continue;
        }
        known[u] = true;
        let (ux, uy) = ((u as isize) % w, (u as isize) / w);
        let uv = values[u];
        for (dx, dy) in DESCENT {
            let (jx, jy) = (ux - dx, uy - dy);
            let Some(j) = at(jx, jy) else { continue };
            if occ[j] || known[j] {
                continue;
            }
            // u sits at offset (dx, dy) from j
            let mut best = values[j];
            if dx == 0 || dy == 0 {
                best = best.min(uv + h);
                // triangles with u as the axis vertex
                let perps = if dx == 0 { [(1, 0), (-1, 0)] } else { [(0, 1), (0, -1)] };
                for (px, py) in perps {
                    if let Some(d) = at(ux + px, uy + py) {
                        if known[d] {
                            best = best.min(triangle(uv, values[d], h));
                        }
                    }
                }
            } else {
                let ox = at(jx + dx, jy);
                let oy = at(jx, jy + dy);
                best = best.min(uv + SQRT_2 * h);
                // triangles with u as the diagonal vertex
                for a in [ox, oy].into_iter().flatten() {
                    if known[a] {
                        best = best.min(triangle(values[a], uv, h));
                    }
                }
            }
            if best < values[j] {
                values[j] = best;
                heap.push(Frontier {
                    value: best,
                    idx: j as u32,
                });
            }
        }
    }

    Ok(DistanceField {
        width: map.width(),
        height: map.height(),
        resolution: h,
        source,
        source_cell: sc,
        values,
        map_stamp: map.fingerprint(),
    })
}

impl DistanceField {
    pub fn source(&self) -> Point {
        self.source
    }

    pub fn source_cell(&self) -> Cell {
        self.source_cell
    }

    /// Fingerprint of the map this field was computed on.
    pub fn map_stamp(&self) -> u64 {
        self.map_stamp
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn value(&self, c: Cell) -> f64 {
        if c.x < self.width && c.y < self.height {
            self.values[c.y * self.width + c.x]
        } else {
            f64::INFINITY
        }
    }

    fn cell_of(&self, p: Point) -> Option<Cell> {
        let gx = (p.x / self.resolution + 0.5).floor();
        let gy = (p.y / self.resolution + 0.5).floor();
        if !(gx >= 0.0 && gy >= 0.0) || gx >= self.width as f64 || gy >= self.height as f64 {
            return None;
        }
        Some(Cell::new(gx as usize, gy as usize))
    }

    fn center(&self, c: Cell) -> Point {
        Point::new(c.x as f64 * self.resolution, c.y as f64 * self.resolution)
    }

    /// Field value at the cell containing `p`.
    pub fn value_at(&self, p: Point) -> f64 {
        self.cell_of(p).map_or(f64::INFINITY, |c| self.value(c))
    }

    pub fn is_reachable(&self, p: Point) -> bool {
        self.value_at(p).is_finite()
    }

    fn finite(&self, x: isize, y: isize) -> Option<(Cell, f64)> {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            return None;
        }
        let c = Cell::new(x as usize, y as usize);
        let v = self.value(c);
        v.is_finite().then_some((c, v))
    }

    /// Steepest-descent path from `from` down to the source. Steps go to the
    /// lowest-valued neighbour, diagonals included.
    pub fn extract_path(&self, from: Point) -> Result<Path, FmmError> {
        let mut c = self
            .cell_of(from)
            .filter(|c| self.value(*c).is_finite())
            .ok_or(FmmError::Unreachable { from })?;
        let mut path = vec![from, self.center(c)];
        while c != self.source_cell {
            let cur = self.value(c);
            let (cx, cy) = (c.x as isize, c.y as isize);
            let mut best: Option<(Cell, f64)> = None;
            for (dx, dy) in DESCENT {
                let Some((nc, v)) = self.finite(cx + dx, cy + dy) else {
                    continue;
                };
                if v < cur && best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((nc, v));
                }
            }
            let (next, _) = best.expect("finite non-source cell has a lower neighbour");
            c = next;
            path.push(self.center(c));
        }
        path.push(self.source);
        dedup_path(&mut path);
        Ok(path)
    }

    /// Row-major CSV dump, top row first, `inf` for unreachable cells.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for y in (0..self.height).rev() {
            let row: Vec<String> = (0..self.width)
                .map(|x| {
                    let v = self.values[y * self.width + x];
                    if v.is_finite() {
                        format!("{v}")
                    } else {
                        "inf".to_string()
                    }
                })
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Length of a path in meters.
pub fn path_cost(path: &[Point]) -> f64 {
    path_length(path)
}

/// Shortest path between two points, ordered `from -> to`.
pub fn shortest_path(map: &GridMap, from: Point, to: Point) -> Result<Path, FmmError> {
    let field = propagate(map, from)?;
    let mut p = field.extract_path(to)?;
    p.reverse();
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Region;

    #[test]
    fn source_is_zero() {
        let m = GridMap::new(10, 10, 1.0);
        let f = propagate(&m, Point::new(3.0, 4.0)).unwrap();
        assert_eq!(f.value(Cell::new(3, 4)), 0.0);
    }

    #[test]
    fn straight_line_is_exact() {
        let m = GridMap::new(30, 10, 0.5);
        let f = propagate(&m, Point::new(1.0, 2.0)).unwrap();
        for k in 0..20 {
            let v = f.value(Cell::new(2 + k, 4));
            assert!((v - k as f64 * 0.5).abs() < 1e-12, "{k}: {v}");
        }
    }

    #[test]
    fn pure_diagonal_is_exact() {
        let m = GridMap::new(20, 20, 1.0);
        let f = propagate(&m, Point::new(0.0, 0.0)).unwrap();
        assert!((f.value(Cell::new(12, 12)) - 12.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn occupied_source_rejected() {
        let mut m = GridMap::new(10, 10, 1.0);
        m.set_wall(Cell::new(2, 2), true);
        assert_eq!(
            propagate(&m, Point::new(2.0, 2.0)).unwrap_err(),
            FmmError::SourceOccupied(Point::new(2.0, 2.0))
        );
    }

    #[test]
    fn sealed_room_is_infinite() {
        let mut m = GridMap::new(20, 20, 1.0);
        for r in [
            Region::new(10, 10, 15, 10),
            Region::new(10, 15, 15, 15),
            Region::new(10, 10, 10, 15),
            Region::new(15, 10, 15, 15),
        ] {
            m.fill_walls(r).unwrap();
        }
        let f = propagate(&m, Point::new(2.0, 2.0)).unwrap();
        assert!(f.value(Cell::new(12, 12)).is_infinite());
        assert!(f.value(Cell::new(10, 10)).is_infinite());
        let err = f.extract_path(Point::new(12.0, 12.0)).unwrap_err();
        assert!(err.to_string().contains("unreachable"));
    }

    #[test]
    fn path_from_source_is_single_point() {
        let m = GridMap::new(10, 10, 1.0);
        let s = Point::new(4.0, 4.0);
        let f = propagate(&m, s).unwrap();
        assert_eq!(f.extract_path(s).unwrap(), vec![s]);
    }

    #[test]
    fn straight_descent() {
        let m = GridMap::new(30, 10, 1.0);
        let s = Point::new(5.0, 5.0);
        let f = propagate(&m, s).unwrap();
        let p = f.extract_path(Point::new(15.0, 5.0)).unwrap();
        assert!((path_cost(&p) - 10.0).abs() < 1e-12);
        assert_eq!(p.len(), 11);
    }

    #[test]
    fn path_cost_examples() {
        assert_eq!(path_cost(&[Point::new(1.0, 1.0)]), 0.0);
        assert_eq!(path_cost(&[Point::new(0.0, 0.0), Point::new(3.0, 0.0)]), 3.0);
        let square = [
            Point::new(0.0, 0.0),
            Point::new(5.0, 0.0),
            Point::new(5.0, 5.0),
            Point::new(0.0, 5.0),
            Point::new(0.0, 0.0),
        ];
        assert_eq!(path_cost(&square), 20.0);
    }

    #[test]
    fn csv_marks_unreachable() {
        let mut m = GridMap::new(3, 2, 1.0);
        m.set_wall(Cell::new(2, 1), true);
        let csv = propagate(&m, Point::new(0.0, 0.0)).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].ends_with(",inf"));
        assert!(lines[1].starts_with("0,1,2"));
    }
}
