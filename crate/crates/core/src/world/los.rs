//! Conservative ray traversal over the grid.
//!
//! Every cell the segment touches is visited, including both side cells when
//! the segment passes exactly through a cell corner. Grazing a single
//! occupied corner is allowed; squeezing between two occupied cells that
//! meet at the corner is not, so rays cannot cut through diagonal walls.

use super::{GridMap, WorldError};
use crate::geom::{Cell, Point};

const CORNER_EPS: f64 = 1e-9;

/// Visits every cell touched by the segment `a -> b`, in order from `a`.
/// `visit` reports whether a cell is passable; the walk stops with `false`
/// at the first impassable cell, or at a corner whose two side cells are
/// both impassable.
/// Both endpoints must be inside the grid.
pub(crate) fn traverse(
    map: &GridMap,
    a: Point,
    b: Point,
    mut visit: impl FnMut(usize, usize) -> bool,
) -> bool {
    let inv = 1.0 / map.resolution();
    let (x0, y0) = (a.x * inv + 0.5, a.y * inv + 0.5);
    let (x1, y1) = (b.x * inv + 0.5, b.y * inv + 0.5);
    let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
    let (mut ix, mut iy) = (clamp(x0, map.width()), clamp(y0, map.height()));
    let (ex, ey) = (clamp(x1, map.width()), clamp(y1, map.height()));
    if !visit(ix, iy) {
        return false;
    }
    let (dx, dy) = (x1 - x0, y1 - y0);
    let step_x: isize = if dx > 0.0 { 1 } else if dx < 0.0 { -1 } else { 0 };
    let step_y: isize = if dy > 0.0 { 1 } else if dy < 0.0 { -1 } else { 0 };
    let delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
    let mut t_x = match step_x {
        1 => (ix as f64 + 1.0 - x0) / dx,
        -1 => (x0 - ix as f64) / -dx,
        _ => f64::INFINITY,
    };
    let mut t_y = match step_y {
        1 => (iy as f64 + 1.0 - y0) / dy,
        -1 => (y0 - iy as f64) / -dy,
        _ => f64::INFINITY,
    };
    let mut budget = ix.abs_diff(ex) + iy.abs_diff(ey);
    while (ix, iy) != (ex, ey) && budget > 0 {
        let nx = ix.wrapping_add_signed(step_x);
        let ny = iy.wrapping_add_signed(step_y);
        if (t_x - t_y).abs() < CORNER_EPS {
            if step_x != 0 && step_y != 0 {
                let side_x = visit(nx, iy);
                let side_y = visit(ix, ny);
                if !side_x && !side_y {
                    return false;
                }
                ix = nx;
                iy = ny;
                t_x += delta_x;
                t_y += delta_y;
                budget = budget.saturating_sub(2);
            } else if step_x != 0 {
                ix = nx;
                t_x += delta_x;
                budget -= 1;
            } else {
                iy = ny;
                t_y += delta_y;
                budget -= 1;
            }
        } else if t_x < t_y {
            ix = nx;
            t_x += delta_x;
            budget -= 1;
        } else {
            iy = ny;
            t_y += delta_y;
            budget -= 1;
        }
        if ix >= map.width() || iy >= map.height() {
            break;
        }
        if !visit(ix, iy) {
            return false;
        }
    }
    true
}

/// Orders the endpoints so that `los(p, q)` and `los(q, p)` trace the exact
/// same floating-point ray.
fn canonical(p: Point, q: Point) -> (Point, Point) {
    if (p.x, p.y) <= (q.x, q.y) {
        (p, q)
    } else {
        (q, p)
    }
}

/// Segment clear of occupied cells. Endpoints are assumed inside the grid.
pub(crate) fn clear_segment(map: &GridMap, p: Point, q: Point) -> bool {
    let (a, b) = canonical(p, q);
    let w = map.width();
    let cells = map.cells();
    traverse(map, a, b, |x, y| !cells[y * w + x])
}

/// True iff the straight segment `p -> q` crosses no occupied cell. The
/// endpoints' own cells count, so an occupied endpoint yields `false`.
pub fn line_of_sight(map: &GridMap, p: Point, q: Point) -> Result<bool, WorldError> {
    if map.cell_of(p).is_none() {
        return Err(WorldError::OutOfBounds(p));
    }
    if map.cell_of(q).is_none() {
        return Err(WorldError::OutOfBounds(q));
    }
    Ok(clear_segment(map, p, q))
}

/// Whether `target` can be seen from `eye`: some sight line reaches the cell
/// without crossing an occupied cell other than `target` itself. Free cells
/// are sighted at their centre; occupied cells also at their four face
/// midpoints so an obstacle's whole visible face is seen, not just the cells
/// facing the observer head-on.
pub(crate) fn cell_visible(map: &GridMap, eye: Point, target: Cell) -> bool {
    let w = map.width();
    let cells = map.cells();
    let t_idx = map.idx(target);
    let c = map.center(target);
    let ray = |to: Point| {
        let (a, b) = canonical(eye, to);
        traverse(map, a, b, |x, y| {
            let i = y * w + x;
            i == t_idx || !cells[i]
        })
    };
    if ray(c) {
        return true;
    }
    if !cells[t_idx] {
        return false;
    }
    let h = 0.5 * map.resolution();
    [
        Point::new(c.x - h, c.y),
        Point::new(c.x + h, c.y),
        Point::new(c.x, c.y - h),
        Point::new(c.x, c.y + h),
    ]
    .into_iter()
    .filter(|p| map.cell_of(*p).is_some())
    .any(ray)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Region;

    fn walled() -> GridMap {
        let mut m = GridMap::new(10, 10, 1.0);
        m.fill_walls(Region::new(5, 0, 5, 9)).unwrap();
        m
    }

    fn touched(map: &GridMap, a: Point, b: Point) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        traverse(map, a, b, |x, y| {
            v.push((x, y));
            true
        });
        v
    }

    #[test]
    fn zero_length_segment() {
        let m = GridMap::new(10, 10, 1.0);
        let p = Point::new(3.0, 3.0);
        assert!(line_of_sight(&m, p, p).unwrap());
    }

    #[test]
    fn empty_map_always_clear() {
        let m = GridMap::new(10, 10, 1.0);
        assert!(line_of_sight(&m, Point::new(0.0, 0.0), Point::new(9.0, 7.3)).unwrap());
    }

    #[test]
    fn wall_blocks() {
        let m = walled();
        assert!(!line_of_sight(&m, Point::new(2.0, 2.0), Point::new(8.0, 2.0)).unwrap());
        assert!(line_of_sight(&m, Point::new(2.0, 2.0), Point::new(4.0, 9.0)).unwrap());
    }

    #[test]
    fn out_of_bounds_is_an_error() {
        let m = walled();
        assert!(line_of_sight(&m, Point::new(-3.0, 2.0), Point::new(1.0, 1.0)).is_err());
        assert!(line_of_sight(&m, Point::new(1.0, 1.0), Point::new(1.0, 10.0)).is_err());
    }

    #[test]
    fn diagonal_through_corner_touches_both_sides() {
        let m = GridMap::new(4, 4, 1.0);
        let cells = touched(&m, Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert_eq!(cells, vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn grazing_one_corner_is_clear() {
        let mut m = GridMap::new(4, 4, 1.0);
        m.set_wall(Cell::new(1, 0), true);
        assert!(line_of_sight(&m, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap());
    }

    #[test]
    fn squeezing_between_two_corners_is_blocked() {
        let mut m = GridMap::new(4, 4, 1.0);
        m.set_wall(Cell::new(1, 0), true);
        m.set_wall(Cell::new(0, 1), true);
        assert!(!line_of_sight(&m, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap());
        assert!(!line_of_sight(&m, Point::new(1.0, 1.0), Point::new(0.0, 0.0)).unwrap());
    }

    #[test]
    fn traversal_is_contiguous() {
        let m = GridMap::new(20, 20, 1.0);
        let cells = touched(&m, Point::new(0.3, 1.2), Point::new(17.7, 11.1));
        for w in cells.windows(2) {
            assert!(w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1) <= 2);
        }
        assert_eq!(*cells.last().unwrap(), (18, 11));
    }

    #[test]
    fn wall_face_is_visible_obliquely() {
        let mut m = GridMap::new(30, 30, 1.0);
        m.fill_walls(Region::new(5, 10, 25, 10)).unwrap();
        let eye = Point::new(2.0, 2.0);
        assert!(cell_visible(&m, eye, Cell::new(20, 10)));
        // the row behind the wall stays hidden
        assert!(!cell_visible(&m, eye, Cell::new(20, 11)));
    }
}
