//! Exploration of a room whose known accesses are blocked: walk along its
//! walls looking for a new opening.

use crate::geom::{dedup_path, Cell, Path, Point};
use crate::world::{clear_segment, GridMap};
use std::collections::VecDeque;

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

/// The neighbour of `c` at `(dx, dy)` if it is on the grid and free.
fn step(map: &GridMap, c: Cell, dx: isize, dy: isize) -> Option<Cell> {
    let (x, y) = (c.x as isize + dx, c.y as isize + dy);
    if x < 0 || y < 0 || x >= map.width() as isize || y >= map.height() as isize {
        return None;
    }
    let n = Cell::new(x as usize, y as usize);
    if map.is_occupied(n) {
        return None;
    }
    Some(n)
}

/// Free cells reachable from `start` (indexed like the map).
pub fn free_component(map: &GridMap, start: Cell) -> Vec<bool> {
    let mut seen = vec![false; map.len()];
    if !map.in_bounds(start) || map.is_occupied(start) {
        return seen;
    }
    seen[map.idx(start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for (dx, dy) in NEIGHBORS {
            if let Some(n) = step(map, c, dx, dy) {
                let i = map.idx(n);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    seen
}

/// Breadth-first cell route between two free cells.
fn grid_route(map: &GridMap, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    let mut prev = vec![usize::MAX; map.len()];
    let s = map.idx(from);
    prev[s] = s;
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        if c == to {
            let mut out = vec![to];
            let mut i = map.idx(to);
            while i != s {
                i = prev[i];
                out.push(map.cell_at(i));
            }
            out.reverse();
            return Some(out);
        }
        for (dx, dy) in NEIGHBORS {
            if let Some(n) = step(map, c, dx, dy) {
                let i = map.idx(n);
                if prev[i] == usize::MAX {
                    prev[i] = map.idx(c);
                    queue.push_back(n);
                }
            }
        }
    }
    None
}

/// Nearest free cell to `p` within a few cells, the cell of `p` first.
pub(crate) fn nearest_free(map: &GridMap, p: Point, radius: usize) -> Option<Cell> {
    let c = map.cell_of(p)?;
    if map.is_free(c) {
        return Some(c);
    }
    let r = radius as isize;
    let mut best: Option<(f64, Cell)> = None;
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (c.x as isize + dx, c.y as isize + dy);
            if x < 0 || y < 0 || x >= map.width() as isize || y >= map.height() as isize {
                continue;
            }
            let n = Cell::new(x as usize, y as usize);
            if map.is_free(n) {
                let d = map.center(n).dist(p);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, n));
                }
            }
        }
    }
    best.map(|(_, n)| n)
}

/// A wall-following circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrappedTour {
    /// From the agent along the circuit and back to the circuit start.
    pub path: Path,
    /// The agent is itself inside the blocked room.
    pub inside: bool,
    /// Cells of the room around `blocked_access`.
    pub room_cells: usize,
}

/// Builds the exploration circuit around the room containing
/// `blocked_access`, as known on `map`.
///
/// An agent inside the room walks its wall-adjacent cells; an agent outside
/// walks the reachable cells hugging the room's outer walls (within two cells
/// of the room). Circuit cells are chained nearest-first from the agent, which
/// follows the walls, and the circuit closes on its start. Returns `None` when
/// the agent has no circuit to walk.
pub fn trapped_routine(agent: Point, map: &GridMap, blocked_access: Point) -> Option<TrappedTour> {
    let ac = nearest_free(map, agent, 1)?;
    let room_seed = nearest_free(map, blocked_access, 3)?;
    let room = free_component(map, room_seed);
    let inside = room[map.idx(ac)];
    let reach = if inside { room.clone() } else { free_component(map, ac) };
    let (w, h) = (map.width() as isize, map.height() as isize);

    let mut ring: Vec<Cell> = Vec::new();
    if inside {
        for i in 0..map.len() {
            if !room[i] {
                continue;
            }
            let c = map.cell_at(i);
            let at_wall = [(1, 0), (0, 1), (-1, 0), (0, -1)].iter().any(|&(dx, dy)| {
                let (x, y) = (c.x as isize + dx, c.y as isize + dy);
                x < 0 || y < 0 || x >= w || y >= h || map.is_occupied(Cell::new(x as usize, y as usize))
            });
            if at_wall {
                ring.push(c);
            }
        }
    } else {
        let mut near = vec![false; map.len()];
        for i in 0..map.len() {
            if !room[i] {
                continue;
            }
            let c = map.cell_at(i);
            for dy in -2..=2isize {
                for dx in -2..=2isize {
                    let (x, y) = (c.x as isize + dx, c.y as isize + dy);
                    if x >= 0 && y >= 0 && x < w && y < h {
                        near[(y * w + x) as usize] = true;
                    }
                }
            }
        }
        ring = (0..map.len())
            .filter(|&i| near[i] && reach[i])
            .map(|i| map.cell_at(i))
            .collect();
    }
    if ring.is_empty() {
        return None;
    }

    // nearest-neighbour chaining from the agent
    let mut order = Vec::with_capacity(ring.len());
    let mut used = vec![false; ring.len()];
    let d2 = |a: Cell, b: Cell| {
        let (dx, dy) = (a.x as f64 - b.x as f64, a.y as f64 - b.y as f64);
        dx * dx + dy * dy
    };
    let mut cur = ac;
    for _ in 0..ring.len() {
        let mut best = usize::MAX;
        let mut bd = f64::INFINITY;
        for (k, &c) in ring.iter().enumerate() {
            if !used[k] {
                let d = d2(cur, c);
                if d < bd {
                    bd = d;
                    best = k;
                }
            }
        }
        used[best] = true;
        cur = ring[best];
        order.push(cur);
    }
    order.push(order[0]);

    let mut path = vec![agent];
    let mut at = ac;
    for &next in &order {
        if next == at {
            path.push(map.center(next));
            continue;
        }
        let direct = at.chebyshev(next) <= 1 && {
            let (dx, dy) = (next.x as isize - at.x as isize, next.y as isize - at.y as isize);
            step(map, at, dx, dy).is_some()
        };
        if direct || clear_segment(map, map.center(at), map.center(next)) {
            path.push(map.center(next));
        } else if let Some(route) = grid_route(map, at, next) {
            path.extend(route.into_iter().skip(1).map(|c| map.center(c)));
        } else {
            continue;
        }
        at = next;
    }
    dedup_path(&mut path);
    Some(TrappedTour {
        path,
        inside,
        room_cells: room.iter().filter(|&&r| r).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Region;

    fn room_map(door_open: bool) -> GridMap {
        let mut m = GridMap::new(30, 30, 1.0);
        for r in [
            Region::new(10, 10, 20, 10),
            Region::new(10, 20, 20, 20),
            Region::new(10, 10, 10, 20),
            Region::new(20, 10, 20, 20),
        ] {
            m.fill_walls(r).unwrap();
        }
        m.add_door("d", Region::new(15, 10, 15, 10), door_open).unwrap();
        m
    }

    #[test]
    fn component_passes_diagonal_squeezes() {
        let mut m = GridMap::new(3, 3, 1.0);
        m.set_wall(Cell::new(1, 0), true);
        m.set_wall(Cell::new(0, 1), true);
        let comp = free_component(&m, Cell::new(0, 0));
        assert_eq!(comp.iter().filter(|&&c| c).count(), 7);
    }

    #[test]
    fn sealed_room_circuit_inside() {
        let m = room_map(false);
        let t = trapped_routine(Point::new(15.0, 15.0), &m, Point::new(15.0, 15.0)).unwrap();
        assert!(t.inside);
        assert_eq!(t.room_cells, 81);
        // visits every wall-adjacent cell of the 9x9 interior and closes
        for x in 11..=19 {
            for y in [11.0, 19.0] {
                assert!(t.path.contains(&Point::new(x as f64, y)));
            }
        }
        let first = t.path[1];
        assert_eq!(*t.path.last().unwrap(), first);
        for w in t.path.windows(2) {
            assert!(clear_segment(&m, w[0], w[1]));
        }
    }

    #[test]
    fn outside_circuit_hugs_outer_walls() {
        let m = room_map(false);
        let t = trapped_routine(Point::new(2.0, 2.0), &m, Point::new(15.0, 15.0)).unwrap();
        assert!(!t.inside);
        assert!(t.path.iter().skip(1).all(|p| {
            let c = m.cell_of(*p).unwrap();
            (8..=22).contains(&c.x) && (8..=22).contains(&c.y) && m.is_free(c)
        }));
        assert!(t.path.contains(&Point::new(15.0, 9.0)));
    }
}
