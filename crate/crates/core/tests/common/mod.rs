//! Independent reference computations shared by the integration tests. None
//! of these go through the library's own planners or ray walker.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regroup_core::{Cell, GridMap, Point, Scenario};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::PathBuf;

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn load_map(rel: &str) -> GridMap {
    let text = std::fs::read_to_string(repo().join(rel)).unwrap();
    GridMap::parse(&text).unwrap()
}

pub fn office() -> GridMap {
    load_map("maps/office.map")
}

/// A scripted scenario from `scenarios/` and the map it runs on.
pub fn scripted(name: &str) -> (GridMap, Scenario) {
    let map_file = if name == "oscillation" {
        "maps/office.map".to_string()
    } else {
        format!("scenarios/{name}.map")
    };
    let map = load_map(&map_file);
    let text = std::fs::read_to_string(repo().join(format!("scenarios/{name}.json"))).unwrap();
    let sc = Scenario::from_json(&text).unwrap();
    sc.validate(&map).unwrap();
    (map, sc)
}

/// `size`×`size` map at 1 m with each cell a wall with probability `density`.
pub fn random_map(size: usize, density: f64, seed: u64) -> GridMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = GridMap::new(size, size, 1.0);
    for y in 0..size {
        for x in 0..size {
            if rng.gen_bool(density) {
                map.set_wall(Cell::new(x, y), true);
            }
        }
    }
    map
}

pub fn random_free_cell(map: &GridMap, rng: &mut impl Rng) -> Cell {
    loop {
        let c = Cell::new(rng.gen_range(0..map.width()), rng.gen_range(0..map.height()));
        if map.is_free(c) {
            return c;
        }
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// 8-connected Dijkstra over free cells with chamfer weights (1, √2) times
/// the resolution. Diagonal steps need only the destination cell free.
pub fn dijkstra8(map: &GridMap, source: Cell) -> Vec<f64> {
    let (w, h) = (map.width() as isize, map.height() as isize);
    let res = map.resolution();
    let mut dist = vec![f64::INFINITY; map.len()];
    let mut heap = BinaryHeap::new();
    let s = map.idx(source);
    dist[s] = 0.0;
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let c = map.cell_at(i);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (x, y) = (c.x as isize + dx, c.y as isize + dy);
                if x < 0 || y < 0 || x >= w || y >= h {
                    continue;
                }
                let n = Cell::new(x as usize, y as usize);
                if !map.is_free(n) {
                    continue;
                }
                let step = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                let nd = d + step * res;
                let j = map.idx(n);
                if nd < dist[j] {
                    dist[j] = nd;
                    heap.push(Entry(nd, j));
                }
            }
        }
    }
    dist
}

/// Minimum total over every injective goal-to-agent map, by enumeration.
/// `costs[agent][goal]`.
pub fn brute_force_assignment(costs: &[Vec<f64>]) -> f64 {
    fn go(costs: &[Vec<f64>], goal: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        let goals = costs[0].len();
        if goal == goals {
            *best = best.min(acc);
            return;
        }
        for a in 0..costs.len() {
            if !used[a] {
                used[a] = true;
                go(costs, goal + 1, used, acc + costs[a][goal], best);
                used[a] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(costs, 0, &mut vec![false; costs.len()], 0.0, &mut best);
    best
}

/// Whether segment `p`-`q` passes through the open interior of the square
/// `[x0, x1] × [y0, y1]` (Liang-Barsky clipping).
fn crosses_interior(p: Point, q: Point, x0: f64, x1: f64, y0: f64, y1: f64) -> bool {
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (den, num_lo, num_hi) in [(dx, x0 - p.x, x1 - p.x), (dy, y0 - p.y, y1 - p.y)] {
        if den == 0.0 {
            // parallel: strictly inside the slab or not at all
            if num_lo >= 0.0 || num_hi <= 0.0 {
                return false;
            }
            continue;
        }
        let (a, b) = (num_lo / den, num_hi / den);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        lo = lo.max(a);
        hi = hi.min(b);
    }
    hi - lo > 1e-12
}

/// Exact sight test: the segment may not cross the interior of any blocked
/// cell (other than `skip`), nor pass through a grid corner whose two side
/// cells are both blocked.
pub fn exact_los(map: &GridMap, p: Point, q: Point, skip: Option<Cell>) -> bool {
    let r = map.resolution();
    let blocked = |x: isize, y: isize| -> bool {
        if x < 0 || y < 0 || x >= map.width() as isize || y >= map.height() as isize {
            return true;
        }
        let c = Cell::new(x as usize, y as usize);
        Some(c) != skip && !map.is_free(c)
    };
    let cx = |v: f64| (v / r).round() as isize;
    let (x_lo, x_hi) = (cx(p.x.min(q.x)) - 1, cx(p.x.max(q.x)) + 1);
    let (y_lo, y_hi) = (cx(p.y.min(q.y)) - 1, cx(p.y.max(q.y)) + 1);
    let interior = |x: isize, y: isize| {
        let (xc, yc) = (x as f64 * r, y as f64 * r);
        crosses_interior(p, q, xc - r / 2.0, xc + r / 2.0, yc - r / 2.0, yc + r / 2.0)
    };
    // endpoints are closed: a point on the boundary of a blocked cell is hidden
    let touches = |e: Point, x: isize, y: isize| {
        let (xc, yc) = (x as f64 * r, y as f64 * r);
        (e.x - xc).abs() <= r / 2.0 + 1e-12 && (e.y - yc).abs() <= r / 2.0 + 1e-12
    };
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            if blocked(x, y) && (interior(x, y) || touches(p, x, y) || touches(q, x, y)) {
                return false;
            }
        }
    }
    // grid corners sit at half-integer cell coordinates
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let corner = Point::new((x as f64 + 0.5) * r, (y as f64 + 0.5) * r);
            let cross = (q.x - p.x) * (corner.y - p.y) - (q.y - p.y) * (corner.x - p.x);
            if cross.abs() > 1e-9 {
                continue;
            }
            let t = if (q.x - p.x).abs() > (q.y - p.y).abs() {
                (corner.x - p.x) / (q.x - p.x)
            } else {
                (corner.y - p.y) / (q.y - p.y)
            };
            if !(t > 1e-12 && t < 1.0 - 1e-12) {
                continue;
            }
            let around = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];
            let sides: Vec<(isize, isize)> = around.into_iter().filter(|&(a, b)| !interior(a, b)).collect();
            if sides.len() == 2 && sides.iter().all(|&(a, b)| blocked(a, b)) {
                return false;
            }
        }
    }
    true
}

/// Connected components of the pairwise predicate, by union-find.
pub fn components(n: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if linked(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g[0] == r) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}
