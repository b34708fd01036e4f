//! Shared inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regroup_core::{GridMap, Point, Region};
use std::path::Path;

/// The 100×100 office map shipped with the workspace.
pub fn office_map() -> GridMap {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../maps/office.map");
    let text = std::fs::read_to_string(&path).expect("office map present");
    GridMap::parse(&text).expect("office map parses")
}

/// An open `size`×`size` grid with a border wall and `density` of the
/// interior walled off in single cells.
pub fn random_map(size: usize, density: f64, seed: u64) -> GridMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = GridMap::new(size, size, 1.0);
    for x in 0..size {
        for y in 0..size {
            let border = x == 0 || y == 0 || x == size - 1 || y == size - 1;
            if border || rng.gen_bool(density) {
                m.fill_walls(Region::new(x, y, x, y)).expect("inside the grid");
            }
        }
    }
    m
}

/// Uniform costs in [0, 100) for `agents` × `goals`.
pub fn random_costs(agents: usize, goals: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..agents)
        .map(|_| (0..goals).map(|_| rng.gen_range(0.0..100.0)).collect())
        .collect()
}

/// Seven agents spread over the base room of the office map.
pub fn office_team() -> Vec<Point> {
    [(3.0, 3.0), (10.0, 5.0), (20.0, 8.0), (5.0, 20.0), (15.0, 15.0), (28.0, 28.0), (25.0, 4.0)]
        .into_iter()
        .map(|(x, y)| Point::new(x, y))
        .collect()
}
