use super::config::SimConfig;
use crate::coordination::free_component;
use crate::geom::Point;
use crate::world::{ChangeKind, GridMap, Region, Scenario, ScenarioChange};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("need {needed} {state} doors to toggle, the map has {available}")]
    InsufficientDoors {
        needed: usize,
        available: usize,
        state: &'static str,
    },
    #[error("need {needed} free start cells connected to the base, found {available}")]
    InsufficientSpace { needed: usize, available: usize },
    #[error("base or goal is not on a free cell")]
    BadEndpoints,
    #[error("no obstacle placement clear of base and goal")]
    NoObstaclePlacement,
}

/// Random starts and one wave of changes for trial `seed`, drawn as follows:
/// agent starts uniformly over distinct free cells reachable from the base;
/// one change time uniformly in `change_window`; then `door_closures` open
/// doors closed, `new_obstacles` rectangles (sides uniform in
/// `obstacle_size`) clear of base and goal, and `door_openings` closed doors
/// opened, all at that time.
pub fn generate_scenario(map: &GridMap, cfg: &SimConfig, seed: u64) -> Result<Scenario, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let open: Vec<&str> = map.doors().iter().filter(|d| d.open).map(|d| d.id.as_str()).collect();
    let closed: Vec<&str> = map.doors().iter().filter(|d| !d.open).map(|d| d.id.as_str()).collect();
    if open.len() < cfg.door_closures {
        return Err(ScenarioError::InsufficientDoors {
            needed: cfg.door_closures,
            available: open.len(),
            state: "open",
        });
    }
    if closed.len() < cfg.door_openings {
        return Err(ScenarioError::InsufficientDoors {
            needed: cfg.door_openings,
            available: closed.len(),
            state: "closed",
        });
    }
    let (Some(bc), Some(gc)) = (map.cell_of(cfg.base), map.cell_of(cfg.goal)) else {
        return Err(ScenarioError::BadEndpoints);
    };
    if !map.is_free(bc) || !map.is_free(gc) {
        return Err(ScenarioError::BadEndpoints);
    }

    let reachable = free_component(map, bc);
    let cells: Vec<usize> = (0..map.len()).filter(|&i| reachable[i]).collect();
    if cells.len() < cfg.agents {
        return Err(ScenarioError::InsufficientSpace {
            needed: cfg.agents,
            available: cells.len(),
        });
    }
    let agents: Vec<Point> = cells
        .choose_multiple(&mut rng, cfg.agents)
        .map(|&i| map.center(map.cell_at(i)))
        .collect();

    let mut changes = Vec::new();
    let total = cfg.door_closures + cfg.new_obstacles + cfg.door_openings;
    if total > 0 {
        let [lo, hi] = cfg.change_window;
        let time = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        for id in open.choose_multiple(&mut rng, cfg.door_closures) {
            changes.push(ScenarioChange::new(time, ChangeKind::DoorClose { door: id.to_string() }));
        }
        let [smin, smax] = cfg.obstacle_size;
        for _ in 0..cfg.new_obstacles {
            let mut placed = None;
            for _ in 0..1000 {
                let w = rng.gen_range(smin..=smax).min(map.width());
                let h = rng.gen_range(smin..=smax).min(map.height());
                let x0 = rng.gen_range(0..=map.width() - w);
                let y0 = rng.gen_range(0..=map.height() - h);
                let r = Region::new(x0, y0, x0 + w - 1, y0 + h - 1);
                if !r.contains(bc) && !r.contains(gc) {
                    placed = Some(r);
                    break;
                }
            }
            let region = placed.ok_or(ScenarioError::NoObstaclePlacement)?;
            changes.push(ScenarioChange::new(time, ChangeKind::ObstacleAdd { region }));
        }
        for id in closed.choose_multiple(&mut rng, cfg.door_openings) {
            changes.push(ScenarioChange::new(time, ChangeKind::DoorOpen { door: id.to_string() }));
        }
    }
    Ok(Scenario {
        base: cfg.base,
        goal: cfg.goal,
        agents,
        changes,
    })
}
