//! Relay chain planning on a single map: chain path from base to goal,
//! relay placement along it, optimal allocation of agents to relay goals and
//! per-agent paths.

use crate::assignment::{bottleneck, hungarian};
use crate::fmm::{propagate_cached, DistanceField};
use crate::geom::{Path, Point};
use crate::world::{clear_segment, GridMap};
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

/// Why no chain can be formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// Base or goal enclosed: no path between them.
    NoChainPath,
    /// More relays needed than there are usable agents.
    TooFewAgents,
    /// Some chain node sees no further point of the chain path within range.
    LosBlocked,
}

impl Infeasibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Infeasibility::NoChainPath => "no_chain_path",
            Infeasibility::TooFewAgents => "too_few_agents",
            Infeasibility::LosBlocked => "los_blocked",
        }
    }
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub c_range: f64,
    /// Fraction of `c_range` used when spacing relays.
    pub safety: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            c_range: 30.0,
            safety: 0.95,
        }
    }
}

impl ChainParams {
    pub fn hop(&self) -> f64 {
        self.c_range * self.safety
    }
}

/// A chain plan for a set of agents. Per-agent vectors are indexed like the
/// agent list given to [`plan_chain`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TeamPlan {
    pub chain_path: Path,
    /// Relay positions ordered from base to goal; the last one is the goal.
    pub local_goals: Vec<Point>,
    /// Local goal index of each allocated agent.
    pub allocation: Vec<Option<usize>>,
    /// Path to the allocated goal, empty for excluded agents.
    pub paths: Vec<Path>,
    /// Excluded agents move next to the nearest relay so the team stays
    /// together; index into `local_goals`.
    pub standby: Vec<Option<usize>>,
    pub standby_paths: Vec<Path>,
    pub feasible: bool,
    pub reason: Option<Infeasibility>,
    /// Chain node that could not see further along the path.
    pub stuck: Option<Point>,
    /// Sum of allocated path costs.
    pub total_cost: f64,
}

impl TeamPlan {
    fn infeasible(n: usize, reason: Infeasibility) -> Self {
        TeamPlan {
            allocation: vec![None; n],
            paths: vec![Vec::new(); n],
            standby: vec![None; n],
            standby_paths: vec![Vec::new(); n],
            feasible: false,
            reason: Some(reason),
            ..TeamPlan::default()
        }
    }

    /// Allocated goal of agent `a`.
    pub fn goal_of(&self, a: usize) -> Option<Point> {
        self.allocation[a].map(|g| self.local_goals[g])
    }

    /// Where agent `a` is headed, allocated or on standby.
    pub fn target_of(&self, a: usize) -> Option<Point> {
        self.allocation[a]
            .or(self.standby[a])
            .map(|g| self.local_goals[g])
    }

    /// The path agent `a` follows under this plan (possibly empty).
    pub fn route_of(&self, a: usize) -> &Path {
        if self.allocation[a].is_some() {
            &self.paths[a]
        } else {
            &self.standby_paths[a]
        }
    }

    /// Agents ordered along the chain: by allocated relay index, standby
    /// agents after the relay they wait at.
    pub fn chain_order(&self) -> Vec<usize> {
        let mut order: Vec<(usize, usize, usize)> = (0..self.allocation.len())
            .filter_map(|a| match (self.allocation[a], self.standby[a]) {
                (Some(g), _) => Some((g, 0, a)),
                (None, Some(g)) => Some((g, 1, a)),
                _ => None,
            })
            .collect();
        order.sort_unstable();
        order.into_iter().map(|(_, _, a)| a).collect()
    }

    /// Identity of the relay layout and allocation, at cell resolution.
    pub fn fingerprint(&self, resolution: f64) -> u64 {
        let q = |p: &Point| {
            (
                (p.x / resolution + 0.5).floor() as i64,
                (p.y / resolution + 0.5).floor() as i64,
            )
        };
        let mut h = DefaultHasher::new();
        self.feasible.hash(&mut h);
        self.reason.hash(&mut h);
        for g in &self.local_goals {
            q(g).hash(&mut h);
        }
        self.allocation.hash(&mut h);
        self.standby.hash(&mut h);
        h.finish()
    }
}

/// Shortest base-to-goal path on `map`.
pub fn compute_chain_path(base: Point, goal: Point, map: &GridMap) -> Result<Path, Infeasibility> {
    let field = propagate_cached(map, base).map_err(|_| Infeasibility::NoChainPath)?;
    chain_path_from_field(&field, goal)
}

fn chain_path_from_field(base_field: &DistanceField, goal: Point) -> Result<Path, Infeasibility> {
    let mut path = base_field
        .extract_path(goal)
        .map_err(|_| Infeasibility::NoChainPath)?;
    path.reverse();
    Ok(path)
}

/// Greedy relay placement: from the base, each next chain node is the last
/// point of the path within `hop` of the previous node and in its sight. The
/// final node is the goal itself. On failure returns the stuck node.
pub fn compute_local_goals(chain_path: &[Point], map: &GridMap, hop: f64) -> Result<Vec<Point>, Point> {
    let Some((&goal, _)) = chain_path.split_last() else {
        return Ok(Vec::new());
    };
    let sees = |a: Point, b: Point| {
        a.dist(b) <= hop && map.cell_of(a).is_some() && map.cell_of(b).is_some() && clear_segment(map, a, b)
    };
    let mut goals = Vec::new();
    let mut prev = chain_path[0];
    let mut at = 0;
    loop {
        if sees(prev, goal) {
            goals.push(goal);
            return Ok(goals);
        }
        let next = (at + 1..chain_path.len())
            .rev()
            .find(|&j| sees(prev, chain_path[j]))
            .ok_or(prev)?;
        at = next;
        prev = chain_path[next];
        goals.push(prev);
    }
}

/// Plans a chain for `agents` on `map`. Agents with `active[i] == false` are
/// left out of the allocation entirely (lost or unknown).
pub fn plan_chain(
    agents: &[Point],
    active: &[bool],
    base: Point,
    goal: Point,
    map: &GridMap,
    params: &ChainParams,
) -> TeamPlan {
    plan_chain_by(agents, active, base, goal, map, params, Objective::Total)
}

/// What the agent-to-goal allocation minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Summed path cost.
    #[default]
    Total,
    /// Longest single path first, then the sum.
    Makespan,
}

/// [`plan_chain`] with a choice of allocation objective.
pub fn plan_chain_by(
    agents: &[Point],
    active: &[bool],
    base: Point,
    goal: Point,
    map: &GridMap,
    params: &ChainParams,
    objective: Objective,
) -> TeamPlan {
    let n = agents.len();
    let chain_path = match compute_chain_path(base, goal, map) {
        Ok(p) => p,
        Err(r) => return TeamPlan::infeasible(n, r),
    };
    let local_goals = match compute_local_goals(&chain_path, map, params.hop()) {
        Ok(g) => g,
        Err(stuck) => {
            return TeamPlan {
                chain_path,
                stuck: Some(stuck),
                ..TeamPlan::infeasible(n, Infeasibility::LosBlocked)
            }
        }
    };
    let rows: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
    let too_few = |chain_path: Path, local_goals: Vec<Point>| TeamPlan {
        chain_path,
        local_goals,
        ..TeamPlan::infeasible(n, Infeasibility::TooFewAgents)
    };
    if local_goals.len() > rows.len() {
        return too_few(chain_path, local_goals);
    }

    let fields: Vec<Option<DistanceField>> = rows
        .iter()
        .map(|&i| propagate_cached(map, agents[i]).ok())
        .collect();
    let costs: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| {
            local_goals
                .iter()
                .map(|&g| f.as_ref().map_or(f64::INFINITY, |f| f.value_at(g)))
                .collect()
        })
        .collect();
    let matching = match objective {
        Objective::Total => hungarian(&costs),
        Objective::Makespan => bottleneck(&costs),
    };
    let Ok(matching) = matching else {
        return too_few(chain_path, local_goals);
    };

    let route = |k: usize, g: usize| -> Path {
        let f = fields[k].as_ref().expect("finite cost implies a field");
        let mut p = f
            .extract_path(local_goals[g])
            .expect("finite cost implies a path");
        p.reverse();
        p
    };
    let mut plan = TeamPlan {
        feasible: true,
        reason: None,
        total_cost: 0.0,
        ..TeamPlan::infeasible(n, Infeasibility::TooFewAgents)
    };
    for (k, &i) in rows.iter().enumerate() {
        match matching.goal_of[k] {
            Some(g) => {
                plan.allocation[i] = Some(g);
                plan.paths[i] = route(k, g);
                plan.total_cost += costs[k][g];
            }
            None => {
                let nearest = (0..local_goals.len())
                    .filter(|&g| costs[k][g].is_finite())
                    .min_by(|&a, &b| costs[k][a].total_cmp(&costs[k][b]).then(a.cmp(&b)));
                if let Some(g) = nearest {
                    plan.standby[i] = Some(g);
                    plan.standby_paths[i] = route(k, g);
                }
            }
        }
    }
    plan.chain_path = chain_path;
    plan.local_goals = local_goals;
    plan
}
