//! Occupancy-grid world: map mutation, line of sight, sensing, communication
//! graph and group partitioning.

mod comm;
mod los;
mod map;
mod sensing;

pub use comm::{
    comm_graph, connected_groups, linked, partition_positions, CommGraph, DisjointSet, Partition,
};
pub use los::line_of_sight;
pub(crate) use los::clear_segment;
pub use map::{Door, GridMap, Region};
pub use sensing::{observe, visible_cells, Belief, SensorModel};

use crate::geom::Point;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("coordinate {0} is outside the grid")]
    OutOfBounds(Point),
    #[error("region {0:?} is outside the grid")]
    RegionOutOfBounds(Region),
    #[error("unknown door `{0}`")]
    UnknownDoor(String),
    #[error("duplicate door `{0}`")]
    DuplicateDoor(String),
    #[error("coordinate {0} lies on an occupied cell")]
    Occupied(Point),
    #[error("invalid scenario change: {0}")]
    InvalidChange(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl WorldError {
    pub(crate) fn parse(line: usize, msg: &str) -> Self {
        WorldError::Parse {
            line,
            msg: msg.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChangeKind {
    DoorClose { door: String },
    DoorOpen { door: String },
    ObstacleAdd { region: Region },
}

/// An environment event firing at `time` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioChange {
    pub time: f64,
    #[serde(flatten)]
    pub kind: ChangeKind,
}

impl ScenarioChange {
    pub fn new(time: f64, kind: ChangeKind) -> Self {
        ScenarioChange { time, kind }
    }

    /// Checks the change against `map`: doors must exist and obstacles must
    /// stay clear of the base and goal cells.
    pub fn validate(&self, map: &GridMap, base: Point, goal: Point) -> Result<(), WorldError> {
        match &self.kind {
            ChangeKind::DoorClose { door } | ChangeKind::DoorOpen { door } => {
                if map.door(door).is_none() {
                    return Err(WorldError::UnknownDoor(door.clone()));
                }
            }
            ChangeKind::ObstacleAdd { region } => {
                if region.x1 >= map.width() || region.y1 >= map.height() {
                    return Err(WorldError::RegionOutOfBounds(*region));
                }
                for p in [base, goal] {
                    if map.cell_of(p).is_some_and(|c| region.contains(c)) {
                        return Err(WorldError::InvalidChange(format!(
                            "obstacle {region:?} covers {p}"
                        )));
                    }
                }
            }
        }
        if !(self.time >= 0.0) {
            return Err(WorldError::InvalidChange(format!("trigger time {}", self.time)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    Deploying,
    Intercepting,
    TrappedExplore,
    Waiting,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub position: Point,
    pub group_id: usize,
    pub mode: AgentMode,
}

/// Scenario description: where everything starts and what changes when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub base: Point,
    pub goal: Point,
    pub agents: Vec<Point>,
    #[serde(default)]
    pub changes: Vec<ScenarioChange>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, WorldError> {
        serde_json::from_str(text).map_err(|e| WorldError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks positions and changes against `map`.
    pub fn validate(&self, map: &GridMap) -> Result<(), WorldError> {
        for &p in [self.base, self.goal].iter().chain(&self.agents) {
            if map.cell_of(p).is_none() {
                return Err(WorldError::OutOfBounds(p));
            }
            if !map.is_free_point(p) {
                return Err(WorldError::Occupied(p));
            }
        }
        for ch in &self.changes {
            ch.validate(map, self.base, self.goal)?;
        }
        Ok(())
    }

    /// Earliest trigger time, if any change exists.
    pub fn change_time(&self) -> Option<f64> {
        self.changes.iter().map(|c| c.time).min_by(f64::total_cmp)
    }
}
