use crate::chain::ChainParams;
use crate::geom::Point;
use crate::world::SensorModel;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Everyone knows the true map and plans together.
    Full,
    /// One group searches the others, which wait.
    Search,
    /// Groups predict each other's plans and intercept.
    Pred,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Full, Strategy::Search, Strategy::Pred];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::Search => "search",
            Strategy::Pred => "pred",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Strategy::Full),
            "search" => Ok(Strategy::Search),
            "pred" => Ok(Strategy::Pred),
            _ => Err(ConfigError(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

/// Every simulation knob. Field names double as config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub v_range: f64,
    pub c_range: f64,
    /// Meters per second.
    pub speed: f64,
    /// Seconds per tick.
    pub dt: f64,
    pub base: Point,
    pub goal: Point,
    pub agents: usize,
    /// Simulated seconds before giving up.
    pub timeout: f64,
    pub seed: u64,
    pub sense_occlusion: bool,
    pub cycle_fix: bool,
    /// Relays are spaced at this fraction of `c_range`.
    pub relay_safety: f64,
    /// Repetitions of a periodic state before it counts as a cycle.
    pub cycle_window: usize,
    /// Scenario generator: the change time is drawn from this window.
    pub change_window: [f64; 2],
    /// Scenario generator: obstacle side lengths in cells.
    pub obstacle_size: [usize; 2],
    pub door_closures: usize,
    pub new_obstacles: usize,
    pub door_openings: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            v_range: 30.0,
            c_range: 30.0,
            speed: 2.0,
            dt: 0.25,
            base: Point::new(5.0, 5.0),
            goal: Point::new(80.0, 80.0),
            agents: 7,
            timeout: 600.0,
            seed: 0,
            sense_occlusion: true,
            cycle_fix: false,
            relay_safety: 0.95,
            cycle_window: 3,
            change_window: [10.0, 30.0],
            obstacle_size: [2, 8],
            door_closures: 3,
            new_obstacles: 5,
            door_openings: 5,
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<SimConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sensor(&self) -> SensorModel {
        SensorModel {
            v_range: self.v_range,
            occlusion: self.sense_occlusion,
        }
    }

    pub fn chain(&self) -> ChainParams {
        ChainParams {
            c_range: self.c_range,
            safety: self.relay_safety,
        }
    }

    /// Checks ranges and that one tick of motion stays under a cell
    /// diagonal at `resolution`.
    pub fn validate(&self, resolution: f64) -> Result<(), ConfigError> {
        let positive = [
            ("v_range", self.v_range),
            ("c_range", self.c_range),
            ("speed", self.speed),
            ("dt", self.dt),
            ("timeout", self.timeout),
            ("relay_safety", self.relay_safety),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError(format!("{name} must be positive, got {v}")));
            }
        }
        if self.relay_safety > 1.0 {
            return Err(ConfigError("relay_safety must not exceed 1".into()));
        }
        if self.speed * self.dt >= resolution * std::f64::consts::SQRT_2 {
            return Err(ConfigError(format!(
                "speed * dt = {} m reaches a cell diagonal",
                self.speed * self.dt
            )));
        }
        if self.cycle_window == 0 {
            return Err(ConfigError("cycle_window must be at least 1".into()));
        }
        if self.change_window[0] > self.change_window[1] || self.change_window[0] < 0.0 {
            return Err(ConfigError("change_window must be an increasing pair".into()));
        }
        if self.obstacle_size[0] == 0 || self.obstacle_size[0] > self.obstacle_size[1] {
            return Err(ConfigError("obstacle_size must be an increasing positive pair".into()));
        }
        Ok(())
    }
}
