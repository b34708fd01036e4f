//! Connectivity recovery for a chain of relay robots linking a base station
//! to a goal in a changing indoor environment.
//!
//! Layers, bottom-up: [`world`] (grid, sight, sensing, communication),
//! [`fmm`] (distance fields), [`assignment`] (Hungarian matching),
//! [`chain`] (relay chain planning), [`coordination`] (group prediction and
//! interception) and [`sim`] (the discrete-time simulator and batch runner).

pub mod assignment;
pub mod chain;
pub mod coordination;
pub mod fmm;
pub mod geom;
pub mod sim;
pub mod world;

pub use assignment::{bottleneck, hungarian, AssignmentError, Matching};
pub use chain::{compute_chain_path, compute_local_goals, plan_chain, plan_chain_by, ChainParams, Objective, Infeasibility, TeamPlan};
pub use coordination::{
    group_plan, intercept, merge_groups, predict_agent_paths, trapped_routine, AgentDirective, GroupView,
    PlanContext, PredictionStats, Track,
};
pub use fmm::{path_cost, propagate, DistanceField, FmmError};
pub use geom::{path_length, point_along, Cell, Path, Point};
pub use world::{
    comm_graph, connected_groups, line_of_sight, observe, AgentMode, AgentState, Belief,
    ChangeKind, CommGraph, Door, GridMap, Partition, Region, Scenario, ScenarioChange,
    SensorModel, WorldError,
};
