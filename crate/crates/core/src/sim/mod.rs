//! Discrete-time simulation of the team under the three strategies, with
//! scenario generation, metrics and batch runs.

mod batch;
mod config;
mod engine;
mod pred;
mod record;
mod scenario;
mod search;

pub use batch::{aggregate, run_batch, write_aggregate_csv, write_trials_csv, Aggregate, BatchSummary, TrialRow};
pub use config::{ConfigError, SimConfig, Strategy};
pub use engine::{chain_formed, run_strategies, run_trial, run_trial_cached, VisCache};
pub use record::{compute_metrics, detect_cycle, CycleDetector, Event, Metrics, Outcome, TickRecord, TrialRecord};
pub use scenario::{generate_scenario, ScenarioError};
