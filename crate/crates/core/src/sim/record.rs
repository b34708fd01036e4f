use super::config::Strategy;
use crate::chain::Infeasibility;
use crate::coordination::{Mismatch, Role};
use crate::geom::Point;
use crate::world::{AgentMode, ChangeKind};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Change {
        #[serde(flatten)]
        kind: ChangeKind,
    },
    /// An agent pushed out of a cell that became occupied.
    Displaced { agent: usize },
    Merge { groups: Vec<Vec<usize>>, into: Vec<usize> },
    Split { group: Vec<usize>, into: Vec<Vec<usize>> },
    Replan {
        group: Vec<usize>,
        predictions: usize,
        believed_groups: usize,
        intercepts: usize,
        mismatches: Vec<Mismatch>,
        feasible: bool,
        applied: bool,
    },
    Intercept { agent: usize, target: usize, role: Role },
    Explore { agent: usize, targets: Vec<usize> },
    Lost { group: Vec<usize>, agents: Vec<usize> },
    Concluded { group: Vec<usize>, reason: Infeasibility },
    Collision { agent: usize },
    Searcher { group: Vec<usize>, leader: usize, target: usize },
    CycleDetected { period: usize },
    CycleFix { frozen: Vec<usize> },
}

/// State at the start of one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u32,
    pub time: f64,
    pub positions: Vec<Point>,
    pub modes: Vec<AgentMode>,
    /// Group of each agent, named by its lowest member.
    pub groups: Vec<usize>,
    /// Some agent on the goal is linked to the base on the true map.
    pub chain: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<Event>,
}

impl TickRecord {
    pub fn group_count(&self) -> usize {
        let mut g = self.groups.clone();
        g.sort_unstable();
        g.dedup();
        g.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "reason", rename_all = "snake_case")]
pub enum Outcome {
    ChainFormed,
    Infeasible(Infeasibility),
    Timeout,
    CycleDetected,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::ChainFormed => "chain_formed",
            Outcome::Infeasible(_) => "infeasible",
            Outcome::Timeout => "timeout",
            Outcome::CycleDetected => "cycle_detected",
        }
    }

    pub fn reason(&self) -> Option<Infeasibility> {
        match self {
            Outcome::Infeasible(r) => Some(*r),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Infeasible(r) => write!(f, "infeasible({r})"),
            o => f.write_str(o.as_str()),
        }
    }
}

/// Everything that happened in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub strategy: Strategy,
    pub seed: u64,
    pub dt: f64,
    /// When the environment changed; metrics count from here (or from 0).
    pub change_time: Option<f64>,
    pub ticks: Vec<TickRecord>,
    pub outcome: Outcome,
    /// Positions when the chain first formed after the change.
    pub certificate: Option<Vec<Point>>,
}

impl TrialRecord {
    /// One JSON object per tick.
    pub fn write_trace(&self, mut out: impl Write) -> io::Result<()> {
        for t in &self.ticks {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn trace_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_trace(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn events(&self) -> impl Iterator<Item = (f64, &Event)> {
        self.ticks
            .iter()
            .flat_map(|t| t.events.iter().map(move |e| (t.time, e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub reconnect_time: Option<f64>,
    pub mission_time: Option<f64>,
    pub total_distance: f64,
    pub initial_groups: usize,
    pub max_groups: usize,
    pub final_groups: usize,
}

/// Metrics of a finished trial, computed from its ticks alone. Times count
/// from the change (or from the start when nothing changes).
pub fn compute_metrics(record: &TrialRecord) -> Metrics {
    let t0 = record.change_time.unwrap_or(0.0);
    let eps = 1e-9;
    let after: Vec<&TickRecord> = record.ticks.iter().filter(|t| t.time + eps >= t0).collect();
    let reconnect_time = after
        .iter()
        .find(|t| t.group_count() == 1)
        .map(|t| t.time - t0);
    let mission_time = match record.outcome {
        // the mission includes reuniting the team, when it ever reunites
        Outcome::ChainFormed => after
            .iter()
            .find(|t| t.chain && t.group_count() == 1)
            .or_else(|| after.iter().find(|t| t.chain))
            .map(|t| t.time - t0),
        _ => None,
    };
    let mut total_distance = 0.0;
    for w in record.ticks.windows(2) {
        for (a, b) in w[0].positions.iter().zip(&w[1].positions) {
            total_distance += a.dist(*b);
        }
    }
    Metrics {
        reconnect_time,
        mission_time,
        total_distance,
        initial_groups: after.first().map_or(0, |t| t.group_count()),
        max_groups: after.iter().map(|t| t.group_count()).max().unwrap_or(0),
        final_groups: record.ticks.last().map_or(0, |t| t.group_count()),
    }
}

/// Detects a state that keeps recurring with a period of at least two ticks.
/// Feed one state hash per tick; call [`CycleDetector::reset`] whenever any
/// map knowledge changes.
#[derive(Debug, Clone)]
pub struct CycleDetector {
    window: usize,
    history: Vec<u64>,
    seen: HashMap<u64, Vec<usize>>,
}

impl CycleDetector {
    pub fn new(window: usize) -> Self {
        CycleDetector {
            window,
            history: Vec::new(),
            seen: HashMap::new(),
        }
    }

    pub fn reset(&mut self) {
        self.history.clear();
        self.seen.clear();
    }

    /// Records a state; returns the period when the last `window` periods
    /// repeat exactly and are not a standstill.
    pub fn push(&mut self, state: u64) -> Option<usize> {
        let now = self.history.len();
        self.history.push(state);
        let occ = self.seen.entry(state).or_default();
        occ.push(now);
        let candidates: Vec<usize> = occ.iter().rev().skip(1).take(16).map(|&p| now - p).collect();
        let h = &self.history;
        for period in candidates {
            if period < 2 {
                continue;
            }
            let span = period * self.window;
            if h.len() < span + period {
                continue;
            }
            let periodic = (0..span).all(|j| h[now - j] == h[now - j - period]);
            let moving = (1..period).any(|j| h[now - j] != h[now]);
            if periodic && moving {
                return Some(period);
            }
        }
        None
    }
}

/// Detects cyclic behaviour in a recorded trace: positions (quantized to
/// cells) and partition repeating with a period of two or more ticks for
/// `window` periods.
pub fn detect_cycle(record: &TrialRecord, resolution: f64, window: usize) -> bool {
    let mut det = CycleDetector::new(window);
    record
        .ticks
        .iter()
        .any(|t| det.push(state_hash(&t.positions, &t.groups, resolution)).is_some())
}

pub(crate) fn state_hash(positions: &[Point], groups: &[usize], resolution: f64) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in positions {
        ((p.x / resolution + 0.5).floor() as i64).hash(&mut h);
        ((p.y / resolution + 0.5).floor() as i64).hash(&mut h);
    }
    groups.hash(&mut h);
    h.finish()
}
