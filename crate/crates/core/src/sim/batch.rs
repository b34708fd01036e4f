use super::config::{SimConfig, Strategy};
use super::engine::run_strategies;
use super::record::{compute_metrics, Outcome, TrialRecord};
use super::scenario::{generate_scenario, ScenarioError};
use crate::world::GridMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// One (trial, strategy) line of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// The omniscient strategy formed the chain on this scenario.
    pub solvable: bool,
    pub outcome: String,
    pub reason: Option<String>,
    pub reconnect_time: Option<f64>,
    pub mission_time: Option<f64>,
    pub total_distance: f64,
    pub initial_groups: usize,
    pub max_groups: usize,
    pub final_groups: usize,
}

impl TrialRow {
    pub const METRICS: [&'static str; 6] = [
        "reconnect_time",
        "mission_time",
        "total_distance",
        "initial_groups",
        "max_groups",
        "final_groups",
    ];

    /// The row of `record`, run as trial number `trial`.
    pub fn from_record(trial: usize, solvable: bool, record: &TrialRecord) -> Self {
        let m = compute_metrics(record);
        TrialRow {
            trial,
            seed: record.seed,
            strategy: record.strategy,
            solvable,
            outcome: record.outcome.as_str().to_string(),
            reason: record.outcome.reason().map(|x| x.as_str().to_string()),
            reconnect_time: m.reconnect_time,
            mission_time: m.mission_time,
            total_distance: m.total_distance,
            initial_groups: m.initial_groups,
            max_groups: m.max_groups,
            final_groups: m.final_groups,
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "reconnect_time" => self.reconnect_time,
            "mission_time" => self.mission_time,
            "total_distance" => Some(self.total_distance),
            "initial_groups" => Some(self.initial_groups as f64),
            "max_groups" => Some(self.max_groups as f64),
            "final_groups" => Some(self.final_groups as f64),
            _ => None,
        }
    }
}

/// Min/mean/max of one metric over the trials of one strategy and class
/// where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub strategy: Strategy,
    pub class: String,
    pub metric: String,
    pub count: usize,
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

impl BatchSummary {
    pub fn get(&self, strategy: Strategy, class: &str, metric: &str) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.strategy == strategy && a.class == class && a.metric == metric)
    }
}

/// Runs `trials` scenarios (seeds `cfg.seed`, `cfg.seed + 1`, ...) under
/// every strategy in `strategies`, on up to `jobs` threads (0: all cores).
/// The omniscient strategy always runs to classify scenarios.
pub fn run_batch(
    cfg: &SimConfig,
    map: &GridMap,
    trials: usize,
    strategies: &[Strategy],
    jobs: usize,
) -> Result<BatchSummary, ScenarioError> {
    let mut run: Vec<Strategy> = vec![Strategy::Full];
    run.extend(strategies.iter().copied().filter(|&s| s != Strategy::Full));
    let one = |trial: usize| -> Result<Vec<TrialRow>, ScenarioError> {
        let seed = cfg.seed.wrapping_add(trial as u64);
        let scenario = generate_scenario(map, cfg, seed)?;
        let trial_cfg = SimConfig { seed, ..cfg.clone() };
        let records = run_strategies(map, &scenario, &trial_cfg, &run);
        let solvable = records[0].outcome == Outcome::ChainFormed;
        Ok(strategies
            .iter()
            .map(|&s| {
                let r = &records[run.iter().position(|&x| x == s).expect("ran")];
                TrialRow::from_record(trial, solvable, r)
            })
            .collect())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let per_trial: Vec<Result<Vec<TrialRow>, ScenarioError>> =
        pool.install(|| (0..trials).into_par_iter().map(one).collect());
    let mut rows = Vec::with_capacity(trials * strategies.len());
    for r in per_trial {
        rows.extend(r?);
    }
    let aggregates = aggregate(&rows, strategies);
    Ok(BatchSummary { rows, aggregates })
}

/// Aggregates per strategy, class (`solvable`, `unsolvable`) and metric, in
/// that nesting order.
pub fn aggregate(rows: &[TrialRow], strategies: &[Strategy]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &s in strategies {
        for (class, solvable) in [("solvable", true), ("unsolvable", false)] {
            for metric in TrialRow::METRICS {
                let vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.strategy == s && r.solvable == solvable)
                    .filter_map(|r| r.metric(metric))
                    .collect();
                let count = vals.len();
                let (min, mean, max) = if count == 0 {
                    (None, None, None)
                } else {
                    (
                        vals.iter().copied().reduce(f64::min),
                        Some(vals.iter().sum::<f64>() / count as f64),
                        vals.iter().copied().reduce(f64::max),
                    )
                };
                out.push(Aggregate {
                    strategy: s,
                    class: class.to_string(),
                    metric: metric.to_string(),
                    count,
                    min,
                    mean,
                    max,
                });
            }
        }
    }
    out
}

pub fn write_trials_csv(rows: &[TrialRow], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "trial",
            "seed",
            "strategy",
            "solvable",
            "outcome",
            "reason",
            "reconnect_time",
            "mission_time",
            "total_distance",
            "initial_groups",
            "max_groups",
            "final_groups",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(aggs: &[Aggregate], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if aggs.is_empty() {
        w.write_record(["strategy", "class", "metric", "count", "min", "mean", "max"])?;
    }
    for a in aggs {
        w.serialize(a)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(strategy: Strategy, solvable: bool, mission: Option<f64>, dist: f64) -> TrialRow {
        TrialRow {
            trial: 0,
            seed: 0,
            strategy,
            solvable,
            outcome: if mission.is_some() { "chain_formed" } else { "timeout" }.into(),
            reason: None,
            reconnect_time: Some(0.0),
            mission_time: mission,
            total_distance: dist,
            initial_groups: 1,
            max_groups: 2,
            final_groups: 1,
        }
    }

    #[test]
    fn aggregates_skip_absent_values() {
        let rows = vec![
            row(Strategy::Pred, true, Some(10.0), 100.0),
            row(Strategy::Pred, true, None, 50.0),
            row(Strategy::Pred, true, Some(20.0), 60.0),
        ];
        let a = aggregate(&rows, &[Strategy::Pred]);
        let m = a.iter().find(|a| a.metric == "mission_time" && a.class == "solvable").unwrap();
        assert_eq!((m.count, m.min, m.mean, m.max), (2, Some(10.0), Some(15.0), Some(20.0)));
        let d = a.iter().find(|a| a.metric == "total_distance" && a.class == "solvable").unwrap();
        assert_eq!(d.mean, Some(70.0));
        let u = a.iter().find(|a| a.metric == "mission_time" && a.class == "unsolvable").unwrap();
        assert_eq!((u.count, u.mean), (0, None));
    }

    #[test]
    fn csv_has_header_and_empty_fields() {
        let mut buf = Vec::new();
        write_trials_csv(&[], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1);
        assert!(s.starts_with("trial,seed,strategy,solvable,outcome,reason,"));
        let mut buf = Vec::new();
        write_trials_csv(&[row(Strategy::Search, false, None, 1.5)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), "0,0,search,false,timeout,,0.0,,1.5,1,2,1");
    }
}
