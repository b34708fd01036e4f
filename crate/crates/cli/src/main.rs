mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand};
use manifest::Manifest;
use regroup_core::sim::Strategy;
use regroup_core::Point;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status for unreadable or invalid input.
const INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "regroup", version, about = "Relay-chain recovery simulations for robot teams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under each strategy and write traces and metrics.
    ///
    /// Exit status follows the first strategy: 0 chain formed, 10
    /// infeasible, 11 timeout, 12 cycle detected, 2 bad input.
    Run(RunArgs),
    /// Run seeded random trials and write per-trial and aggregate CSVs.
    Batch(BatchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON); without it the scenario is generated from --seed.
    #[arg(long, conflicts_with = "seed")]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BatchArgs {
    /// Number of trials; trial k uses seed + k.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML manifest; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Map file.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Strategy to run (repeatable): full, search or pred.
    #[arg(long = "strategy", value_parser = parse_strategy)]
    strategies: Vec<Strategy>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the base and goal distance fields as CSV matrices.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    dump_fields: Option<bool>,
    #[command(flatten)]
    sim: SimFlags,
}

/// One flag per simulation setting.
#[derive(Args)]
struct SimFlags {
    /// Sensing range, m.
    #[arg(long)]
    v_range: Option<f64>,
    /// Communication range, m.
    #[arg(long)]
    c_range: Option<f64>,
    /// Agent speed, m/s.
    #[arg(long)]
    speed: Option<f64>,
    /// Seconds per tick.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated seconds before a trial gives up.
    #[arg(long)]
    timeout: Option<f64>,
    /// Scenario generator seed (first seed of a batch).
    #[arg(long)]
    seed: Option<u64>,
    /// Agents in generated scenarios.
    #[arg(long)]
    agents: Option<usize>,
    /// Base station position, `x,y` in m.
    #[arg(long, value_parser = parse_point)]
    base: Option<Point>,
    /// Mission goal position, `x,y` in m.
    #[arg(long, value_parser = parse_point)]
    goal: Option<Point>,
    /// Walls block sensing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    sense_occlusion: Option<bool>,
    /// Break detected cycles by freezing one group's plan.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    cycle_fix: Option<bool>,
    /// Relay spacing as a fraction of the communication range.
    #[arg(long)]
    relay_safety: Option<f64>,
    /// Repetitions of a periodic state that count as a cycle.
    #[arg(long)]
    cycle_window: Option<usize>,
    /// Change-time window of generated scenarios, `lo,hi` in s.
    #[arg(long, value_parser = parse_pair::<f64>)]
    change_window: Option<[f64; 2]>,
    /// Obstacle side range of generated scenarios, `lo,hi` in cells.
    #[arg(long, value_parser = parse_pair::<usize>)]
    obstacle_size: Option<[usize; 2]>,
    #[arg(long)]
    door_closures: Option<usize>,
    #[arg(long)]
    new_obstacles: Option<usize>,
    #[arg(long)]
    door_openings: Option<usize>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: regroup_core::sim::ConfigError| e.0)
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<[T; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<T>().map_err(|_| format!("bad number `{v}`"));
    Ok([p(a)?, p(b)?])
}

fn parse_point(s: &str) -> Result<Point, String> {
    let [x, y] = parse_pair::<f64>(s)?;
    Ok(Point::new(x, y))
}

impl Common {
    /// The config file (or defaults) with every given flag applied.
    fn manifest(&self) -> anyhow::Result<Manifest> {
        let mut m = match &self.config {
            Some(p) => Manifest::load(p)?,
            None => Manifest::default(),
        };
        if let Some(p) = &self.map {
            m.map = Some(p.clone());
        }
        if !self.strategies.is_empty() {
            m.strategies = self.strategies.clone();
        }
        if let Some(p) = &self.out {
            m.out = p.clone();
        }
        if let Some(v) = self.dump_fields {
            m.dump_fields = v;
        }
        let f = &self.sim;
        let c = &mut m.sim;
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = f.$field { c.$field = v; })*
            };
        }
        set!(
            v_range,
            c_range,
            speed,
            dt,
            timeout,
            seed,
            agents,
            base,
            goal,
            sense_occlusion,
            cycle_fix,
            relay_safety,
            cycle_window,
            change_window,
            obstacle_size,
            door_closures,
            new_obstacles,
            door_openings
        );
        Ok(m)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => a.common.manifest().and_then(|mut m| {
            if let Some(p) = a.scenario {
                m.scenario = Some(p);
            } else if a.common.sim.seed.is_some() {
                m.scenario = None;
            }
            commands::run_single(&m)
        }),
        Command::Batch(a) => a.common.manifest().and_then(|mut m| {
            if let Some(t) = a.trials {
                m.trials = t;
            }
            if let Some(j) = a.jobs {
                m.jobs = j;
            }
            commands::run_batch_cmd(&m).map(|()| 0)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
