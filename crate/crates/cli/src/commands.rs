use crate::manifest::Manifest;
use anyhow::{Context, Result};
use regroup_core::sim::{
    generate_scenario, run_batch, run_strategies, write_aggregate_csv, write_trials_csv, Aggregate, Outcome,
    Strategy, TrialRow,
};
use regroup_core::{propagate, GridMap, Scenario};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

pub fn exit_code(o: &Outcome) -> u8 {
    match o {
        Outcome::ChainFormed => 0,
        Outcome::Infeasible(_) => 10,
        Outcome::Timeout => 11,
        Outcome::CycleDetected => 12,
    }
}

fn load_map(path: &Path) -> Result<GridMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading map {}", path.display()))?;
    GridMap::parse(&text).with_context(|| format!("parsing map {}", path.display()))
}

fn load_scenario(path: &Path, map: &GridMap) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    let sc = Scenario::from_json(&text).with_context(|| format!("parsing scenario {}", path.display()))?;
    sc.validate(map)
        .with_context(|| format!("scenario {} does not fit the map", path.display()))?;
    Ok(sc)
}

/// Creates the output directory and echoes the effective manifest into it.
fn prepare_out(m: &Manifest) -> Result<()> {
    fs::create_dir_all(&m.out).with_context(|| format!("creating {}", m.out.display()))?;
    write(&m.out.join("config.toml"), m.to_toml())
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn dump_fields(m: &Manifest, map: &GridMap, base: regroup_core::Point, goal: regroup_core::Point) -> Result<()> {
    for (name, p) in [("base", base), ("goal", goal)] {
        let f = propagate(map, p).with_context(|| format!("distance field from the {name}"))?;
        write(&m.out.join(format!("field_{name}.csv")), f.to_csv())?;
    }
    Ok(())
}

/// Runs one scenario under every selected strategy. Returns the exit code
/// of the first one.
pub fn run_single(m: &Manifest) -> Result<u8> {
    let map = load_map(m.map_path()?)?;
    m.sim.validate(map.resolution()).context("checking settings")?;
    let scenario = match &m.scenario {
        Some(p) => load_scenario(p, &map)?,
        None => generate_scenario(&map, &m.sim, m.sim.seed).context("generating the scenario")?,
    };
    let strategies = m.strategies()?;
    prepare_out(m)?;
    write(&m.out.join("scenario.json"), scenario.to_json() + "\n")?;
    if m.dump_fields {
        dump_fields(m, &map, scenario.base, scenario.goal)?;
    }

    // the omniscient run decides whether the scenario is solvable
    let mut run = vec![Strategy::Full];
    run.extend(strategies.iter().copied().filter(|&s| s != Strategy::Full));
    let records = run_strategies(&map, &scenario, &m.sim, &run);
    let solvable = records[0].outcome == Outcome::ChainFormed;

    let mut rows = Vec::new();
    for &s in &strategies {
        let r = &records[run.iter().position(|&x| x == s).expect("ran")];
        let path = m.out.join(format!("trace_{s}.jsonl"));
        let mut out = create(&path)?;
        r.write_trace(&mut out).with_context(|| format!("writing {}", path.display()))?;
        let row = TrialRow::from_record(0, solvable, r);
        println!(
            "{:<7} {:<28} reconnect {:>8} mission {:>8} distance {:>8.1} m",
            s.as_str(),
            r.outcome.to_string(),
            show(row.reconnect_time),
            show(row.mission_time),
            row.total_distance
        );
        rows.push(row);
    }
    let path = m.out.join("metrics.csv");
    write_trials_csv(&rows, create(&path)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(exit_code(&records[run.iter().position(|&x| x == strategies[0]).expect("ran")].outcome))
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2} s"))
}

pub fn run_batch_cmd(m: &Manifest) -> Result<()> {
    let map = load_map(m.map_path()?)?;
    m.sim.validate(map.resolution()).context("checking settings")?;
    let strategies = m.strategies()?;
    prepare_out(m)?;
    if m.dump_fields {
        dump_fields(m, &map, m.sim.base, m.sim.goal)?;
    }
    let summary = run_batch(&m.sim, &map, m.trials, &strategies, m.jobs).context("generating scenarios")?;
    let path = m.out.join("trials.csv");
    write_trials_csv(&summary.rows, create(&path)?).with_context(|| format!("writing {}", path.display()))?;
    let path = m.out.join("aggregate.csv");
    write_aggregate_csv(&summary.aggregates, create(&path)?).with_context(|| format!("writing {}", path.display()))?;
    let solvable = summary.rows.iter().filter(|r| r.solvable).count() / strategies.len().max(1);
    println!("{} trials, {solvable} solvable", m.trials);
    print_table(&summary.aggregates);
    Ok(())
}

fn print_table(aggs: &[Aggregate]) {
    println!(
        "{:<7} {:<10} {:<15} {:>5} {:>10} {:>10} {:>10}",
        "strategy", "class", "metric", "n", "min", "mean", "max"
    );
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    for a in aggs {
        println!(
            "{:<7} {:<10} {:<15} {:>5} {:>10} {:>10} {:>10}",
            a.strategy.as_str(),
            a.class,
            a.metric,
            a.count,
            cell(a.min),
            cell(a.mean),
            cell(a.max)
        );
    }
}
