use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scripted(name: &str) -> [String; 4] {
    let dir = root().join("scenarios");
    [
        "--map".into(),
        dir.join(format!("{name}.map")).display().to_string(),
        "--scenario".into(),
        dir.join(format!("{name}.json")).display().to_string(),
    ]
}

fn regroup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regroup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_scripted(name: &str, out: &Path, extra: &[&str]) -> Output {
    let s = scripted(name);
    let mut args: Vec<&str> = vec!["run"];
    args.extend(s.iter().map(String::as_str));
    args.extend(["--out", out.to_str().unwrap()]);
    args.extend(extra);
    regroup(&args)
}

#[test]
fn solvable_scenario_exits_zero_with_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scripted("two_groups", dir.path(), &["--strategy", "pred"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("trace_pred.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() > 1);
    for (k, t) in lines.iter().enumerate() {
        assert_eq!(t["tick"], k);
        assert_eq!(t["positions"].as_array().unwrap().len(), 5);
    }
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.lines().nth(1).unwrap().contains("pred,true,chain_formed"));
    assert!(dir.path().join("config.toml").exists());
    assert!(dir.path().join("scenario.json").exists());
}

#[test]
fn sealed_goal_exits_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scripted("sealed_goal", dir.path(), &["--strategy", "pred"]);
    assert_eq!(code(&o), 10);
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.contains("infeasible,no_chain_path"), "{metrics}");
}

#[test]
fn timeout_and_cycle_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scripted("two_groups", dir.path(), &["--strategy", "pred", "--timeout", "5"]);
    assert_eq!(code(&o), 11, "{}", stderr(&o));

    let map = root().join("maps/office.map");
    let scenario = root().join("scenarios/oscillation.json");
    let o = regroup(&[
        "run",
        "--map",
        map.to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
        "--strategy",
        "pred",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 12, "{}", stderr(&o));
}

#[test]
fn exit_status_follows_the_first_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scripted("two_groups", dir.path(), &["--strategy", "pred", "--strategy", "full", "--timeout", "5"]);
    assert_eq!(code(&o), 11);
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
    assert!(dir.path().join("trace_full.jsonl").exists());
}

#[test]
fn missing_map_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = regroup(&["run", "--map", "/nonexistent/none.map", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("none.map"));
    let o = regroup(&["run", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_inputs_name_the_line_or_field() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("bad.map");
    fs::write(&map, "4 3 1\n....\n..x.\n....\n").unwrap();
    let o = regroup(&["run", "--map", map.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let good = root().join("scenarios/two_groups.map");
    let sc = dir.path().join("bad.json");
    fs::write(&sc, "{\"base\": {\"x\": 3.0, \"y\": 15.0}, \"agents\": []}").unwrap();
    let o = regroup(&[
        "run",
        "--map",
        good.to_str().unwrap(),
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("goal"), "{}", stderr(&o));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let s = scripted("two_groups");
    fs::write(
        &cfg,
        format!(
            "map = {:?}\nscenario = {:?}\nstrategies = [\"full\"]\nout = \"res\"\n[sim]\ndt = 0.5\ncycle_fix = true\n",
            s[1], s[3]
        ),
    )
    .unwrap();
    let o = regroup(&["run", "--config", cfg.to_str().unwrap(), "--dt", "0.2", "--cycle-fix=false"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let echoed = fs::read_to_string(dir.path().join("res/config.toml")).unwrap();
    assert!(echoed.contains("dt = 0.2"), "{echoed}");
    assert!(echoed.contains("cycle_fix = false"), "{echoed}");
    assert!(echoed.contains("strategies = [\"full\"]"), "{echoed}");
    let trace = fs::read_to_string(dir.path().join("res/trace_full.jsonl")).unwrap();
    let second: serde_json::Value = serde_json::from_str(trace.lines().nth(1).unwrap()).unwrap();
    assert!((second["time"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn dump_fields_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scripted("sealed_goal", dir.path(), &["--strategy", "full", "--dump-fields"]);
    assert_eq!(code(&o), 10);
    let base = fs::read_to_string(dir.path().join("field_base.csv")).unwrap();
    let rows: Vec<&str> = base.lines().collect();
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.split(',').count() == 60));
    // the sealed room is out of reach from the base
    assert!(base.contains("inf"));
    assert!(dir.path().join("field_goal.csv").exists());
}

fn batch(out: &Path, trials: &str) -> Output {
    let map = root().join("maps/office.map");
    regroup(&[
        "batch",
        "--map",
        map.to_str().unwrap(),
        "--trials",
        trials,
        "--strategy",
        "full",
        "--strategy",
        "search",
        "--strategy",
        "pred",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ])
}

#[test]
fn batch_rows_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = batch(a.path(), "3");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&batch(b.path(), "3")), 0);
    let rows = fs::read_to_string(a.path().join("trials.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 9);
    for f in ["trials.csv", "aggregate.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("mission_time"));
}

#[test]
fn empty_batch_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = batch(dir.path(), "0");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1);
    assert!(rows.starts_with("trial,seed,strategy"));
}
