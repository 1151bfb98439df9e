use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use pachs_bench::closed_loop::{closed_loop, closed_loop_record};
use pachs_bench::config::BenchConfig;
use pachs_bench::harness::{replay, run_planner, run_record, PathFile, PlannerKind, QueryBudget};
use pachs_bench::report::{parse_jsonl, read_jsonl, summarize, to_csv, write_report, MetricsWriter};
use pachs_bench::sweep::{bench, gen_instances, load_instances};
use pachs_bench::BenchError;
use pachs_core::envs::{generate, Environment, Instance, Task, World};
use pachs_core::metrics::RunMetrics;

fn small_cfg() -> BenchConfig {
    BenchConfig {
        evaluation_budget: 20_000,
        repetitions: 1,
        ..Default::default()
    }
}

fn start_at_goal() -> Instance {
    let mut inst = generate(Task::NavShelf, 0).unwrap();
    if let World::Nav { start, env } = &mut inst.world {
        *start = env.goal_center;
    }
    inst
}

#[test]
fn gen_instances_single_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let files = gen_instances(Task::PushTObs, 1, 4, dir.path()).unwrap();
    assert_eq!(files.len(), 1);
    assert_eq!(Instance::load(&files[0]).unwrap(), generate(Task::PushTObs, 4).unwrap());
}

#[test]
fn gen_instances_is_byte_identical_across_invocations() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = gen_instances(Task::NavShelf, 5, 10, a.path()).unwrap();
    let fb = gen_instances(Task::NavShelf, 5, 10, b.path()).unwrap();
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn gen_instances_nav_goals_are_valid() {
    let dir = tempfile::tempdir().unwrap();
    gen_instances(Task::NavShelf, 100, 0, dir.path()).unwrap();
    let insts = load_instances(dir.path()).unwrap();
    assert_eq!(insts.len(), 100);
    for inst in insts {
        let env = inst.nav().unwrap();
        let goal = pachs_core::StateVec::new(env.goal_center.to_vec());
        assert!(env.valid_state(&goal), "{}", inst.id());
    }
}

#[test]
fn gen_instances_rejects_zero_count_and_bad_path() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        gen_instances(Task::NavShelf, 0, 0, dir.path()),
        Err(BenchError::Config(_))
    ));
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    assert!(matches!(
        gen_instances(Task::NavShelf, 1, 0, &file.join("sub")),
        Err(BenchError::Io { .. })
    ));
}

#[test]
fn plan_on_solved_start_costs_nothing() {
    let inst = start_at_goal();
    for kind in [PlannerKind::Pachs, PlannerKind::ParallelRollout, PlannerKind::Beam, PlannerKind::Epase] {
        let out = run_record(kind, &inst, &small_cfg(), 0, 0, QueryBudget::open_loop(&small_cfg()));
        assert!(out.metrics.success, "{kind}");
        assert_eq!(out.metrics.solution_cost, Some(0.0), "{kind}");
    }
}

#[test]
fn plan_is_deterministic_with_one_worker() {
    let inst = generate(Task::NavShelf, 3).unwrap();
    let cfg = small_cfg();
    let run = || {
        let mut m = run_record(PlannerKind::Pachs, &inst, &cfg, 9, 0, QueryBudget::open_loop(&cfg)).metrics;
        m.wall_time = 0.0;
        m
    };
    assert_eq!(run(), run());
}

#[test]
fn replayed_cost_matches_reported_cost() {
    let cfg = small_cfg();
    for seed in 0..5 {
        let inst = generate(Task::NavShelf, seed).unwrap();
        let r = run_planner(PlannerKind::Pachs, &inst, &cfg, seed, QueryBudget::open_loop(&cfg)).unwrap();
        assert!(r.metrics.success);
        let cost = replay(&inst, &r.path).unwrap();
        assert!((cost - r.metrics.solution_cost.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn tampered_path_fails_replay() {
    let cfg = small_cfg();
    let inst = generate(Task::NavShelf, 2).unwrap();
    let mut path = run_planner(PlannerKind::Pachs, &inst, &cfg, 0, QueryBudget::open_loop(&cfg))
        .unwrap()
        .path;
    path.costs[0] += 1e-3;
    assert!(matches!(replay(&inst, &path), Err(BenchError::Replay(_))));
}

#[test]
fn path_file_round_trips() {
    let cfg = small_cfg();
    let inst = generate(Task::NavShelf, 1).unwrap();
    let path = run_planner(PlannerKind::Pachs, &inst, &cfg, 0, QueryBudget::open_loop(&cfg))
        .unwrap()
        .path;
    let file = PathFile {
        instance: inst.id(),
        planner: "pachs".into(),
        path,
    };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    file.save(&p).unwrap();
    assert_eq!(PathFile::load(&p).unwrap(), file);
}

#[test]
fn bench_one_run_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(Task::NavShelf, 0).unwrap();
    let records = bench(&[inst], &[PlannerKind::Pachs], &small_cfg(), 0, dir.path()).unwrap();
    assert_eq!(records.len(), 1);
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(dir.path().join("curve.csv").exists());
    assert_eq!(std::fs::read_dir(dir.path().join("paths")).unwrap().count(), 1);
}

/// Success counts recomputed straight from the JSON text, without the report types.
fn recount(jsonl: &str) -> BTreeMap<String, (usize, usize)> {
    let mut out: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for line in jsonl.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let e = out.entry(v["planner"].as_str().unwrap().to_string()).or_default();
        e.1 += 1;
        if v["success"].as_bool().unwrap() {
            e.0 += 1;
        }
    }
    out
}

#[test]
fn bench_success_rate_matches_recount() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BenchConfig {
        evaluation_budget: 3_000,
        repetitions: 2,
        ..Default::default()
    };
    let insts: Vec<Instance> = (0..3).map(|s| generate(Task::PushTObs, s).unwrap()).collect();
    bench(
        &insts,
        &[PlannerKind::Pachs, PlannerKind::ParallelRollout, PlannerKind::SingleRollout],
        &cfg,
        1,
        dir.path(),
    )
    .unwrap();
    let text = std::fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
    let counts = recount(&text);
    let mut reader = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let (ok, n) = counts[&rec[0]];
        assert_eq!(rec[1].parse::<usize>().unwrap(), n);
        assert_eq!(rec[3].parse::<f64>().unwrap(), ok as f64 / n as f64);
        rows += 1;
    }
    assert_eq!(rows, 3);
}

#[test]
fn bench_records_planner_errors_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let insts = vec![generate(Task::PushTFixed, 0).unwrap(), generate(Task::NavShelf, 0).unwrap()];
    let records = bench(&insts, &[PlannerKind::Epase], &small_cfg(), 0, dir.path()).unwrap();
    assert_eq!(records.len(), 2);
    assert!(!records[0].success);
    assert!(records[0].error.is_some());
    assert!(records[1].success);
}

fn record(planner: &str, success: bool, cost: f64) -> RunMetrics {
    RunMetrics {
        success,
        solution_cost: success.then_some(cost),
        ..RunMetrics::new(planner)
    }
}

#[test]
fn cost_statistics_ignore_failed_runs() {
    let ok: Vec<RunMetrics> = (0..4).map(|i| record("p", true, 1.0 + i as f64)).collect();
    let mut with_failure = ok.clone();
    let mut failed = record("p", false, 0.0);
    failed.wall_time = 100.0;
    failed.error = Some("forced".into());
    with_failure.push(failed);
    let (a, b) = (&summarize(&ok)[0], &summarize(&with_failure)[0]);
    assert_eq!(a.mean_cost, b.mean_cost);
    assert_eq!(a.mean_wall_time, b.mean_wall_time);
    assert_eq!(b.success_rate, 0.8);
}

#[test]
fn report_of_empty_input_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("empty.jsonl");
    std::fs::write(&jsonl, "").unwrap();
    let records = read_jsonl(&jsonl).unwrap();
    assert!(records.is_empty());
    let (summary, curve) = write_report(&records, &[100], dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(summary).unwrap(), "");
    assert_eq!(std::fs::read_to_string(curve).unwrap(), "");
}

#[test]
fn report_is_idempotent_and_counts_three_of_five() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("runs.jsonl");
    let mut w = MetricsWriter::create(&jsonl).unwrap();
    for i in 0..5 {
        w.write(&record("pachs", i < 3, 2.0)).unwrap();
    }
    drop(w);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let records = read_jsonl(&jsonl).unwrap();
    let (s1, c1) = write_report(&records, &[10, 100], &out1).unwrap();
    let (s2, c2) = write_report(&read_jsonl(&jsonl).unwrap(), &[10, 100], &out2).unwrap();
    let read = |p: &Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&s1), read(&s2));
    assert_eq!(read(&c1), read(&c2));
    assert_eq!(summarize(&records)[0].success_rate, 0.6);
    assert!(to_csv(&summarize(&records)).unwrap().contains(",0.6,"));
}

#[test]
fn malformed_line_is_reported_by_number() {
    let good = serde_json::to_string(&record("p", true, 1.0)).unwrap();
    let text = format!("{good}\n{good}\n{{not json\n");
    match parse_jsonl(&text, Path::new("runs.jsonl")) {
        Err(BenchError::Line { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a line error, got {other:?}"),
    }
}

fn cl_cfg(horizon: usize, max_replans: u32, query_budget: u64) -> BenchConfig {
    let mut cfg = small_cfg();
    cfg.closed_loop.horizon = horizon;
    cfg.closed_loop.max_replans = max_replans;
    cfg.closed_loop.query_budget = query_budget;
    cfg
}

#[test]
fn closed_loop_with_long_horizon_is_one_plan_and_execute() {
    for seed in 0..3 {
        let inst = generate(Task::NavShelf, seed).unwrap();
        let cfg = cl_cfg(10_000, 5, 20_000);
        let planned = run_planner(
            PlannerKind::Pachs,
            &inst,
            &cfg,
            seed,
            QueryBudget {
                evaluations: cfg.closed_loop.query_budget,
                seconds: None,
            },
        )
        .unwrap();
        assert!(planned.metrics.success);
        let run = closed_loop(PlannerKind::Pachs, &inst, &cfg, seed).unwrap();
        assert!(run.metrics.success);
        assert_eq!(run.metrics.replans, Some(1));
        assert_eq!(run.states, planned.path.states);
        assert_eq!(run.metrics.executed_cost, Some(planned.path.total_cost));
    }
}

#[test]
fn closed_loop_executes_at_most_r_times_h_actions() {
    let inst = generate(Task::PushTFixed, 2).unwrap();
    for kind in [PlannerKind::Pachs, PlannerKind::ParallelRollout, PlannerKind::SingleRollout] {
        let cfg = cl_cfg(4, 1, 50);
        let m = closed_loop_record(kind, &inst, &cfg, 0);
        assert!(m.executed_actions.unwrap() <= 4, "{kind}");
        assert_eq!(m.replans, Some(1), "{kind}");
        let cfg = cl_cfg(3, 5, 300);
        let m = closed_loop_record(kind, &inst, &cfg, 0);
        assert!(m.executed_actions.unwrap() <= 15, "{kind}");
    }
}

#[test]
fn closed_loop_rejects_planners_without_partial_paths() {
    let inst = generate(Task::NavShelf, 0).unwrap();
    for kind in [PlannerKind::Beam, PlannerKind::Epase] {
        assert!(closed_loop(kind, &inst, &small_cfg(), 0).is_err());
        assert!(!closed_loop_record(kind, &inst, &small_cfg(), 0).success);
    }
}

#[test]
fn cli_plan_writes_metrics_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pachs"))
        .args(["plan", "--task", "nav-shelf", "--seed", "2", "--budget", "20000", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_jsonl(&dir.path().join("metrics.jsonl")).unwrap();
    assert_eq!(records.len(), 1);
    assert!(records[0].success);
    let paths: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".path.json"))
        .collect();
    assert_eq!(paths.len(), 1);
    let file = PathFile::load(&paths[0].path()).unwrap();
    let inst = generate(Task::NavShelf, 2).unwrap();
    assert!((replay(&inst, &file.path).unwrap() - records[0].solution_cost.unwrap()).abs() < 1e-9);
}

#[test]
fn cli_reports_bad_input_with_failure_exit() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{oops\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pachs"))
        .args(["report"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}
