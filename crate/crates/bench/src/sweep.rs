//! Instance files and open-loop benchmark sweeps.

use std::path::{Path, PathBuf};

use pachs_core::envs::{generate, Instance, Task};
use pachs_core::metrics::RunMetrics;

use crate::config::BenchConfig;
use crate::error::{BenchError, Result};
use crate::harness::{repetition_seed, run_record, PathFile, PlannerKind, QueryBudget};
use crate::report::{write_report, MetricsWriter};

pub fn instance_file_name(inst: &Instance) -> String {
    format!("{}.toml", inst.id())
}

/// Writes instances for seeds `seed..seed + count` into `dir`.
pub fn gen_instances(task: Task, count: usize, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    if count == 0 {
        return Err(BenchError::Config("instance count must be >= 1".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    (0..count as u64)
        .map(|i| {
            let inst = generate(task, seed + i)?;
            let path = dir.join(instance_file_name(&inst));
            inst.save(&path)?;
            Ok(path)
        })
        .collect()
}

/// Loads every `.toml` instance in `dir`, ordered by file name. A single file is
/// accepted as well.
pub fn load_instances(dir: &Path) -> Result<Vec<Instance>> {
    if dir.is_file() {
        return Ok(vec![Instance::load(dir)?]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| BenchError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(BenchError::Config(format!("no instance files in {}", dir.display())));
    }
    files.iter().map(|p| Ok(Instance::load(p)?)).collect()
}

/// Runs every planner on every instance `cfg.repetitions` times. Writes `runs.jsonl`,
/// `summary.csv`, `curve.csv` and the solution paths under `out`.
pub fn bench(
    instances: &[Instance],
    planners: &[PlannerKind],
    cfg: &BenchConfig,
    seed: u64,
    out: &Path,
) -> Result<Vec<RunMetrics>> {
    if instances.is_empty() {
        return Err(BenchError::Config("bench needs at least one instance".into()));
    }
    let paths_dir = out.join("paths");
    std::fs::create_dir_all(&paths_dir).map_err(|e| BenchError::io(&paths_dir, e))?;
    let mut writer = MetricsWriter::create(&out.join("runs.jsonl"))?;
    let mut records = Vec::new();
    let budget = QueryBudget::open_loop(cfg);
    for inst in instances {
        for &kind in planners {
            for rep in 0..cfg.repetitions {
                let outcome = run_record(kind, inst, cfg, repetition_seed(seed, rep), rep, budget);
                if let Some(path) = outcome.path {
                    let file = paths_dir.join(format!("{}-{}-{rep}.json", inst.id(), kind.name()));
                    PathFile {
                        instance: inst.id(),
                        planner: kind.name().to_string(),
                        path,
                    }
                    .save(&file)?;
                }
                writer.write(&outcome.metrics)?;
                records.push(outcome.metrics);
            }
        }
    }
    write_report(&records, &cfg.curve_budgets, out)?;
    Ok(records)
}
