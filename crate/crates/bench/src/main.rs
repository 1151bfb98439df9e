use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pachs_bench::closed_loop::closed_loop_record;
use pachs_bench::config::BenchConfig;
use pachs_bench::distill::{distill_pusht_critic, DistillOptions};
use pachs_bench::harness::{run_record, PathFile, PlannerKind, QueryBudget};
use pachs_bench::report::{read_jsonl, write_report, MetricsWriter};
use pachs_bench::sweep::{bench, gen_instances, load_instances};
use pachs_bench::{BenchError, Result};
use pachs_core::envs::{generate, Instance, Task};

#[derive(Parser)]
#[command(name = "pachs", version, about = "Planner benchmarks on planar navigation and pushing tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Experiment config (TOML); defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Heuristic weight of the search planners.
    #[arg(long)]
    weight: Option<f64>,
    /// Actions sampled per expansion.
    #[arg(long)]
    batch: Option<usize>,
    /// Evaluation budget per query.
    #[arg(long)]
    budget: Option<u64>,
}

impl Overrides {
    fn load(&self) -> Result<BenchConfig> {
        let mut cfg = match &self.config {
            Some(p) => BenchConfig::load(p)?,
            None => BenchConfig::default(),
        };
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(w) = self.weight {
            cfg.pachs.nav.weight = w;
            cfg.pachs.pusht.weight = w;
            cfg.epase.weight = w;
        }
        if let Some(k) = self.batch {
            cfg.pachs.nav.batch_size = k;
            cfg.pachs.pusht.batch_size = k;
        }
        if let Some(b) = self.budget {
            cfg.evaluation_budget = b;
            cfg.closed_loop.query_budget = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded instance files.
    GenInstances {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one planner on one instance.
    Plan {
        /// Instance file; alternatively --task and --seed generate one.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
        #[arg(long, value_parser = parse_planner, default_value = "pachs")]
        planner: PlannerKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory for metrics.jsonl and the path file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run planners over a directory of instances.
    Bench {
        #[arg(long)]
        instances: Option<PathBuf>,
        /// Generate instances instead of loading them.
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
        #[arg(long, default_value_t = 30)]
        count: usize,
        /// Comma-separated planner ids.
        #[arg(long, value_delimiter = ',', value_parser = parse_planner, default_value = "pachs")]
        planner: Vec<PlannerKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan, execute a prefix, observe and replan.
    ClosedLoop {
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, value_delimiter = ',', value_parser = parse_planner, default_value = "pachs")]
        planner: Vec<PlannerKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a metrics file into summary and curve CSVs.
    Report {
        jsonl: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an MLP critic to the push-T surrogate and write its weight file.
    Distill {
        #[arg(long, value_parser = parse_task, default_value = "pusht-fixed")]
        task: Task,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        hidden: usize,
        #[arg(long, default_value_t = 4000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    Task::parse(s).map_err(|e| e.to_string())
}

fn parse_planner(s: &str) -> std::result::Result<PlannerKind, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

fn instances_from(dir: Option<&Path>, task: Option<Task>, count: usize, seed: u64) -> Result<Vec<Instance>> {
    match (dir, task) {
        (Some(d), _) => load_instances(d),
        (None, Some(t)) => (0..count as u64).map(|i| Ok(generate(t, seed + i)?)).collect(),
        (None, None) => Err(BenchError::Config("pass --instances or --task".into())),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenInstances { task, count, seed, out } => {
            for p in gen_instances(task, count, seed, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Plan {
            instance,
            task,
            planner,
            seed,
            overrides,
            out,
        } => {
            let cfg = overrides.load()?;
            let inst = match (instance, task) {
                (Some(p), _) => Instance::load(&p)?,
                (None, Some(t)) => generate(t, seed)?,
                (None, None) => return Err(BenchError::Config("pass --instance or --task".into())),
            };
            create_dir(&out)?;
            let outcome = run_record(planner, &inst, &cfg, seed, 0, QueryBudget::open_loop(&cfg));
            MetricsWriter::append(&out.join("metrics.jsonl"))?.write(&outcome.metrics)?;
            if let Some(path) = outcome.path {
                PathFile {
                    instance: inst.id(),
                    planner: planner.name().to_string(),
                    path,
                }
                .save(&out.join(format!("{}-{}.path.json", inst.id(), planner.name())))?;
            }
            println!("{}", serde_json::to_string(&outcome.metrics).expect("metrics serialize"));
        }
        Command::Bench {
            instances,
            task,
            count,
            planner,
            seed,
            overrides,
            out,
        } => {
            let cfg = overrides.load()?;
            let insts = instances_from(instances.as_deref(), task, count, seed)?;
            create_dir(&out)?;
            let records = bench(&insts, &planner, &cfg, seed, &out)?;
            print!("{}", pachs_bench::report::to_csv(&pachs_bench::report::summarize(&records))?);
        }
        Command::ClosedLoop {
            instances,
            task,
            count,
            planner,
            seed,
            overrides,
            out,
        } => {
            let cfg = overrides.load()?;
            let insts = instances_from(instances.as_deref(), task, count, seed)?;
            create_dir(&out)?;
            let mut writer = MetricsWriter::create(&out.join("closed_loop.jsonl"))?;
            let mut records = Vec::new();
            for inst in &insts {
                for &kind in &planner {
                    let m = closed_loop_record(kind, inst, &cfg, seed);
                    writer.write(&m)?;
                    records.push(m);
                }
            }
            write_report(&records, &cfg.curve_budgets, &out)?;
            print!("{}", pachs_bench::report::to_csv(&pachs_bench::report::summarize(&records))?);
        }
        Command::Report { jsonl, config, out } => {
            let cfg = match config {
                Some(p) => BenchConfig::load(&p)?,
                None => BenchConfig::default(),
            };
            let records = read_jsonl(&jsonl)?;
            let (summary, curve) = write_report(&records, &cfg.curve_budgets, &out)?;
            println!("{}\n{}", summary.display(), curve.display());
        }
        Command::Distill {
            task,
            seed,
            hidden,
            samples,
            out,
        } => {
            let inst = generate(task, seed)?;
            let opts = DistillOptions {
                hidden,
                samples,
                seed,
                ..Default::default()
            };
            let fit = distill_pusht_critic(&inst, &BenchConfig::default(), &opts, &out)?;
            println!("rms error {:.6}", fit.rms_error);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
