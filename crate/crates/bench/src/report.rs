//! JSON-lines metrics, CSV summaries and solved-fraction curves.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use pachs_core::metrics::RunMetrics;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Appends one JSON line per record and flushes after each.
pub struct MetricsWriter {
    file: File,
    path: PathBuf,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
        Ok(MetricsWriter {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn append(path: &Path) -> Result<Self> {
        let file = File::options()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| BenchError::io(path, e))?;
        Ok(MetricsWriter {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, m: &RunMetrics) -> Result<()> {
        let line = serde_json::to_string(m).expect("metrics serialize");
        writeln!(self.file, "{line}")
            .and_then(|_| self.file.flush())
            .map_err(|e| BenchError::io(&self.path, e))
    }
}

pub fn parse_jsonl(text: &str, path: &Path) -> Result<Vec<RunMetrics>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| BenchError::Line {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RunMetrics>> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_jsonl(&text, path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub planner: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful runs only.
    pub mean_wall_time: Option<f64>,
    pub ci95_wall_time: Option<f64>,
    pub mean_cost: Option<f64>,
    pub ci95_cost: Option<f64>,
    /// Over all runs.
    pub mean_expansions: f64,
    pub mean_evaluations: f64,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Half-width of the normal-approximation 95% interval of the mean.
fn ci95(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some(1.96 * (var / xs.len() as f64).sqrt())
}

/// One row per planner, sorted by planner id.
pub fn summarize(records: &[RunMetrics]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<&str, Vec<&RunMetrics>> = BTreeMap::new();
    for r in records {
        groups.entry(r.planner.as_str()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(planner, runs)| {
            let ok: Vec<&&RunMetrics> = runs.iter().filter(|r| r.success).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.wall_time).collect();
            let costs: Vec<f64> = ok.iter().filter_map(|r| r.solution_cost).collect();
            let n = runs.len() as f64;
            SummaryRow {
                planner: planner.to_string(),
                runs: runs.len(),
                successes: ok.len(),
                success_rate: ok.len() as f64 / n,
                mean_wall_time: mean(&times),
                ci95_wall_time: ci95(&times),
                mean_cost: mean(&costs),
                ci95_cost: ci95(&costs),
                mean_expansions: runs.iter().map(|r| r.expansions as f64).sum::<f64>() / n,
                mean_evaluations: runs.iter().map(|r| r.evaluations as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub planner: String,
    pub evaluations: u64,
    pub solved_fraction: f64,
}

/// Fraction of each planner's runs that succeeded within `x` evaluations, for each `x`.
pub fn solved_curve(records: &[RunMetrics], budgets: &[u64]) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<&str, Vec<&RunMetrics>> = BTreeMap::new();
    for r in records {
        groups.entry(r.planner.as_str()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (planner, runs) in groups {
        for &x in budgets {
            let solved = runs.iter().filter(|r| r.success && r.evaluations <= x).count();
            out.push(CurvePoint {
                planner: planner.to_string(),
                evaluations: x,
                solved_fraction: solved as f64 / runs.len() as f64,
            });
        }
    }
    out
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| BenchError::Config(format!("csv serialization: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Config(format!("csv serialization: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// Writes `summary.csv` and `curve.csv` for `records` into `dir`.
pub fn write_report(records: &[RunMetrics], budgets: &[u64], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let summary = dir.join("summary.csv");
    let curve = dir.join("curve.csv");
    write_file(&summary, &to_csv(&summarize(records))?)?;
    write_file(&curve, &to_csv(&solved_curve(records, budgets))?)?;
    Ok((summary, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(planner: &str, success: bool, evals: u64, cost: f64, time: f64) -> RunMetrics {
        RunMetrics {
            success,
            solution_cost: success.then_some(cost),
            evaluations: evals,
            wall_time: time,
            ..RunMetrics::new(planner)
        }
    }

    #[test]
    fn three_of_five() {
        let recs: Vec<_> = (0..5).map(|i| run("p", i < 3, 10, 1.0, 0.1)).collect();
        let rows = summarize(&recs);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].success_rate, 0.6);
    }

    #[test]
    fn failures_do_not_move_cost_statistics() {
        let mut recs = vec![run("p", true, 5, 2.0, 0.5), run("p", true, 5, 4.0, 1.5)];
        let before = summarize(&recs)[0].clone();
        let mut forced = run("p", false, 5, 0.0, 100.0);
        forced.solution_cost = None;
        recs.push(forced);
        let after = summarize(&recs)[0].clone();
        assert_eq!(before.mean_cost, Some(3.0));
        assert_eq!(after.mean_cost, before.mean_cost);
        assert_eq!(after.mean_wall_time, before.mean_wall_time);
        assert_eq!(after.ci95_cost, before.ci95_cost);
    }

    #[test]
    fn empty_input() {
        let rows = summarize(&[]);
        assert!(rows.is_empty());
        assert!(parse_jsonl("", Path::new("x")).unwrap().is_empty());
    }

    #[test]
    fn malformed_line_is_named() {
        let good = serde_json::to_string(&run("p", true, 1, 1.0, 1.0)).unwrap();
        let text = format!("{good}\n\n{{not json\n");
        match parse_jsonl(&text, Path::new("m.jsonl")).unwrap_err() {
            BenchError::Line { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn curve_counts_within_budget() {
        let recs = vec![
            run("a", true, 100, 1.0, 0.1),
            run("a", true, 900, 1.0, 0.1),
            run("a", false, 1000, 0.0, 0.1),
            run("a", true, 400, 1.0, 0.1),
        ];
        let c = solved_curve(&recs, &[50, 500, 1000]);
        let fr: Vec<f64> = c.iter().map(|p| p.solved_fraction).collect();
        assert_eq!(fr, vec![0.0, 0.5, 0.75]);
    }

    #[test]
    fn ci_of_known_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((ci95(&xs).unwrap() - 1.96 * sd / 2.0).abs() < 1e-12);
        assert_eq!(ci95(&[7.0]), Some(0.0));
        assert_eq!(ci95(&[]), None);
    }
}
