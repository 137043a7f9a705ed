//! Multi-seed experiment runs and their files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slpmm::solver::BoundMonitor;
use slpmm::{
    estimate_expectations_with, slpmm_run, Execution, ExpectationEstimate, RunTrace, SolverError,
};

use crate::config::{ExperimentConfig, Family};
use crate::error::{HarnessError, Result};
use crate::family::{ExactValues, Problem};
use crate::with_problem;

/// Per-seed trace rows, in seed order.
pub type SeedTraces = Vec<(u64, Vec<TraceRow>)>;

/// One row of a per-seed trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    #[serde(rename = "F_sample")]
    pub f_sample: f64,
    #[serde(rename = "max_G_sample")]
    pub max_g_sample: f64,
    pub lambda_norm: f64,
    pub step_norm: f64,
    pub subproblem_iters: usize,
    pub wall_time_s: f64,
}

/// Column-wise means over seeds at one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub k: usize,
    #[serde(rename = "F_sample")]
    pub f_sample: f64,
    #[serde(rename = "max_G_sample")]
    pub max_g_sample: f64,
    pub lambda_norm: f64,
    pub step_norm: f64,
    pub subproblem_iters: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub family: Family,
    pub iterations: usize,
    pub alpha: f64,
    pub sigma: f64,
    /// `x̂^K`; empty when `K = 0`.
    pub averaged: Vec<f64>,
    pub validation: ExpectationEstimate,
    pub exact: Option<ExactValues>,
    pub reference_objective: Option<f64>,
    /// `|f(x̂^K) − f*|` from exact values, when both are known.
    pub objective_gap: Option<f64>,
    /// Largest constraint value at `x̂^K` (exact when available).
    pub max_constraint: f64,
    pub step_bound: BoundMonitor,
    pub drift_bound: BoundMonitor,
    pub total_wall_time_s: f64,
    pub epochs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub name: String,
    pub family: Family,
    pub dim: usize,
    pub num_constraints: usize,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    pub reference_objective: Option<f64>,
    pub iterations_per_epoch: Option<f64>,
    pub benchmark_mean: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub metadata: RunMetadata,
    pub summaries: Vec<RunSummary>,
    pub traces: SeedTraces,
    pub aggregate: Vec<AggregateRow>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Zero every wall-time field so outputs are byte-reproducible.
    pub deterministic_time: bool,
    pub execution: Execution,
}

pub fn trace_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("trace_seed{seed}.csv"))
}

pub fn summary_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("summary_seed{seed}.json"))
}

pub const METADATA_FILE: &str = "metadata.json";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

pub fn trace_rows(trace: &RunTrace) -> Vec<TraceRow> {
    trace
        .steps
        .iter()
        .map(|s| TraceRow {
            k: s.k,
            f_sample: s.objective_sample,
            max_g_sample: s.max_constraint_sample(),
            lambda_norm: s.lambda_norm,
            step_norm: s.step_norm,
            subproblem_iters: s.subproblem_iterations,
            wall_time_s: s.wall_time_s,
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pointwise means over seeds, accumulated in seed order.
pub fn aggregate(traces: &[(u64, Vec<TraceRow>)]) -> Vec<AggregateRow> {
    let Some(len) = traces.iter().map(|(_, t)| t.len()).min() else {
        return Vec::new();
    };
    let m = traces.len() as f64;
    (0..len)
        .map(|k| {
            let mean = |f: &dyn Fn(&TraceRow) -> f64| {
                traces.iter().map(|(_, t)| f(&t[k])).sum::<f64>() / m
            };
            AggregateRow {
                k,
                f_sample: mean(&|r| r.f_sample),
                max_g_sample: mean(&|r| r.max_g_sample),
                lambda_norm: mean(&|r| r.lambda_norm),
                step_norm: mean(&|r| r.step_norm),
                subproblem_iters: mean(&|r| r.subproblem_iters as f64),
                wall_time_s: mean(&|r| r.wall_time_s),
            }
        })
        .collect()
}

struct SeedOutcome {
    summary: RunSummary,
    rows: Vec<TraceRow>,
}

fn run_seed(
    problem: &Problem,
    config: &ExperimentConfig,
    seed: u64,
    opts: RunOptions,
    out: Option<&Path>,
) -> Result<SeedOutcome> {
    let mut solver_cfg = config.solver.clone().with_seed(seed);
    if opts.deterministic_time {
        solver_cfg.record_wall_time = false;
    }
    let result = with_problem!(problem, p => slpmm_run(p, &solver_cfg));
    let trace = match result {
        Ok(t) => t,
        Err(SolverError::Step {
            iteration,
            source,
            partial,
        }) => {
            if let Some(out) = out {
                write_csv(&trace_path(out, seed), &trace_rows(&partial))?;
            }
            return Err(HarnessError::Solver(format!(
                "seed {seed}, iteration {iteration}: {source}"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let rows = trace_rows(&trace);
    let summary = summarize(problem, config, seed, &trace, opts.execution)?;
    if let Some(out) = out {
        write_csv(&trace_path(out, seed), &rows)?;
        write_json(&summary_path(out, seed), &summary)?;
    }
    Ok(SeedOutcome { summary, rows })
}

fn summarize(
    problem: &Problem,
    config: &ExperimentConfig,
    seed: u64,
    trace: &RunTrace,
    exec: Execution,
) -> Result<RunSummary> {
    let point = trace
        .averaged
        .clone()
        .unwrap_or_else(|| trace.initial_point.clone());
    let v = &config.validation;
    let validation = with_problem!(problem, p => estimate_expectations_with(p, &point, v.samples, v.seed, exec))?;
    let exact = problem.exact_values(&point)?;
    let reference = problem.reference_objective();
    let objective_gap = match (&exact, reference) {
        (Some(e), Some(r)) => Some((e.objective - r).abs()),
        _ => None,
    };
    let max_constraint = exact
        .as_ref()
        .map_or(validation.max_constraint(), |e| e.max_constraint());
    Ok(RunSummary {
        seed,
        family: problem.family(),
        iterations: trace.len(),
        alpha: trace.alpha,
        sigma: trace.sigma,
        averaged: trace.averaged.clone().unwrap_or_default(),
        validation,
        exact,
        reference_objective: reference,
        objective_gap,
        max_constraint,
        step_bound: trace.step_bound.clone(),
        drift_bound: trace.drift_bound.clone(),
        total_wall_time_s: trace.steps.iter().map(|s| s.wall_time_s).sum(),
        epochs: problem
            .iterations_per_epoch()
            .map(|ipe| trace.len() as f64 / ipe),
    })
}

/// Runs every configured seed and, when `out` is given, writes
/// `trace_seed{s}.csv`, `summary_seed{s}.json`, `aggregate.csv` and
/// `metadata.json` there.
pub fn run_experiment(
    config: &ExperimentConfig,
    out: Option<&Path>,
    opts: RunOptions,
) -> Result<ExperimentReport> {
    config.check()?;
    let problem = Problem::build(&config.problem)?;
    config.solver.validate(problem.num_constraints())?;
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(|e| HarnessError::Io(format!("{}: {e}", out.display())))?;
    }
    let outcomes = opts.execution.map_slice(&config.seeds, |&seed| {
        run_seed(&problem, config, seed, opts, out)
    });

    let mut summaries = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::with_capacity(outcomes.len());
    for (outcome, &seed) in outcomes.into_iter().zip(&config.seeds) {
        let o = outcome?;
        summaries.push(o.summary);
        traces.push((seed, o.rows));
    }
    let aggregate = aggregate(&traces);
    let metadata = RunMetadata {
        name: config.name.clone(),
        family: problem.family(),
        dim: problem.dim(),
        num_constraints: problem.num_constraints(),
        iterations: config.solver.iterations,
        seeds: config.seeds.clone(),
        reference_objective: problem.reference_objective(),
        iterations_per_epoch: problem.iterations_per_epoch(),
        benchmark_mean: problem.benchmark_mean(),
    };
    if let Some(out) = out {
        write_csv(&out.join(AGGREGATE_FILE), &aggregate)?;
        write_json(&out.join(METADATA_FILE), &metadata)?;
    }
    Ok(ExperimentReport {
        metadata,
        summaries,
        traces,
        aggregate,
    })
}

/// Reads back the per-seed traces of a finished run directory.
pub fn load_run(dir: &Path) -> Result<(RunMetadata, SeedTraces)> {
    let metadata: RunMetadata = read_json(&dir.join(METADATA_FILE))?;
    let traces = metadata
        .seeds
        .iter()
        .map(|&s| Ok((s, read_csv(&trace_path(dir, s))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((metadata, traces))
}
