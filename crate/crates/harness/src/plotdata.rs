//! Long-format plot tables: `series, x, value`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::experiment::{aggregate, write_csv, write_json, RunMetadata, TraceRow};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotReference {
    pub reference_objective: Option<f64>,
    pub benchmark_mean: Option<f64>,
}

pub const COLUMNS: [&str; 4] = ["F_sample", "max_G_sample", "lambda_norm", "step_norm"];

fn column(r: &TraceRow, c: &str) -> f64 {
    match c {
        "F_sample" => r.f_sample,
        "max_G_sample" => r.max_g_sample,
        "lambda_norm" => r.lambda_norm,
        _ => r.step_norm,
    }
}

/// Per-seed series for every column, plus pointwise means when there is more
/// than one seed and a constant reference series when the optimum is known.
pub fn iteration_series(meta: &RunMetadata, traces: &[(u64, Vec<TraceRow>)]) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    for c in COLUMNS {
        for (seed, rows) in traces {
            out.extend(rows.iter().map(|r| PlotPoint {
                series: format!("{c}/seed{seed}"),
                x: r.k as f64,
                value: column(r, c),
            }));
        }
    }
    if traces.len() > 1 {
        let agg = aggregate(traces);
        for c in COLUMNS {
            out.extend(agg.iter().map(|a| {
                let value = match c {
                    "F_sample" => a.f_sample,
                    "max_G_sample" => a.max_g_sample,
                    "lambda_norm" => a.lambda_norm,
                    _ => a.step_norm,
                };
                PlotPoint {
                    series: format!("{c}/mean"),
                    x: a.k as f64,
                    value,
                }
            }));
        }
    }
    if let Some(r) = meta.reference_objective {
        let last = traces
            .iter()
            .map(|(_, t)| t.len())
            .max()
            .unwrap_or(1)
            .saturating_sub(1);
        for x in [0.0, last as f64] {
            out.push(PlotPoint {
                series: "reference_optimum".into(),
                x,
                value: r,
            });
        }
    }
    out
}

/// `F_sample` and `max_G_sample` against cumulative wall time.
pub fn time_series(traces: &[(u64, Vec<TraceRow>)]) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    for c in ["F_sample", "max_G_sample"] {
        for (seed, rows) in traces {
            let mut clock = 0.0;
            for r in rows {
                clock += r.wall_time_s;
                out.push(PlotPoint {
                    series: format!("{c}/seed{seed}"),
                    x: clock,
                    value: column(r, c),
                });
            }
        }
    }
    out
}

pub fn epoch_series(traces: &[(u64, Vec<TraceRow>)], iterations_per_epoch: f64) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    for c in ["F_sample", "max_G_sample"] {
        for (seed, rows) in traces {
            out.extend(rows.iter().map(|r| PlotPoint {
                series: format!("{c}/seed{seed}"),
                x: (r.k + 1) as f64 / iterations_per_epoch,
                value: column(r, c),
            }));
        }
    }
    out
}

/// Writes `plot_iterations.csv`, `plot_time.csv`, `plot_epochs.csv` (finite-sum
/// families only) and `plot_reference.json` into `out`; returns their paths.
pub fn emit_plotdata(
    meta: &RunMetadata,
    traces: &[(u64, Vec<TraceRow>)],
    out: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let mut put = |name: &str, points: Vec<PlotPoint>| -> Result<()> {
        let path = out.join(name);
        write_csv(&path, &points)?;
        written.push(path);
        Ok(())
    };
    put("plot_iterations.csv", iteration_series(meta, traces))?;
    put("plot_time.csv", time_series(traces))?;
    if let Some(ipe) = meta.iterations_per_epoch {
        put("plot_epochs.csv", epoch_series(traces, ipe))?;
    }
    let reference = out.join("plot_reference.json");
    write_json(
        &reference,
        &PlotReference {
            reference_objective: meta.reference_objective,
            benchmark_mean: meta.benchmark_mean,
        },
    )?;
    written.push(reference);
    Ok(written)
}
