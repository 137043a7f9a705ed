//! Monte-Carlo validation of a single point.

use std::path::Path;

use serde::{Deserialize, Serialize};
use slpmm::{estimate_expectations_with, Execution, ExpectationEstimate};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::family::{ExactValues, Problem};
use crate::with_problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub point: Vec<f64>,
    pub estimate: ExpectationEstimate,
    pub exact: Option<ExactValues>,
    pub reference_objective: Option<f64>,
}

/// Reads a point from JSON: either a bare array or an object with an
/// `averaged` field (a run summary).
pub fn read_point(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let array = match &value {
        serde_json::Value::Object(map) => map.get("averaged").cloned(),
        other => Some(other.clone()),
    }
    .ok_or_else(|| HarnessError::Config(format!("{}: no point found", path.display())))?;
    serde_json::from_value(array)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

/// Estimates `f` and `g` at `point` (the problem's start point when `None`).
pub fn validate_point(
    config: &ExperimentConfig,
    point: Option<Vec<f64>>,
    seed: u64,
    exec: Execution,
) -> Result<ValidationReport> {
    let problem = Problem::build(&config.problem)?;
    let point = match point {
        Some(p) => p,
        None => with_problem!(&problem, p => slpmm::StochasticProblem::initial_point(p)),
    };
    let samples = config.validation.samples;
    let estimate =
        with_problem!(&problem, p => estimate_expectations_with(p, &point, samples, seed, exec))?;
    let exact = problem.exact_values(&point)?;
    Ok(ValidationReport {
        point,
        estimate,
        exact,
        reference_objective: problem.reference_objective(),
    })
}
