//! Builds the configured problem and its family-specific reference values.

use serde::Serialize;
use slpmm::problems::{
    load_scenarios_csv, load_sparse_classification, np_oracle, ssd_oracle, synthetic_gaussians,
    synthetic_scenarios, LabelPartition, NpClassificationData, NpProblem, QcqpInstance,
    SsdPortfolioData, SsdProblem,
};
use slpmm::{full_pass_expectations, StochasticProblem};

use crate::config::{Family, NpData, NpSpec, ProblemSpec, QcqpSpec, SsdData, SsdSpec};
use crate::error::Result;

pub enum Problem {
    Np(NpProblem),
    Qcqp(QcqpInstance),
    Ssd(SsdProblem),
}

/// Runs `$body` with `$p` bound to the concrete problem.
#[macro_export]
macro_rules! with_problem {
    ($problem:expr, $p:ident => $body:expr) => {
        match $problem {
            $crate::family::Problem::Np($p) => $body,
            $crate::family::Problem::Qcqp($p) => $body,
            $crate::family::Problem::Ssd($p) => $body,
        }
    };
}

/// Exact `f(x)` and `g(x)` where the family allows it (closed form for the
/// QCQP, a full pass for finite-sum data).
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ExactValues {
    pub objective: f64,
    pub constraints: Vec<f64>,
}

impl ExactValues {
    pub fn max_constraint(&self) -> f64 {
        self.constraints
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Problem {
    pub fn build(spec: &ProblemSpec) -> Result<Self> {
        Ok(match spec {
            ProblemSpec::Np(s) => Problem::Np(build_np(s)?),
            ProblemSpec::Qcqp(s) => Problem::Qcqp(build_qcqp(s)?),
            ProblemSpec::Ssd(s) => Problem::Ssd(build_ssd(s)?),
        })
    }

    pub fn family(&self) -> Family {
        match self {
            Problem::Np(_) => Family::Np,
            Problem::Qcqp(_) => Family::Qcqp,
            Problem::Ssd(_) => Family::Ssd,
        }
    }

    pub fn dim(&self) -> usize {
        with_problem!(self, p => p.dim())
    }

    pub fn num_constraints(&self) -> usize {
        with_problem!(self, p => p.num_constraints())
    }

    /// Known optimal value, if any.
    pub fn reference_objective(&self) -> Option<f64> {
        match self {
            Problem::Qcqp(q) => Some(q.optimal_value()),
            _ => None,
        }
    }

    pub fn iterations_per_epoch(&self) -> Option<f64> {
        match self {
            Problem::Np(p) => Some(p.data().iterations_per_epoch()),
            _ => None,
        }
    }

    /// Mean benchmark return (SSD only).
    pub fn benchmark_mean(&self) -> Option<f64> {
        match self {
            Problem::Ssd(p) => Some(p.data().benchmark_mean()),
            _ => None,
        }
    }

    pub fn exact_values(&self, x: &[f64]) -> Result<Option<ExactValues>> {
        Ok(match self {
            Problem::Qcqp(q) => Some(ExactValues {
                objective: q.expected_objective(x),
                constraints: q.expected_constraints(x),
            }),
            Problem::Np(p) => full_pass_expectations(p, x)?.map(exact_from_estimate),
            Problem::Ssd(p) => full_pass_expectations(p, x)?.map(exact_from_estimate),
        })
    }
}

fn exact_from_estimate(e: slpmm::ExpectationEstimate) -> ExactValues {
    ExactValues {
        objective: e.objective,
        constraints: e.constraints,
    }
}

fn build_qcqp(s: &QcqpSpec) -> Result<QcqpInstance> {
    Ok(QcqpInstance::generate(s.n, s.p, s.radius, s.instance_seed)?)
}

fn build_np(s: &NpSpec) -> Result<NpProblem> {
    let mut data = match &s.data {
        NpData::Synthetic {
            dim,
            positives,
            negatives,
            separation,
            seed,
        } => {
            let (pos, neg) = synthetic_gaussians(*dim, *positives, *negatives, *separation, *seed);
            NpClassificationData::new(pos, neg)?
        }
        NpData::File {
            path,
            positive_labels,
        } => {
            let partition = positive_labels
                .as_ref()
                .map(|l| LabelPartition::new(l.iter().cloned()));
            load_sparse_classification(path, partition.as_ref())?
        }
    };
    data.tau = s.tau;
    data.set_batch_fraction(s.batch_fraction)?;
    Ok(np_oracle(data, s.radius)?)
}

fn build_ssd(s: &SsdSpec) -> Result<SsdProblem> {
    let data = match &s.data {
        SsdData::Synthetic {
            assets,
            scenarios,
            seed,
        } => {
            let (returns, benchmark) = synthetic_scenarios(*assets, *scenarios, *seed);
            SsdPortfolioData::new(returns, benchmark)?
        }
        SsdData::File { path } => load_scenarios_csv(path)?,
    };
    let n = data.num_assets();
    let mut data = data.with_upper(vec![s.cap; n])?.with_batch(s.batch)?;
    if s.support_points > 0 {
        data = data.with_quantile_support(s.support_points)?;
    }
    Ok(ssd_oracle(data)?)
}
