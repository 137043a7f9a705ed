//! Stochastic problem abstraction and Monte-Carlo validation.
//!
//! A problem is `min E[F(x, ξ)]` over `x ∈ C` subject to
//! `E[G_i(x, ξ)] ≤ 0, i = 1..p`, accessed only through per-scenario
//! oracles. Oracles are immutable and shared across threads; scenario
//! streams are not.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::feasible::{FeasibleSet, FEASIBILITY_TOL};
use crate::rng::{SeededStream, StreamId};
use crate::vecops::all_finite;

/// All oracle outputs at one `(x, ξ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub constraints: Vec<f64>,
    pub objective_grad: Vec<f64>,
    /// Row `i` is a subgradient of `G_i(·, ξ)`.
    pub constraint_grads: Vec<Vec<f64>>,
}

impl Evaluation {
    pub fn is_finite(&self) -> bool {
        self.objective.is_finite()
            && all_finite(&self.constraints)
            && all_finite(&self.objective_grad)
            && self.constraint_grads.iter().all(|r| all_finite(r))
    }
}

pub trait StochasticProblem: Sync {
    type Scenario: Clone + Debug + Send + Sync;

    fn dim(&self) -> usize;

    fn num_constraints(&self) -> usize;

    fn feasible_set(&self) -> &FeasibleSet;

    /// Draws one scenario. Must consume the stream deterministically.
    fn sample(&self, stream: &mut SeededStream) -> Self::Scenario;

    fn objective(&self, x: &[f64], scenario: &Self::Scenario) -> f64;

    fn constraints(&self, x: &[f64], scenario: &Self::Scenario) -> Vec<f64>;

    fn objective_subgradient(&self, x: &[f64], scenario: &Self::Scenario) -> Vec<f64>;

    fn constraint_subgradients(&self, x: &[f64], scenario: &Self::Scenario) -> Vec<Vec<f64>>;

    fn evaluate(&self, x: &[f64], scenario: &Self::Scenario) -> Evaluation {
        Evaluation {
            objective: self.objective(x, scenario),
            constraints: self.constraints(x, scenario),
            objective_grad: self.objective_subgradient(x, scenario),
            constraint_grads: self.constraint_subgradients(x, scenario),
        }
    }

    /// Scenarios whose uniform average reproduces `f` and `g` exactly, for
    /// finite-sum problems.
    fn full_pass(&self) -> Option<Vec<Self::Scenario>> {
        None
    }

    /// Starting point `x⁰`.
    fn initial_point(&self) -> Vec<f64> {
        self.feasible_set().default_start()
    }
}

/// Scenario `index` of a validation run under `seed`.
pub fn validation_scenario<P: StochasticProblem>(
    problem: &P,
    seed: u64,
    index: usize,
) -> P::Scenario {
    let mut stream = SeededStream::new(seed, StreamId::validation(index as u64));
    problem.sample(&mut stream)
}

/// Sample means and standard errors of `F(x, ξ)` and `G(x, ξ)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExpectationEstimate {
    pub samples: usize,
    pub objective: f64,
    pub objective_stderr: f64,
    pub constraints: Vec<f64>,
    pub constraint_stderr: Vec<f64>,
}

impl ExpectationEstimate {
    pub fn max_constraint(&self) -> f64 {
        self.constraints
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Running mean / second-moment accumulator (Welford), mergeable in a fixed
/// order so the result does not depend on how work was split.
#[derive(Clone, Debug)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(width: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; width],
            m2: vec![0.0; width],
        }
    }

    fn push(&mut self, values: impl Iterator<Item = f64>) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    fn stderr(&self, i: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2[i] / (n - 1.0) / n).sqrt()
    }
}

const CHUNK: usize = 2048;

fn accumulate<P, S>(
    problem: &P,
    x: &[f64],
    count: usize,
    scenario: S,
    exec: Execution,
) -> Result<ExpectationEstimate>
where
    P: StochasticProblem,
    S: Fn(usize) -> P::Scenario + Sync + Send,
{
    let p = problem.num_constraints();
    let chunks = count.div_ceil(CHUNK);
    let partials = exec.map_indexed(chunks, |c| -> Result<Moments> {
        let mut acc = Moments::new(p + 1);
        for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
            let s = scenario(i);
            let f = problem.objective(x, &s);
            let g = problem.constraints(x, &s);
            if !f.is_finite() {
                return Err(Error::Evaluation {
                    scenario: i,
                    what: format!("objective = {f}"),
                });
            }
            if let Some(j) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::Evaluation {
                    scenario: i,
                    what: format!("constraint {} = {}", j + 1, g[j]),
                });
            }
            acc.push(std::iter::once(f).chain(g));
        }
        Ok(acc)
    });
    let mut total = Moments::new(p + 1);
    for part in partials {
        total.merge(&part?);
    }
    Ok(ExpectationEstimate {
        samples: count,
        objective: total.mean[0],
        objective_stderr: total.stderr(0),
        constraints: total.mean[1..].to_vec(),
        constraint_stderr: (1..=p).map(|i| total.stderr(i)).collect(),
    })
}

fn check_point<P: StochasticProblem>(problem: &P, x: &[f64]) -> Result<()> {
    if x.len() != problem.dim() {
        return Err(Error::contract(format!(
            "point has dimension {}, problem has {}",
            x.len(),
            problem.dim()
        )));
    }
    if !problem.feasible_set().contains(x, FEASIBILITY_TOL) {
        return Err(Error::contract(
            "validation point lies outside the feasible set",
        ));
    }
    Ok(())
}

/// Monte-Carlo estimate of `f(x)` and `g(x)` from `samples` i.i.d. scenarios.
/// Scenario `i` is drawn from its own validation stream under `seed`, so the
/// result is independent of the execution mode.
pub fn estimate_expectations<P: StochasticProblem>(
    problem: &P,
    x: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ExpectationEstimate> {
    estimate_expectations_with(problem, x, samples, seed, Execution::default())
}

pub fn estimate_expectations_with<P: StochasticProblem>(
    problem: &P,
    x: &[f64],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<ExpectationEstimate> {
    if samples == 0 {
        return Err(Error::input("at least one validation sample is required"));
    }
    check_point(problem, x)?;
    accumulate(
        problem,
        x,
        samples,
        |i| validation_scenario(problem, seed, i),
        exec,
    )
}

/// Exact `f(x)`, `g(x)` for finite-sum problems via [`StochasticProblem::full_pass`].
/// Returns `Ok(None)` when the problem has no finite population.
pub fn full_pass_expectations<P: StochasticProblem>(
    problem: &P,
    x: &[f64],
) -> Result<Option<ExpectationEstimate>> {
    let Some(population) = problem.full_pass() else {
        return Ok(None);
    };
    check_point(problem, x)?;
    let n = population.len();
    accumulate(
        problem,
        x,
        n,
        |i| population[i].clone(),
        Execution::default(),
    )
    .map(Some)
}
