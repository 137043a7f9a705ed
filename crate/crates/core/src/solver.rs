//! The SLPMM outer loop: sample, linearize, solve the proximal subproblem,
//! update multipliers, and monitor the step / multiplier-drift bounds.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::exec::Execution;
use crate::feasible::FEASIBILITY_TOL;
use crate::problem::{Evaluation, StochasticProblem};
use crate::rng::{SeededStream, StreamId};
use crate::subproblem::{build_subproblem, solve, ApgOptions, SubproblemError, SubproblemMethod};
use crate::vecops::{compensated_sum, dist, dot, norm};

/// Iterations excluded from the "after warm-up" violation counters.
pub const BOUND_WARMUP: usize = 10;
/// Slack on the step-length bound (APG stops at tolerance, not exactly).
pub const STEP_BOUND_SLACK: f64 = 1e-6;
/// Slack on the multiplier-drift bound.
pub const DRIFT_BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterPolicy {
    /// `α = √K`, `σ = 1/√K`.
    #[default]
    SqrtK,
    /// Use the configured `alpha` and `sigma`.
    Explicit,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Iteration budget `K`.
    pub iterations: usize,
    #[serde(default)]
    pub policy: ParameterPolicy,
    /// Proximal weight, used with [`ParameterPolicy::Explicit`].
    #[serde(default = "one")]
    pub alpha: f64,
    /// Penalty parameter, used with [`ParameterPolicy::Explicit`].
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Constraint-subset size `m`; `None` uses every constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_subset: Option<usize>,
    #[serde(default)]
    pub subproblem: SubproblemMethod,
    #[serde(default)]
    pub apg: ApgOptions,
    /// When false every wall-time field is zero, making traces reproducible
    /// byte-for-byte.
    #[serde(default = "yes")]
    pub record_wall_time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_point: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(iterations: usize) -> Self {
        SolverConfig {
            iterations,
            policy: ParameterPolicy::SqrtK,
            alpha: 1.0,
            sigma: 1.0,
            seed: 0,
            constraint_subset: None,
            subproblem: SubproblemMethod::default(),
            apg: ApgOptions::default(),
            record_wall_time: true,
            initial_point: None,
        }
    }

    pub fn explicit(iterations: usize, alpha: f64, sigma: f64) -> Self {
        SolverConfig {
            policy: ParameterPolicy::Explicit,
            alpha,
            sigma,
            ..Self::new(iterations)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Effective `(α, σ)`.
    pub fn parameters(&self) -> (f64, f64) {
        match self.policy {
            ParameterPolicy::SqrtK => {
                let alpha = (self.iterations as f64).sqrt();
                (alpha, 1.0 / alpha)
            }
            ParameterPolicy::Explicit => (self.alpha, self.sigma),
        }
    }

    pub fn validate(&self, num_constraints: usize) -> Result<(), Error> {
        self.apg.validate()?;
        if self.iterations > 0 {
            let (alpha, sigma) = self.parameters();
            if !(alpha > 0.0 && alpha.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::input(format!(
                    "α and σ must be positive and finite (α={alpha}, σ={sigma})"
                )));
            }
        }
        if let Some(m) = self.constraint_subset {
            if m == 0 || m > num_constraints {
                return Err(Error::input(format!(
                    "constraint subset size {m} must lie in 1..={num_constraints}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterateState {
    pub k: usize,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Running maxima of the sampled quantities that the step and drift bounds
/// are stated in terms of. They only ever grow and never claim the true
/// suprema.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DiagnosticEstimates {
    /// max ‖v₀(x^k, ξ^k)‖
    pub kappa_f: f64,
    /// max_i ‖v_i(x^k, ξ^k)‖
    pub kappa_g: f64,
    /// max ‖G(x^k, ξ^k)‖
    pub nu_g: f64,
    pub diameter: f64,
    pub num_constraints: usize,
}

impl DiagnosticEstimates {
    pub fn new(diameter: f64, num_constraints: usize) -> Self {
        DiagnosticEstimates {
            diameter,
            num_constraints,
            ..Default::default()
        }
    }

    pub fn observe(&mut self, ev: &Evaluation) {
        self.kappa_f = self.kappa_f.max(norm(&ev.objective_grad));
        for row in &ev.constraint_grads {
            self.kappa_g = self.kappa_g.max(norm(row));
        }
        self.nu_g = self.nu_g.max(norm(&ev.constraints));
    }

    /// `ν_g + √p κ_g R`.
    pub fn beta0(&self) -> f64 {
        self.nu_g + (self.num_constraints as f64).sqrt() * self.kappa_g * self.diameter
    }

    /// Step-length bound `(κ_f + √p κ_g‖λ^k‖ + √p ν_g κ_g σ)/α` for a
    /// subproblem with `rows` constraint rows, or `None` unless
    /// `2α − p κ_g² σ > 0`.
    pub fn step_bound(&self, lambda_norm: f64, rows: usize, alpha: f64, sigma: f64) -> Option<f64> {
        let p = rows as f64;
        (2.0 * alpha - p * self.kappa_g * self.kappa_g * sigma > 0.0).then(|| {
            (self.kappa_f
                + p.sqrt() * self.kappa_g * lambda_norm
                + p.sqrt() * self.nu_g * self.kappa_g * sigma)
                / alpha
        })
    }

    /// Multiplier drift bound `σ β₀`.
    pub fn drift_bound(&self, sigma: f64) -> f64 {
        sigma * self.beta0()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
}

impl BoundCheck {
    pub fn excess(&self) -> f64 {
        self.value - self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub objective_sample: f64,
    pub constraint_samples: Vec<f64>,
    /// Constraint indices (0-based) entering this step's subproblem.
    pub subset: Vec<usize>,
    pub x_next: Vec<f64>,
    pub lambda_next: Vec<f64>,
    /// `‖λ^k‖` before the update.
    pub lambda_norm: f64,
    pub step_norm: f64,
    pub multiplier_step_norm: f64,
    pub subproblem_iterations: usize,
    pub subproblem_residual: f64,
    pub closed_form: bool,
    pub wall_time_s: f64,
    pub step_check: Option<BoundCheck>,
    pub drift_check: Option<BoundCheck>,
}

impl StepRecord {
    pub fn max_constraint_sample(&self) -> f64 {
        self.constraint_samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Violation counters for one monitored bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundMonitor {
    pub checked: usize,
    pub violations: usize,
    pub violations_after_warmup: usize,
    /// Violations when every step is re-checked with end-of-run estimates.
    pub violations_final_estimates: usize,
    /// Largest `value − bound` seen (negative when every check had slack).
    pub max_excess: f64,
}

impl BoundMonitor {
    fn record(&mut self, k: usize, check: &BoundCheck, slack: f64) {
        let excess = check.excess();
        if self.checked == 0 || excess > self.max_excess {
            self.max_excess = excess;
        }
        self.checked += 1;
        if excess > slack {
            self.violations += 1;
            if k >= BOUND_WARMUP {
                self.violations_after_warmup += 1;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace {
    pub alpha: f64,
    pub sigma: f64,
    pub initial_point: Vec<f64>,
    pub steps: Vec<StepRecord>,
    /// `x̂^K = (1/K) Σ_{k<K} x^k`; `None` when `K = 0`.
    pub averaged: Option<Vec<f64>>,
    pub final_state: IterateState,
    pub estimates: DiagnosticEstimates,
    pub step_bound: BoundMonitor,
    pub drift_bound: BoundMonitor,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `x^0, …, x^{K−1}`.
    pub fn iterates(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let k = self.steps.len();
        std::iter::once(self.initial_point.as_slice())
            .chain(self.steps.iter().map(|s| s.x_next.as_slice()))
            .take(k)
    }
}

/// Mean of `x^0, …, x^{K−1}` with compensated summation.
pub fn averaged_iterate(trace: &RunTrace) -> Result<Vec<f64>, Error> {
    if trace.is_empty() {
        return Err(Error::contract("averaged iterate of an empty trace"));
    }
    let n = trace.initial_point.len();
    let k = trace.len() as f64;
    Ok((0..n)
        .map(|j| compensated_sum(trace.iterates().map(|x| x[j])) / k)
        .collect())
}

/// `[λ + σ(G + V Δx)]₊`.
pub fn update_multipliers(
    lambda: &[f64],
    sigma: f64,
    g_vals: &[f64],
    v: &[Vec<f64>],
    dx: &[f64],
) -> Result<Vec<f64>, Error> {
    if g_vals.len() != lambda.len() || v.len() != lambda.len() {
        return Err(Error::contract(format!(
            "multiplier update: λ has {} entries, G {}, V {} rows",
            lambda.len(),
            g_vals.len(),
            v.len()
        )));
    }
    if let Some(row) = v.iter().find(|r| r.len() != dx.len()) {
        return Err(Error::contract(format!(
            "multiplier update: V row length {} ≠ Δx length {}",
            row.len(),
            dx.len()
        )));
    }
    Ok(lambda
        .iter()
        .zip(g_vals)
        .zip(v)
        .map(|((l, g), vi)| (l + sigma * (g + dot(vi, dx))).max(0.0))
        .collect())
}

/// `m` distinct indices of `0..p`, sorted; the full range when `m = p`.
pub fn sample_constraint_subset(
    p: usize,
    m: usize,
    stream: &mut SeededStream,
) -> Result<Vec<usize>, Error> {
    if m == 0 || m > p {
        return Err(Error::input(format!("subset size {m} must lie in 1..={p}")));
    }
    if m == p {
        return Ok((0..p).collect());
    }
    let mut idx = stream.sample_without_replacement(p, m);
    idx.sort_unstable();
    Ok(idx)
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("subproblem: {0}")]
    Subproblem(#[from] SubproblemError),
    #[error(transparent)]
    Input(#[from] Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(#[source] Error),
    #[error("iteration {iteration}: {source}")]
    Step {
        iteration: usize,
        #[source]
        source: StepError,
        partial: Box<RunTrace>,
    },
}

/// One configured run of the method on a problem.
pub struct Slpmm<'p, P: StochasticProblem> {
    problem: &'p P,
    config: SolverConfig,
    alpha: f64,
    sigma: f64,
    estimates: DiagnosticEstimates,
}

impl<'p, P: StochasticProblem> Slpmm<'p, P> {
    pub fn new(problem: &'p P, config: SolverConfig) -> Result<Self, Error> {
        config.validate(problem.num_constraints())?;
        let (alpha, sigma) = config.parameters();
        let estimates =
            DiagnosticEstimates::new(problem.feasible_set().diameter(), problem.num_constraints());
        Ok(Slpmm {
            problem,
            config,
            alpha,
            sigma,
            estimates,
        })
    }

    pub fn parameters(&self) -> (f64, f64) {
        (self.alpha, self.sigma)
    }

    pub fn estimates(&self) -> &DiagnosticEstimates {
        &self.estimates
    }

    pub fn initial_state(&self) -> Result<IterateState, Error> {
        let x = match &self.config.initial_point {
            Some(x) => x.clone(),
            None => self.problem.initial_point(),
        };
        if x.len() != self.problem.dim()
            || !self.problem.feasible_set().contains(&x, FEASIBILITY_TOL)
        {
            return Err(Error::input(
                "initial point must be a feasible point of the right dimension",
            ));
        }
        Ok(IterateState {
            k: 0,
            x,
            lambda: vec![0.0; self.problem.num_constraints()],
        })
    }

    /// One iteration from `state`.
    pub fn step(&mut self, state: &IterateState) -> Result<(IterateState, StepRecord), StepError> {
        let clock = self.config.record_wall_time.then(Instant::now);
        let (alpha, sigma) = (self.alpha, self.sigma);
        let problem = self.problem;
        let set = problem.feasible_set();
        let p = problem.num_constraints();
        let k = state.k;

        let mut stream = SeededStream::new(self.config.seed, StreamId::scenario(k as u64));
        let scenario = problem.sample(&mut stream);
        let ev = problem.evaluate(&state.x, &scenario);
        if !ev.is_finite() {
            return Err(Error::Evaluation {
                scenario: k,
                what: "non-finite oracle output".into(),
            }
            .into());
        }
        self.estimates.observe(&ev);

        let subset = match self.config.constraint_subset {
            Some(m) if m < p => {
                let mut s = SeededStream::new(self.config.seed, StreamId::subset(k as u64));
                sample_constraint_subset(p, m, &mut s)?
            }
            _ => (0..p).collect(),
        };

        let data = build_subproblem(&state.x, &state.lambda, &ev, sigma, alpha, &subset, set)?;
        let sol = solve(&data, self.config.subproblem, &self.config.apg)?;
        if !set.contains(&sol.point, FEASIBILITY_TOL) {
            return Err(StepError::Invariant(format!(
                "x^{} lies {:e} outside the feasible set",
                k + 1,
                set.distance(&sol.point)
            )));
        }

        let dx: Vec<f64> = sol.point.iter().zip(&state.x).map(|(a, b)| a - b).collect();
        let lam_sub: Vec<f64> = subset.iter().map(|&i| state.lambda[i]).collect();
        let g_sub: Vec<f64> = subset.iter().map(|&i| ev.constraints[i]).collect();
        let v_sub: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| ev.constraint_grads[i].clone())
            .collect();
        let updated = update_multipliers(&lam_sub, sigma, &g_sub, &v_sub, &dx)?;
        let mut lambda_next = state.lambda.clone();
        for (&i, l) in subset.iter().zip(updated) {
            lambda_next[i] = l;
        }
        if lambda_next.iter().any(|&l| !(l >= 0.0)) {
            return Err(StepError::Invariant(format!(
                "λ^{} has a negative entry",
                k + 1
            )));
        }

        let lambda_norm = norm(&state.lambda);
        let step_norm = norm(&dx);
        let multiplier_step_norm = dist(&lambda_next, &state.lambda);
        let step_check = self
            .estimates
            .step_bound(lambda_norm, subset.len(), alpha, sigma)
            .map(|bound| BoundCheck {
                value: step_norm,
                bound,
            });
        let drift_check = (subset.len() == p).then(|| BoundCheck {
            value: multiplier_step_norm,
            bound: self.estimates.drift_bound(sigma),
        });

        let record = StepRecord {
            k,
            objective_sample: ev.objective,
            constraint_samples: ev.constraints,
            subset,
            x_next: sol.point.clone(),
            lambda_next: lambda_next.clone(),
            lambda_norm,
            step_norm,
            multiplier_step_norm,
            subproblem_iterations: sol.iterations,
            subproblem_residual: sol.residual,
            closed_form: sol.closed_form,
            wall_time_s: clock.map_or(0.0, |c| c.elapsed().as_secs_f64()),
            step_check,
            drift_check,
        };
        let next = IterateState {
            k: k + 1,
            x: sol.point,
            lambda: lambda_next,
        };
        Ok((next, record))
    }

    /// Runs `K` iterations.
    pub fn run(mut self) -> Result<RunTrace, SolverError> {
        let state = self.initial_state().map_err(SolverError::Config)?;
        let initial_point = state.x.clone();
        let mut state = state;
        let mut steps = Vec::with_capacity(self.config.iterations);
        for k in 0..self.config.iterations {
            match self.step(&state) {
                Ok((next, record)) => {
                    steps.push(record);
                    state = next;
                }
                Err(source) => {
                    let partial = Box::new(self.finish(initial_point, steps, state));
                    return Err(SolverError::Step {
                        iteration: k,
                        source,
                        partial,
                    });
                }
            }
        }
        Ok(self.finish(initial_point, steps, state))
    }

    fn finish(
        &self,
        initial_point: Vec<f64>,
        steps: Vec<StepRecord>,
        final_state: IterateState,
    ) -> RunTrace {
        let mut step_bound = BoundMonitor::default();
        let mut drift_bound = BoundMonitor::default();
        let est = &self.estimates;
        for s in &steps {
            if let Some(c) = &s.step_check {
                step_bound.record(s.k, c, STEP_BOUND_SLACK);
            }
            if let Some(c) = &s.drift_check {
                drift_bound.record(s.k, c, DRIFT_BOUND_SLACK);
            }
            if let Some(b) = est.step_bound(s.lambda_norm, s.subset.len(), self.alpha, self.sigma) {
                if s.step_norm > b + STEP_BOUND_SLACK {
                    step_bound.violations_final_estimates += 1;
                }
            }
            if s.drift_check.is_some()
                && s.multiplier_step_norm > est.drift_bound(self.sigma) + DRIFT_BOUND_SLACK
            {
                drift_bound.violations_final_estimates += 1;
            }
        }
        let mut trace = RunTrace {
            alpha: self.alpha,
            sigma: self.sigma,
            initial_point,
            steps,
            averaged: None,
            final_state,
            estimates: self.estimates.clone(),
            step_bound,
            drift_bound,
        };
        trace.averaged = averaged_iterate(&trace).ok();
        trace
    }
}

/// Runs the method once with `config`.
pub fn slpmm_run<P: StochasticProblem>(
    problem: &P,
    config: &SolverConfig,
) -> Result<RunTrace, SolverError> {
    Slpmm::new(problem, config.clone())
        .map_err(SolverError::Config)?
        .run()
}

/// Independent replications, one per seed, in seed order.
pub fn run_replications<P: StochasticProblem>(
    problem: &P,
    config: &SolverConfig,
    seeds: &[u64],
    exec: Execution,
) -> Vec<Result<RunTrace, SolverError>> {
    exec.map_slice(seeds, |&seed| {
        slpmm_run(problem, &config.clone().with_seed(seed))
    })
}
