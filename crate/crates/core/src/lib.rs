//! Stochastic linearized proximal method of multipliers (SLPMM) for convex
//! programs with expectation constraints,
//!
//! ```text
//! min_{x ∈ C} E[F(x, ξ)]   s.t.   E[G_i(x, ξ)] ≤ 0,  i = 1..p,
//! ```
//!
//! together with the benchmark problem families used to exercise it
//! (Neyman-Pearson classification, a stochastic QCQP with known optimum and
//! SSD-constrained portfolio selection).
//!
//! Each iteration draws one scenario, linearizes objective and constraints
//! at the current iterate, minimizes the resulting augmented Lagrangian plus
//! a proximal term over `C` (by accelerated projected gradient, or in closed
//! form for a single constraint), and takes a projected multiplier step.

// Negated float comparisons are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod feasible;
pub mod problem;
pub mod problems;
pub mod projections;
pub mod rng;
pub mod solver;
pub mod subproblem;
pub mod vecops;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use feasible::{FeasibleSet, FEASIBILITY_TOL};
pub use problem::{
    estimate_expectations, estimate_expectations_with, full_pass_expectations, Evaluation,
    ExpectationEstimate, StochasticProblem,
};
pub use rng::{SeededStream, StreamId};
pub use solver::{
    averaged_iterate, run_replications, sample_constraint_subset, slpmm_run, update_multipliers,
    DiagnosticEstimates, IterateState, ParameterPolicy, RunTrace, Slpmm, SolverConfig, SolverError,
    StepRecord,
};
pub use subproblem::{
    apg_solve, build_subproblem, closed_form_p1, phi_grad, phi_value, ApgOptions, SubproblemData,
    SubproblemMethod,
};
