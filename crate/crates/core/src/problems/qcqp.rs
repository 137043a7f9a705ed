//! Stochastic QCQP with a known optimum.
//!
//! Each scenario draws, for `i = 0..=p` in that order, a symmetric
//! perturbation `Δ_i` (upper triangle row by row, entries uniform on
//! `[−0.1, 0.1]`, mirrored), `b^{(i)}` uniform on `[−1, 1]ⁿ` and
//! `h^{(i)}` uniform on `[0, 2i]`; then `A^{(i)} = I + Δ_i` and
//! `c^{(i)} = −(½ x̂ᵀA^{(i)}x̂ + b^{(i)ᵀ}x̂ + h^{(i)})`.
//!
//! With `E[A] = I` and `E[b] = 0` the expectations are available in closed
//! form: `f(x) = ½‖x‖² + ½‖x̂‖²` and `g_i(x) = ½‖x‖² − ½‖x̂‖² − i`, so the
//! optimum over the ball is `x = 0` with value `½‖x̂‖²` and `g_i(x̂) = −i`.

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::problem::StochasticProblem;
use crate::rng::{SeededStream, StreamId};
use crate::vecops::dot;

/// Entry bound of the symmetric perturbations `Δ_i`.
pub const DELTA_BOUND: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct QcqpInstance {
    n: usize,
    p: usize,
    radius: f64,
    anchor: Vec<f64>,
    set: FeasibleSet,
}

/// One sampled quadratic `½xᵀAx + bᵀx + c` (`a` row-major `n × n`).
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSample {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl QuadraticSample {
    fn quad(&self, x: &[f64]) -> f64 {
        0.5 * quad_form(&self.a, x) + dot(&self.b, x)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|r| dot(&self.a[r * n..(r + 1) * n], x) + self.b[r])
            .collect()
    }
}

fn quad_form(a: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    (0..n).map(|r| x[r] * dot(&a[r * n..(r + 1) * n], x)).sum()
}

/// Terms `0..=p`; term 0 is the objective.
#[derive(Clone, Debug, PartialEq)]
pub struct QcqpScenario {
    pub terms: Vec<QuadraticSample>,
}

impl QcqpInstance {
    /// Anchor `x̂` with entries uniform on `(−R/√n, R/√n)` drawn from `seed`.
    pub fn generate(n: usize, p: usize, radius: f64, seed: u64) -> Result<Self> {
        let mut s = SeededStream::new(seed, StreamId::data(0));
        let half = radius / (n.max(1) as f64).sqrt();
        let anchor = (0..n).map(|_| s.uniform(-half, half)).collect();
        Self::with_anchor(p, radius, anchor)
    }

    pub fn with_anchor(p: usize, radius: f64, anchor: Vec<f64>) -> Result<Self> {
        let n = anchor.len();
        if n == 0 || p == 0 {
            return Err(Error::input("QCQP needs n ≥ 1 and p ≥ 1"));
        }
        let set = FeasibleSet::centered_ball(n, radius)?;
        Ok(QcqpInstance {
            n,
            p,
            radius,
            anchor,
            set,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The anchor `x̂`.
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// `½‖x̂‖²`, attained at `x = 0`.
    pub fn optimal_value(&self) -> f64 {
        0.5 * dot(&self.anchor, &self.anchor)
    }

    pub fn expected_objective(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, x) + self.optimal_value()
    }

    pub fn expected_constraints(&self, x: &[f64]) -> Vec<f64> {
        let base = 0.5 * dot(x, x) - self.optimal_value();
        (1..=self.p).map(|i| base - i as f64).collect()
    }

    /// `(√(R/n), …, √(R/n))`, the start used for this family.
    pub fn spread_start(&self) -> Vec<f64> {
        vec![(self.radius / self.n as f64).sqrt(); self.n]
    }

    fn sample_term(&self, i: usize, s: &mut SeededStream) -> QuadraticSample {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in r..n {
                let d = s.uniform(-DELTA_BOUND, DELTA_BOUND);
                a[r * n + c] = d;
                a[c * n + r] = d;
            }
            a[r * n + r] += 1.0;
        }
        let b: Vec<f64> = (0..n).map(|_| s.uniform(-1.0, 1.0)).collect();
        let h = s.uniform(0.0, 2.0 * i as f64);
        let c = -(0.5 * quad_form(&a, &self.anchor) + dot(&b, &self.anchor) + h);
        QuadraticSample { a, b, c }
    }
}

impl StochasticProblem for QcqpInstance {
    type Scenario = QcqpScenario;

    fn dim(&self) -> usize {
        self.n
    }

    fn num_constraints(&self) -> usize {
        self.p
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn sample(&self, stream: &mut SeededStream) -> QcqpScenario {
        QcqpScenario {
            terms: (0..=self.p).map(|i| self.sample_term(i, stream)).collect(),
        }
    }

    fn objective(&self, x: &[f64], s: &QcqpScenario) -> f64 {
        s.terms[0].quad(x) - s.terms[0].c
    }

    fn constraints(&self, x: &[f64], s: &QcqpScenario) -> Vec<f64> {
        s.terms[1..].iter().map(|t| t.quad(x) + t.c).collect()
    }

    fn objective_subgradient(&self, x: &[f64], s: &QcqpScenario) -> Vec<f64> {
        s.terms[0].grad(x)
    }

    fn constraint_subgradients(&self, x: &[f64], s: &QcqpScenario) -> Vec<Vec<f64>> {
        s.terms[1..].iter().map(|t| t.grad(x)).collect()
    }

    fn initial_point(&self) -> Vec<f64> {
        self.spread_start()
    }
}
