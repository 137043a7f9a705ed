//! Portfolio selection under second-order stochastic dominance.
//!
//! For a benchmark with finite support `{y_1..y_p}` the dominance condition
//! reduces to `g_i(x) = E[y_i − ξᵀx]₊ − E[y_i − Y]₊ ≤ 0`; the objective is
//! the negated mean return `E[−ξᵀx]` over the capped simplex.

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::problem::StochasticProblem;
use crate::rng::{SeededStream, StreamId};
use crate::vecops::dot;

#[derive(Clone, Debug, PartialEq)]
pub struct SsdPortfolioData {
    /// Scenario returns, `M` rows of `n` asset returns.
    pub returns: Vec<Vec<f64>>,
    /// Benchmark return `Y_j` per scenario.
    pub benchmark: Vec<f64>,
    /// Benchmark support points `y_i`.
    pub support: Vec<f64>,
    /// `r_i = mean_j [y_i − Y_j]₊`.
    pub reference: Vec<f64>,
    /// Position caps `x̄`.
    pub upper: Vec<f64>,
    /// Scenarios per stochastic draw.
    pub batch: usize,
}

/// `mean_j [y − Y_j]₊` for every support point.
pub fn reference_values(benchmark: &[f64], support: &[f64]) -> Vec<f64> {
    let m = benchmark.len() as f64;
    support
        .iter()
        .map(|&y| benchmark.iter().map(|&b| (y - b).max(0.0)).sum::<f64>() / m)
        .collect()
}

impl SsdPortfolioData {
    /// Data with support = distinct benchmark values, caps `x̄ = 1`, batch 1.
    pub fn new(returns: Vec<Vec<f64>>, benchmark: Vec<f64>) -> Result<Self> {
        let mut support = benchmark.clone();
        support.sort_unstable_by(f64::total_cmp);
        support.dedup();
        let n = returns.first().map_or(0, Vec::len);
        let reference = reference_values(&benchmark, &support);
        let data = SsdPortfolioData {
            returns,
            benchmark,
            support,
            reference,
            upper: vec![1.0; n],
            batch: 1,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn num_assets(&self) -> usize {
        self.upper.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.returns.len()
    }

    /// Replaces the support grid and recomputes `r`.
    pub fn with_support(mut self, support: Vec<f64>) -> Result<Self> {
        self.reference = reference_values(&self.benchmark, &support);
        self.support = support;
        self.validate()?;
        Ok(self)
    }

    /// `points` benchmark order statistics at the mid-quantiles
    /// `(j + ½)/points`, deduplicated.
    pub fn with_quantile_support(self, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::input("support grid needs at least one point"));
        }
        let mut sorted = self.benchmark.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let m = sorted.len();
        let mut grid: Vec<f64> = (0..points)
            .map(|j| sorted[(((j as f64 + 0.5) * m as f64 / points as f64) as usize).min(m - 1)])
            .collect();
        grid.dedup();
        self.with_support(grid)
    }

    pub fn with_upper(mut self, upper: Vec<f64>) -> Result<Self> {
        self.upper = upper;
        self.validate()?;
        Ok(self)
    }

    pub fn with_batch(mut self, batch: usize) -> Result<Self> {
        self.batch = batch;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.upper.len();
        if self.returns.is_empty() || n == 0 {
            return Err(Error::input("need at least one scenario and one asset"));
        }
        if self.returns.iter().any(|r| r.len() != n) {
            return Err(Error::input("scenario rows differ from the asset count"));
        }
        if self.benchmark.len() != self.returns.len() {
            return Err(Error::input(
                "benchmark length differs from the scenario count",
            ));
        }
        if self
            .returns
            .iter()
            .flatten()
            .chain(&self.benchmark)
            .chain(&self.support)
            .any(|v| !v.is_finite())
        {
            return Err(Error::input("returns and support must be finite"));
        }
        if self.support.is_empty() || self.reference.len() != self.support.len() {
            return Err(Error::input("benchmark support must be non-empty"));
        }
        if self.reference.iter().any(|&r| r < 0.0) {
            return Err(Error::input("reference values must be nonnegative"));
        }
        if self.upper.iter().any(|&u| !(u >= 0.0)) || self.upper.iter().sum::<f64>() < 1.0 {
            return Err(Error::input(
                "caps must be nonnegative and sum to at least 1",
            ));
        }
        if self.batch == 0 {
            return Err(Error::input("batch size must be positive"));
        }
        Ok(())
    }

    /// Mean benchmark return.
    pub fn benchmark_mean(&self) -> f64 {
        self.benchmark.iter().sum::<f64>() / self.benchmark.len() as f64
    }
}

/// Factor-model scenarios and the equal-weight benchmark they induce.
///
/// Asset `k` returns `μ_k + β_k f + ε_k` with market factor `f ~ N(0, 0.02²)`,
/// `μ_k ~ U[−0.002, 0.006]`, `β_k ~ U[0.5, 1.5]` and idiosyncratic noise with
/// standard deviation `U[0.01, 0.04]`.
pub fn synthetic_scenarios(n: usize, m: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut s = SeededStream::new(seed, StreamId::data(10));
    let mu: Vec<f64> = (0..n).map(|_| s.uniform(-0.002, 0.006)).collect();
    let beta: Vec<f64> = (0..n).map(|_| s.uniform(0.5, 1.5)).collect();
    let vol: Vec<f64> = (0..n).map(|_| s.uniform(0.01, 0.04)).collect();
    let mut returns = Vec::with_capacity(m);
    let mut benchmark = Vec::with_capacity(m);
    for _ in 0..m {
        let f = 0.02 * s.normal();
        let row: Vec<f64> = (0..n)
            .map(|k| mu[k] + beta[k] * f + vol[k] * s.normal())
            .collect();
        benchmark.push(row.iter().sum::<f64>() / n as f64);
        returns.push(row);
    }
    (returns, benchmark)
}

#[derive(Clone, Debug)]
pub struct SsdProblem {
    data: SsdPortfolioData,
    set: FeasibleSet,
}

pub fn ssd_oracle(data: SsdPortfolioData) -> Result<SsdProblem> {
    data.validate()?;
    let set = FeasibleSet::capped_simplex(data.upper.clone())?;
    Ok(SsdProblem { data, set })
}

impl SsdProblem {
    pub fn data(&self) -> &SsdPortfolioData {
        &self.data
    }
}

impl StochasticProblem for SsdProblem {
    /// Scenario row indices (drawn with replacement).
    type Scenario = Vec<usize>;

    fn dim(&self) -> usize {
        self.data.num_assets()
    }

    fn num_constraints(&self) -> usize {
        self.data.support.len()
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn sample(&self, stream: &mut SeededStream) -> Vec<usize> {
        (0..self.data.batch)
            .map(|_| stream.index(self.data.num_scenarios()))
            .collect()
    }

    fn objective(&self, x: &[f64], rows: &Vec<usize>) -> f64 {
        -rows
            .iter()
            .map(|&j| dot(&self.data.returns[j], x))
            .sum::<f64>()
            / rows.len() as f64
    }

    fn constraints(&self, x: &[f64], rows: &Vec<usize>) -> Vec<f64> {
        let w = 1.0 / rows.len() as f64;
        let port: Vec<f64> = rows
            .iter()
            .map(|&j| dot(&self.data.returns[j], x))
            .collect();
        self.data
            .support
            .iter()
            .zip(&self.data.reference)
            .map(|(&y, &r)| w * port.iter().map(|&z| (y - z).max(0.0)).sum::<f64>() - r)
            .collect()
    }

    fn objective_subgradient(&self, x: &[f64], rows: &Vec<usize>) -> Vec<f64> {
        let w = 1.0 / rows.len() as f64;
        let mut g = vec![0.0; x.len()];
        for &j in rows {
            crate::vecops::axpy(-w, &self.data.returns[j], &mut g);
        }
        g
    }

    /// `−ξ_j` where the hinge is strictly active, `0` otherwise.
    fn constraint_subgradients(&self, x: &[f64], rows: &Vec<usize>) -> Vec<Vec<f64>> {
        let w = 1.0 / rows.len() as f64;
        let port: Vec<f64> = rows
            .iter()
            .map(|&j| dot(&self.data.returns[j], x))
            .collect();
        self.data
            .support
            .iter()
            .map(|&y| {
                let mut g = vec![0.0; x.len()];
                for (&j, &z) in rows.iter().zip(&port) {
                    if y - z > 0.0 {
                        crate::vecops::axpy(-w, &self.data.returns[j], &mut g);
                    }
                }
                g
            })
            .collect()
    }

    fn full_pass(&self) -> Option<Vec<Vec<usize>>> {
        Some((0..self.data.num_scenarios()).map(|j| vec![j]).collect())
    }
}
