//! Empirical Neyman-Pearson classification with logistic loss.
//!
//! `min (1/N₀) Σ ℓ(xᵀa⁰_i)` subject to `(1/N₁) Σ ℓ(−xᵀa¹_i) − τ ≤ 0`, with
//! `ℓ(y) = log(1 + e^{−y})`. A scenario is one mini-batch from each class.

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::problem::StochasticProblem;
use crate::rng::{SeededStream, StreamId};
use crate::vecops::{axpy, dot};

/// Overflow-safe `log(1 + e^{−y})`.
pub fn logistic_loss(y: f64) -> f64 {
    if y >= 0.0 {
        (-y).exp().ln_1p()
    } else {
        -y + y.exp().ln_1p()
    }
}

/// `ℓ′(y) = −1/(1 + e^{y})`.
pub fn logistic_loss_derivative(y: f64) -> f64 {
    if y >= 0.0 {
        let e = (-y).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + y.exp())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NpClassificationData {
    pub positive: Vec<Vec<f64>>,
    pub negative: Vec<Vec<f64>>,
    /// Type-I error level τ.
    pub tau: f64,
    pub positive_batch: usize,
    pub negative_batch: usize,
}

/// Default mini-batch fraction of each class.
pub const DEFAULT_BATCH_FRACTION: f64 = 0.01;

impl NpClassificationData {
    /// Data with `τ = 1` and 1% batches.
    pub fn new(positive: Vec<Vec<f64>>, negative: Vec<Vec<f64>>) -> Result<Self> {
        let mut d = NpClassificationData {
            positive,
            negative,
            tau: 1.0,
            positive_batch: 1,
            negative_batch: 1,
        };
        d.set_batch_fraction(DEFAULT_BATCH_FRACTION)?;
        d.validate()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.positive
            .first()
            .or(self.negative.first())
            .map_or(0, Vec::len)
    }

    /// Batch of `max(1, round(fraction · N))` per class.
    pub fn set_batch_fraction(&mut self, fraction: f64) -> Result<()> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::input(format!(
                "batch fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let size = |n: usize| ((fraction * n as f64).round() as usize).clamp(1, n.max(1));
        self.positive_batch = size(self.positive.len());
        self.negative_batch = size(self.negative.len());
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(Error::input("both classes need at least one example"));
        }
        let n = self.dim();
        if n == 0 {
            return Err(Error::input("feature dimension must be positive"));
        }
        if self
            .positive
            .iter()
            .chain(&self.negative)
            .any(|a| a.len() != n)
        {
            return Err(Error::input("feature vectors differ in length"));
        }
        if self
            .positive
            .iter()
            .chain(&self.negative)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::input("features must be finite"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::input("τ must be positive"));
        }
        if self.positive_batch == 0
            || self.positive_batch > self.positive.len()
            || self.negative_batch == 0
            || self.negative_batch > self.negative.len()
        {
            return Err(Error::input(
                "batch sizes must lie between 1 and the class size",
            ));
        }
        Ok(())
    }

    /// Iterations per epoch: one full pass over the larger class.
    pub fn iterations_per_epoch(&self) -> f64 {
        let (n, b) = if self.positive.len() >= self.negative.len() {
            (self.positive.len(), self.positive_batch)
        } else {
            (self.negative.len(), self.negative_batch)
        };
        n as f64 / b as f64
    }
}

/// Two unit-covariance Gaussians with means `±separation · e₁`.
pub fn synthetic_gaussians(
    n: usize,
    n_pos: usize,
    n_neg: usize,
    separation: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let draw = |count: usize, shift: f64, stream: u64| {
        let mut s = SeededStream::new(seed, StreamId::data(stream));
        (0..count)
            .map(|_| {
                let mut a: Vec<f64> = (0..n).map(|_| s.normal()).collect();
                if n > 0 {
                    a[0] += shift;
                }
                a
            })
            .collect::<Vec<_>>()
    };
    (draw(n_pos, separation, 1), draw(n_neg, -separation, 2))
}

/// Index batches drawn without replacement from each class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpBatch {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct NpProblem {
    data: NpClassificationData,
    set: FeasibleSet,
}

/// Wraps validated data as a problem over the ball of `radius` around 0.
pub fn np_oracle(data: NpClassificationData, radius: f64) -> Result<NpProblem> {
    data.validate()?;
    let set = FeasibleSet::centered_ball(data.dim(), radius)?;
    Ok(NpProblem { data, set })
}

impl NpProblem {
    pub fn data(&self) -> &NpClassificationData {
        &self.data
    }

    fn batch_mean(&self, rows: &[usize], class: &[Vec<f64>], x: &[f64], sign: f64) -> f64 {
        rows.iter()
            .map(|&i| logistic_loss(sign * dot(x, &class[i])))
            .sum::<f64>()
            / rows.len() as f64
    }

    fn batch_grad(&self, rows: &[usize], class: &[Vec<f64>], x: &[f64], sign: f64) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        let w = 1.0 / rows.len() as f64;
        for &i in rows {
            let a = &class[i];
            axpy(
                w * sign * logistic_loss_derivative(sign * dot(x, a)),
                a,
                &mut g,
            );
        }
        g
    }
}

impl StochasticProblem for NpProblem {
    type Scenario = NpBatch;

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn sample(&self, stream: &mut SeededStream) -> NpBatch {
        let d = &self.data;
        let positive = stream.sample_without_replacement(d.positive.len(), d.positive_batch);
        let negative = stream.sample_without_replacement(d.negative.len(), d.negative_batch);
        NpBatch { positive, negative }
    }

    fn objective(&self, x: &[f64], s: &NpBatch) -> f64 {
        self.batch_mean(&s.positive, &self.data.positive, x, 1.0)
    }

    fn constraints(&self, x: &[f64], s: &NpBatch) -> Vec<f64> {
        vec![self.batch_mean(&s.negative, &self.data.negative, x, -1.0) - self.data.tau]
    }

    fn objective_subgradient(&self, x: &[f64], s: &NpBatch) -> Vec<f64> {
        self.batch_grad(&s.positive, &self.data.positive, x, 1.0)
    }

    fn constraint_subgradients(&self, x: &[f64], s: &NpBatch) -> Vec<Vec<f64>> {
        vec![self.batch_grad(&s.negative, &self.data.negative, x, -1.0)]
    }

    /// Paired singletons when the classes have equal size (each datum once),
    /// otherwise a single full-batch scenario.
    fn full_pass(&self) -> Option<Vec<NpBatch>> {
        let (n0, n1) = (self.data.positive.len(), self.data.negative.len());
        Some(if n0 == n1 {
            (0..n0)
                .map(|i| NpBatch {
                    positive: vec![i],
                    negative: vec![i],
                })
                .collect()
        } else {
            vec![NpBatch {
                positive: (0..n0).collect(),
                negative: (0..n1).collect(),
            }]
        })
    }
}
