//! Feasible-set descriptors.

use crate::error::{Error, Result};
use crate::projections::{
    ball_active, capped_simplex_unchecked, check_box, check_caps, clamp_box, project_ball,
    project_simplex, ActiveConstraints, ProjectionResult,
};
use crate::vecops::{dist, norm};

/// Membership tolerance used by solver invariants.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Compact convex set `C` with an exact projection.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// Unit simplex `{x ≥ 0, Σx = 1}` in `dim` coordinates.
    Simplex {
        dim: usize,
    },
    /// `{0 ≤ x ≤ upper, Σx = 1}`.
    CappedSimplex {
        upper: Vec<f64>,
    },
}

impl FeasibleSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    /// Ball of the given radius around the origin.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn bounded_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_box(&lower, &upper)?;
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::input("box bounds must be finite"));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("simplex dimension must be positive"));
        }
        Ok(FeasibleSet::Simplex { dim })
    }

    pub fn capped_simplex(upper: Vec<f64>) -> Result<Self> {
        check_caps(upper.len(), &upper)?;
        Ok(FeasibleSet::CappedSimplex { upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Simplex { dim } => *dim,
            FeasibleSet::CappedSimplex { upper } => upper.len(),
        }
    }

    /// Upper bound `R` on `‖x′ − x″‖` over the set.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Box { lower, upper } => dist(lower, upper),
            FeasibleSet::Simplex { .. } | FeasibleSet::CappedSimplex { .. } => {
                std::f64::consts::SQRT_2
            }
        }
    }

    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.dim());
        match self {
            FeasibleSet::Ball { center, radius } => project_ball(y, center, *radius),
            FeasibleSet::Box { lower, upper } => clamp_box(y, lower, upper),
            FeasibleSet::Simplex { .. } => project_simplex(y),
            FeasibleSet::CappedSimplex { upper } => capped_simplex_unchecked(y, upper),
        }
    }

    pub fn project_with_active(&self, y: &[f64]) -> ProjectionResult {
        let point = self.project(y);
        let active = match self {
            FeasibleSet::Ball { center, radius } => ball_active(&point, center, *radius),
            FeasibleSet::Box { lower, upper } => ActiveConstraints::Box {
                at_lower: (0..point.len()).filter(|&i| point[i] == lower[i]).collect(),
                at_upper: (0..point.len()).filter(|&i| point[i] == upper[i]).collect(),
            },
            FeasibleSet::Simplex { .. } => ActiveConstraints::Simplex {
                at_zero: (0..point.len()).filter(|&i| point[i] == 0.0).collect(),
            },
            FeasibleSet::CappedSimplex { upper } => ActiveConstraints::CappedSimplex {
                at_zero: (0..point.len()).filter(|&i| point[i] == 0.0).collect(),
                at_cap: (0..point.len()).filter(|&i| point[i] == upper[i]).collect(),
            },
        };
        ProjectionResult { point, active }
    }

    /// `‖x − Π(x)‖`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.project(x))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && x.iter().all(|v| v.is_finite()) && self.distance(x) <= tol
    }

    /// Strict interior test with the given margin. Sets with empty interior
    /// (the simplex variants) never contain interior points.
    pub fn is_interior(&self, x: &[f64], margin: f64) -> bool {
        match self {
            FeasibleSet::Ball { center, radius } => dist(x, center) < radius - margin,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&v, (&l, &u))| v > l + margin && v < u - margin),
            FeasibleSet::Simplex { .. } | FeasibleSet::CappedSimplex { .. } => false,
        }
    }

    /// Origin when feasible, otherwise its projection.
    pub fn default_start(&self) -> Vec<f64> {
        let zero = vec![0.0; self.dim()];
        if self.contains(&zero, FEASIBILITY_TOL) {
            zero
        } else {
            self.project(&zero)
        }
    }

    /// A point strictly inside (or in the relative interior of) the set.
    pub fn center_point(&self) -> Vec<f64> {
        match self {
            FeasibleSet::Ball { center, .. } => center.clone(),
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            FeasibleSet::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
            FeasibleSet::CappedSimplex { upper } => {
                let n = upper.len();
                capped_simplex_unchecked(&vec![1.0 / n as f64; n], upper)
            }
        }
    }

    /// Uniform-ish random feasible point, for tests and invariant suites.
    pub fn random_point(&self, rng: &mut crate::rng::SeededStream) -> Vec<f64> {
        match self {
            FeasibleSet::Ball { center, radius } => {
                let dir: Vec<f64> = (0..center.len()).map(|_| rng.normal()).collect();
                let nd = norm(&dir).max(f64::MIN_POSITIVE);
                let r = radius * rng.unit().powf(1.0 / center.len().max(1) as f64);
                center
                    .iter()
                    .zip(&dir)
                    .map(|(c, d)| c + r * d / nd)
                    .collect()
            }
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| rng.uniform(l, u))
                .collect(),
            FeasibleSet::Simplex { dim } => dirichlet_one(*dim, rng),
            FeasibleSet::CappedSimplex { upper } => {
                let w = dirichlet_one(upper.len(), rng);
                capped_simplex_unchecked(&w, upper)
            }
        }
    }
}

fn dirichlet_one(n: usize, rng: &mut crate::rng::SeededStream) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.unit()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
