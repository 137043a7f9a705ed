//! Per-iteration proximal augmented-Lagrangian subproblem.
//!
//! After scaling by `1/α` and dropping constants, the subproblem
//! `min_{x∈C} L_σ(x, λ) + (α/2)‖x − x^k‖²` becomes
//!
//! ```text
//! φ(x) = ½ Σ_i [a_iᵀx + b_i]₊² + ½‖x‖² + cᵀx
//! a_i = √(σ/α) v_i
//! b_i = λ_i / √(σα) + √(σ/α) G_i − √(σ/α) ⟨v_i, x^k⟩
//! c   = v₀ / α − x^k
//! ```
//!
//! `φ` is 1-strongly convex with gradient `Σ [a_iᵀx + b_i]₊ a_i + x + c`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::problem::Evaluation;
use crate::vecops::{all_finite, axpy, dot};

/// Margin by which the closed-form point must clear the boundary of `C`.
pub const INTERIOR_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SubproblemData<'s> {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub set: &'s FeasibleSet,
    pub alpha: f64,
    pub sigma: f64,
    pub anchor: Vec<f64>,
    /// Constraint indices (0-based) the rows of `a`, `b` came from.
    pub rows: Vec<usize>,
}

impl<'s> SubproblemData<'s> {
    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    /// Instance from raw coefficients, mainly for tests.
    pub fn from_coefficients(
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        set: &'s FeasibleSet,
    ) -> Self {
        let n = c.len();
        let rows = (0..a.len()).collect();
        SubproblemData {
            a,
            b,
            c,
            set,
            alpha: 1.0,
            sigma: 1.0,
            anchor: vec![0.0; n],
            rows,
        }
    }
}

/// Builds `φ` from the sample at `(x^k, ξ^k)`, restricted to `subset`.
pub fn build_subproblem<'s>(
    x_k: &[f64],
    lambda: &[f64],
    sample: &Evaluation,
    sigma: f64,
    alpha: f64,
    subset: &[usize],
    set: &'s FeasibleSet,
) -> Result<SubproblemData<'s>> {
    if !(sigma > 0.0 && alpha > 0.0) {
        return Err(Error::input(format!(
            "σ and α must be positive (σ={sigma}, α={alpha})"
        )));
    }
    let p = sample.constraints.len();
    if lambda.len() != p || sample.constraint_grads.len() != p {
        return Err(Error::contract(
            "multiplier / constraint dimensions disagree",
        ));
    }
    if lambda.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::contract("multipliers must be nonnegative"));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= p) {
        return Err(Error::contract(format!(
            "subset index {i} out of range for p = {p}"
        )));
    }
    if !sample.is_finite() {
        return Err(Error::input(
            "non-finite sample values in subproblem construction",
        ));
    }

    let scale = (sigma / alpha).sqrt();
    let dual_scale = 1.0 / (sigma * alpha).sqrt();
    let mut a = Vec::with_capacity(subset.len());
    let mut b = Vec::with_capacity(subset.len());
    for &i in subset {
        let v = &sample.constraint_grads[i];
        let ai: Vec<f64> = v.iter().map(|vj| scale * vj).collect();
        b.push(lambda[i] * dual_scale + scale * sample.constraints[i] - dot(&ai, x_k));
        a.push(ai);
    }
    let c: Vec<f64> = sample
        .objective_grad
        .iter()
        .zip(x_k)
        .map(|(g, x)| g / alpha - x)
        .collect();
    if !(all_finite(&c) && all_finite(&b)) {
        return Err(Error::input("subproblem coefficients are not finite"));
    }
    Ok(SubproblemData {
        a,
        b,
        c,
        set,
        alpha,
        sigma,
        anchor: x_k.to_vec(),
        rows: subset.to_vec(),
    })
}

pub fn phi_value(d: &SubproblemData<'_>, x: &[f64]) -> f64 {
    let hinge: f64 =
        d.a.iter()
            .zip(&d.b)
            .map(|(ai, bi)| {
                let r = (dot(ai, x) + bi).max(0.0);
                r * r
            })
            .sum();
    0.5 * hinge + 0.5 * dot(x, x) + dot(&d.c, x)
}

/// Gradient; a hinge exactly at its kink contributes nothing.
pub fn phi_grad(d: &SubproblemData<'_>, x: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = x.iter().zip(&d.c).map(|(xi, ci)| xi + ci).collect();
    for (ai, bi) in d.a.iter().zip(&d.b) {
        let r = dot(ai, x) + bi;
        if r > 0.0 {
            axpy(r, ai, &mut g);
        }
    }
    g
}

/// Stationary point of `φ` for a single hinge row, returned only when it lies
/// strictly inside `C` (then it is the unique minimizer over `C`).
pub fn closed_form_p1(d: &SubproblemData<'_>) -> Result<Option<Vec<f64>>> {
    if d.num_rows() != 1 {
        return Err(Error::contract(format!(
            "closed form needs exactly one constraint row, got {}",
            d.num_rows()
        )));
    }
    let (a, b, c) = (&d.a[0], d.b[0], &d.c);
    let x = if b - dot(a, c) <= 0.0 {
        c.iter().map(|v| -v).collect::<Vec<_>>()
    } else {
        // −(b a + c) + a aᵀ(b a + c) / (1 + aᵀa)
        let w: Vec<f64> = a.iter().zip(c).map(|(ai, ci)| b * ai + ci).collect();
        let s = dot(a, &w) / (1.0 + dot(a, a));
        w.iter().zip(a).map(|(wi, ai)| -wi + s * ai).collect()
    };
    Ok(d.set.is_interior(&x, INTERIOR_MARGIN).then_some(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApgOptions {
    /// Stop once `‖y^t − T_L(y^t)‖ ≤ tol`.
    pub tol: f64,
    /// Backtracking growth factor η > 1.
    pub eta: f64,
    pub max_iters: usize,
    /// Reproduce the listing literally: `L_t` never decreases. Otherwise each
    /// step restarts backtracking from `max(L_{t−1}/η, 1)`.
    pub strict: bool,
}

impl Default for ApgOptions {
    fn default() -> Self {
        ApgOptions {
            tol: 1e-6,
            eta: 2.0,
            max_iters: 10_000,
            strict: false,
        }
    }
}

impl ApgOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::input("APG tolerance must be positive"));
        }
        if !(self.eta > 1.0) {
            return Err(Error::input("APG backtracking factor must exceed 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::input("APG iteration cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApgOutcome {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Final smoothness estimate `L_t`.
    pub lipschitz: f64,
}

#[derive(Debug, Error)]
pub enum SubproblemError {
    #[error("APG did not converge in {iterations} iterations (best residual {residual:e})")]
    NotConverged {
        best: Vec<f64>,
        residual: f64,
        iterations: usize,
    },
    #[error("APG backtracking diverged at iteration {iteration}")]
    Backtracking { iteration: usize },
    #[error(transparent)]
    Input(#[from] Error),
}

const L_CEILING: f64 = 1e300;

/// Nesterov's accelerated projected gradient with backtracking on `L_t`,
/// momentum `t/(t+3)`, started at `x_start` (which must lie in `C`).
pub fn apg_solve(
    d: &SubproblemData<'_>,
    x_start: &[f64],
    opts: &ApgOptions,
) -> Result<ApgOutcome, SubproblemError> {
    opts.validate()?;
    if x_start.len() != d.dim() {
        return Err(Error::contract("APG start point has the wrong dimension").into());
    }
    let set = d.set;
    let mut x_prev = x_start.to_vec();
    let mut y = x_start.to_vec();
    let mut lip = 1.0_f64;
    let mut best = (x_start.to_vec(), f64::INFINITY);
    let mut trial = vec![0.0; d.dim()];

    for t in 0..opts.max_iters {
        let grad = phi_grad(d, &y);
        let phi_y = phi_value(d, &y);
        let mut l_try = if opts.strict {
            lip
        } else {
            (lip / opts.eta).max(1.0)
        };
        let (point, step_sq) = loop {
            for ((ti, yi), gi) in trial.iter_mut().zip(&y).zip(&grad) {
                *ti = yi - gi / l_try;
            }
            let point = set.project(&trial);
            let diff: Vec<f64> = point.iter().zip(&y).map(|(p, q)| p - q).collect();
            let step_sq = dot(&diff, &diff);
            let phi_t = phi_value(d, &point);
            let model = phi_y + dot(&grad, &diff) + 0.5 * l_try * step_sq;
            // allow rounding noise only
            let slack = 8.0 * f64::EPSILON * (phi_y.abs() + phi_t.abs());
            if phi_t <= model + slack {
                break (point, step_sq);
            }
            l_try *= opts.eta;
            if !(l_try < L_CEILING) {
                return Err(SubproblemError::Backtracking { iteration: t });
            }
        };
        debug_assert!(
            phi_value(d, &point)
                <= phi_y
                    + dot(
                        &grad,
                        &point.iter().zip(&y).map(|(p, q)| p - q).collect::<Vec<_>>()
                    )
                    + 0.5 * l_try * step_sq
                    + 8.0 * f64::EPSILON * (phi_y.abs() + phi_value(d, &point).abs()),
            "backtracking descent condition"
        );
        lip = l_try;
        let residual = step_sq.sqrt();
        if residual <= opts.tol {
            return Ok(ApgOutcome {
                point,
                iterations: t + 1,
                residual,
                lipschitz: lip,
            });
        }
        if residual < best.1 {
            best = (point.clone(), residual);
        }
        let momentum = t as f64 / (t as f64 + 3.0);
        for ((yi, pi), xi) in y.iter_mut().zip(&point).zip(&x_prev) {
            *yi = pi + momentum * (pi - xi);
        }
        x_prev = point;
    }
    Err(SubproblemError::NotConverged {
        best: best.0,
        residual: best.1,
        iterations: opts.max_iters,
    })
}

/// How the per-iteration subproblem is solved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubproblemMethod {
    Apg,
    /// Closed form when one row is active and its point is interior; APG otherwise.
    #[default]
    ClosedFormP1WithFallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemSolution {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub closed_form: bool,
}

/// Solves `d` by `method`, warm-starting APG at the anchor `x^k`.
pub fn solve(
    d: &SubproblemData<'_>,
    method: SubproblemMethod,
    opts: &ApgOptions,
) -> Result<SubproblemSolution, SubproblemError> {
    if method == SubproblemMethod::ClosedFormP1WithFallback && d.num_rows() == 1 {
        if let Some(point) = closed_form_p1(d)? {
            return Ok(SubproblemSolution {
                point,
                iterations: 0,
                residual: 0.0,
                closed_form: true,
            });
        }
    }
    let start = d.anchor.clone();
    let out = apg_solve(d, &start, opts)?;
    Ok(SubproblemSolution {
        point: out.point,
        iterations: out.iterations,
        residual: out.residual,
        closed_form: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::norm;

    fn ball(n: usize, r: f64) -> FeasibleSet {
        FeasibleSet::centered_ball(n, r).unwrap()
    }

    #[test]
    fn trivial_scaling() {
        let set = ball(2, 10.0);
        let ev = Evaluation {
            objective: 0.7,
            constraints: vec![0.3, -1.0],
            objective_grad: vec![1.0, 2.0],
            constraint_grads: vec![vec![0.5, -0.5], vec![1.0, 1.0]],
        };
        let d = build_subproblem(&[0.0, 0.0], &[0.0, 0.0], &ev, 1.0, 1.0, &[0, 1], &set).unwrap();
        assert_eq!(d.a, ev.constraint_grads);
        assert_eq!(d.b, ev.constraints);
        assert_eq!(d.c, ev.objective_grad);
    }

    #[test]
    fn scaled_coefficients() {
        let set = ball(2, 10.0);
        let ev = Evaluation {
            objective: 0.0,
            constraints: vec![0.25],
            objective_grad: vec![3.0, -1.0],
            constraint_grads: vec![vec![1.0, -2.0]],
        };
        let d = build_subproblem(&[0.0, 0.0], &[2.0], &ev, 4.0, 1.0, &[0], &set).unwrap();
        assert_eq!(d.a[0], vec![2.0, -4.0]);
        assert_eq!(d.b[0], 1.0 + 2.0 * 0.25);
        assert_eq!(d.c, vec![3.0, -1.0]);
    }

    #[test]
    fn build_rejects_bad_input() {
        let set = ball(1, 1.0);
        let ev = Evaluation {
            objective: 0.0,
            constraints: vec![f64::NAN],
            objective_grad: vec![0.0],
            constraint_grads: vec![vec![0.0]],
        };
        assert!(build_subproblem(&[0.0], &[0.0], &ev, 1.0, 1.0, &[0], &set).is_err());
        let ev = Evaluation {
            constraints: vec![0.0],
            ..ev
        };
        assert!(build_subproblem(&[0.0], &[0.0], &ev, 0.0, 1.0, &[0], &set).is_err());
        assert!(build_subproblem(&[0.0], &[0.0], &ev, 1.0, 1.0, &[1], &set).is_err());
        assert!(build_subproblem(&[0.0], &[-1.0], &ev, 1.0, 1.0, &[0], &set).is_err());
    }

    #[test]
    fn phi_hand_values() {
        let set = ball(1, 10.0);
        let d = SubproblemData::from_coefficients(vec![], vec![], vec![0.0], &set);
        assert_eq!(phi_value(&d, &[0.0]), 0.0);
        let d = SubproblemData::from_coefficients(vec![vec![1.0]], vec![0.0], vec![0.0], &set);
        assert_eq!(phi_value(&d, &[2.0]), 4.0);
    }

    #[test]
    fn grad_without_rows_is_x_plus_c() {
        let set = ball(2, 10.0);
        let d = SubproblemData::from_coefficients(
            vec![vec![0.0, 0.0]],
            vec![-0.5],
            vec![1.0, -2.0],
            &set,
        );
        assert_eq!(phi_grad(&d, &[0.5, 0.25]), vec![1.5, -1.75]);
    }

    #[test]
    fn closed_form_branches() {
        let set = ball(2, 10.0);
        let d = SubproblemData::from_coefficients(
            vec![vec![0.0, 1.0]],
            vec![-1.0],
            vec![1.0, 0.0],
            &set,
        );
        assert_eq!(closed_form_p1(&d).unwrap(), Some(vec![-1.0, 0.0]));

        let d = SubproblemData::from_coefficients(
            vec![vec![1.0, 0.0]],
            vec![1.0],
            vec![0.0, 0.0],
            &set,
        );
        let x = closed_form_p1(&d).unwrap().unwrap();
        assert_eq!(x, vec![-0.5, 0.0]);
        assert_eq!(phi_grad(&d, &x), vec![0.0, 0.0]);
    }

    #[test]
    fn closed_form_not_applicable_outside() {
        let set = ball(2, 1.0);
        let d = SubproblemData::from_coefficients(
            vec![vec![0.0, 1.0]],
            vec![-5.0],
            vec![1.0, 0.0],
            &set,
        );
        assert_eq!(closed_form_p1(&d).unwrap(), None);
        let d = SubproblemData::from_coefficients(
            vec![vec![0.0, 1.0]],
            vec![-5.0],
            vec![3.0, 0.0],
            &set,
        );
        assert_eq!(closed_form_p1(&d).unwrap(), None);
        let two = SubproblemData::from_coefficients(
            vec![vec![0.0, 1.0]; 2],
            vec![0.0; 2],
            vec![0.0, 0.0],
            &set,
        );
        assert!(closed_form_p1(&two).is_err());
    }

    #[test]
    fn apg_inactive_hinges_goes_to_origin() {
        let set = ball(3, 2.0);
        let d = SubproblemData::from_coefficients(
            vec![vec![0.3, -0.1, 0.2], vec![-0.5, 0.5, 0.1]],
            vec![-1.0, -2.0],
            vec![0.0; 3],
            &set,
        );
        let out = apg_solve(&d, &[1.0, 1.0, -0.5], &ApgOptions::default()).unwrap();
        assert!(norm(&out.point) <= 1e-6, "{:?}", out.point);
    }

    #[test]
    fn apg_reports_non_convergence() {
        let set = ball(2, 5.0);
        let d = SubproblemData::from_coefficients(
            vec![vec![3.0, 1.0]],
            vec![2.0],
            vec![1.0, 1.0],
            &set,
        );
        let opts = ApgOptions {
            max_iters: 2,
            tol: 1e-14,
            ..ApgOptions::default()
        };
        match apg_solve(&d, &[4.0, 0.0], &opts) {
            Err(SubproblemError::NotConverged {
                best,
                residual,
                iterations,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual.is_finite());
                assert!(set.contains(&best, 1e-12));
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn apg_rejects_bad_options() {
        let set = ball(1, 1.0);
        let d = SubproblemData::from_coefficients(vec![], vec![], vec![0.0], &set);
        let bad = ApgOptions {
            eta: 1.0,
            ..ApgOptions::default()
        };
        assert!(matches!(
            apg_solve(&d, &[0.0], &bad),
            Err(SubproblemError::Input(_))
        ));
    }
}
