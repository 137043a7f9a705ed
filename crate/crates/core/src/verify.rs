//! Reference computations used to verify the solver: brute-force
//! projections, direct augmented-Lagrangian evaluation, finite differences,
//! long-run projected gradient and convexity probes.
//!
//! Everything here is deliberately naive and shares no code path with the
//! routines it checks.

use crate::feasible::FeasibleSet;
use crate::problem::{Evaluation, StochasticProblem};
use crate::rng::{SeededStream, StreamId};
use crate::subproblem::SubproblemData;

/// `L^k_σ(x, λ) + (α/2)‖x − x^k‖²` evaluated term by term, summing only the
/// constraints listed in `rows`.
pub fn proximal_augmented_lagrangian(
    x: &[f64],
    lambda: &[f64],
    sample: &Evaluation,
    anchor: &[f64],
    sigma: f64,
    alpha: f64,
    rows: &[usize],
) -> f64 {
    let n = x.len();
    let mut lin = 0.0;
    for j in 0..n {
        lin += sample.objective_grad[j] * (x[j] - anchor[j]);
    }
    let mut pen = 0.0;
    let mut lam_sq = 0.0;
    for &i in rows {
        let mut inner = 0.0;
        for j in 0..n {
            inner += sample.constraint_grads[i][j] * (x[j] - anchor[j]);
        }
        let t = lambda[i] + sigma * (sample.constraints[i] + inner);
        let h = if t > 0.0 { t } else { 0.0 };
        pen += h * h;
        lam_sq += lambda[i] * lambda[i];
    }
    let mut prox = 0.0;
    for j in 0..n {
        prox += (x[j] - anchor[j]) * (x[j] - anchor[j]);
    }
    sample.objective + lin + (pen - lam_sq) / (2.0 * sigma) + 0.5 * alpha * prox
}

/// `φ` with an explicit scalar hinge loop.
pub fn phi_naive(d: &SubproblemData<'_>, x: &[f64]) -> f64 {
    let mut total = 0.0;
    for (row, b) in d.a.iter().zip(&d.b) {
        let mut s = *b;
        for (a, xi) in row.iter().zip(x) {
            s += a * xi;
        }
        let h = if s > 0.0 { s } else { 0.0 };
        total += 0.5 * h * h;
    }
    for (xi, ci) in x.iter().zip(&d.c) {
        total += 0.5 * xi * xi + ci * xi;
    }
    total
}

/// Central differences with step `h`.
pub fn finite_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖g − fd‖ / max(1, ‖fd‖)`.
pub fn gradient_relative_error(g: &[f64], fd: &[f64]) -> f64 {
    let diff: f64 = g
        .iter()
        .zip(fd)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / scale.max(1.0)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Simplex projection by enumerating every support set `S`: on `S` the
/// minimizer is `y_S − θ` with a common shift fixing the sum.
pub fn simplex_by_enumeration(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    assert!(n <= 16, "enumeration is exponential");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let theta = (members.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / members.len() as f64;
        let mut z = vec![0.0; n];
        let mut ok = true;
        for &i in &members {
            z[i] = y[i] - theta;
            ok &= z[i] >= -1e-15;
        }
        if ok {
            let d = sq_dist(&z, y);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, z));
            }
        }
    }
    best.expect("some support set is feasible").1
}

/// Capped-simplex projection by enumerating each coordinate's state
/// (at zero, at cap, or free with a common shift).
pub fn capped_simplex_by_enumeration(y: &[f64], upper: &[f64]) -> Vec<f64> {
    let n = y.len();
    assert!(n <= 10, "enumeration is exponential");
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut state = vec![0u8; n];
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let mut z = vec![0.0; n];
        let mut fixed = 0.0;
        let mut free = Vec::new();
        for i in 0..n {
            match state[i] {
                0 => z[i] = 0.0,
                1 => {
                    z[i] = upper[i];
                    fixed += upper[i];
                }
                _ => free.push(i),
            }
        }
        if free.is_empty() {
            if (fixed - 1.0).abs() > 1e-12 {
                continue;
            }
        } else {
            let theta =
                (free.iter().map(|&i| y[i]).sum::<f64>() - (1.0 - fixed)) / free.len() as f64;
            for &i in &free {
                z[i] = y[i] - theta;
            }
        }
        if z.iter()
            .zip(upper)
            .all(|(&v, &u)| v >= -1e-13 && v <= u + 1e-13)
        {
            let d = sq_dist(&z, y);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, z));
            }
        }
    }
    best.expect("caps admit a feasible point").1
}

/// Plain projected gradient `x ← Π(x − step ∇φ(x))` with a hand-coded
/// gradient, from the set's center point.
pub fn projected_gradient_long_run(
    d: &SubproblemData<'_>,
    step: f64,
    iterations: usize,
) -> Vec<f64> {
    let mut x = d.set.center_point();
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..iterations {
        for j in 0..n {
            g[j] = x[j] + d.c[j];
        }
        for (row, b) in d.a.iter().zip(&d.b) {
            let mut s = *b;
            for j in 0..n {
                s += row[j] * x[j];
            }
            if s > 0.0 {
                for j in 0..n {
                    g[j] += s * row[j];
                }
            }
        }
        for j in 0..n {
            y[j] = x[j] - step * g[j];
        }
        x = d.set.project(&y);
    }
    x
}

/// Exact-ish sum via double-double accumulation.
pub fn double_double_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for v in values {
        let s = hi + v;
        let bp = s - hi;
        let err = (hi - (s - bp)) + (v - bp);
        hi = s;
        lo += err;
        let t = hi + lo;
        lo -= t - hi;
        hi = t;
    }
    hi + lo
}

/// Outcome of random secant / subgradient probes on a problem.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvexityReport {
    pub trials: usize,
    pub secant_violations: usize,
    pub subgradient_violations: usize,
    /// Largest amount by which any inequality failed (≤ 0 when all held).
    pub worst_excess: f64,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.secant_violations == 0 && self.subgradient_violations == 0
    }
}

/// Checks `F(θx+(1−θ)y) ≤ θF(x)+(1−θ)F(y) + tol` and
/// `F(y) ≥ F(x) + ⟨v₀(x), y−x⟩ − tol` (and likewise every `G_i`) on random
/// feasible triples.
pub fn convexity_probe<P: StochasticProblem>(
    problem: &P,
    trials: usize,
    seed: u64,
    tol: f64,
) -> ConvexityReport {
    let set: &FeasibleSet = problem.feasible_set();
    let mut rng = SeededStream::new(seed, StreamId::raw(0xC0));
    let mut report = ConvexityReport {
        trials,
        worst_excess: f64::NEG_INFINITY,
        ..Default::default()
    };
    for t in 0..trials {
        let x = set.random_point(&mut rng);
        let y = set.random_point(&mut rng);
        let theta = rng.unit();
        let mid: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        let mut s = SeededStream::new(seed, StreamId::validation(t as u64));
        let scen = problem.sample(&mut s);
        let (ex, ey, em) = (
            problem.evaluate(&x, &scen),
            problem.evaluate(&y, &scen),
            problem.evaluate(&mid, &scen),
        );

        let mut secant_ok = true;
        let mut sub_ok = true;
        let mut check = |lhs: f64, rhs: f64, ok: &mut bool| {
            let excess = lhs - rhs;
            report.worst_excess = report.worst_excess.max(excess);
            if excess > tol {
                *ok = false;
            }
        };
        check(
            em.objective,
            theta * ex.objective + (1.0 - theta) * ey.objective,
            &mut secant_ok,
        );
        let lin = |v: &[f64]| {
            v.iter()
                .zip(y.iter().zip(&x))
                .map(|(g, (b, a))| g * (b - a))
                .sum::<f64>()
        };
        check(
            ex.objective + lin(&ex.objective_grad),
            ey.objective,
            &mut sub_ok,
        );
        for i in 0..problem.num_constraints() {
            check(
                em.constraints[i],
                theta * ex.constraints[i] + (1.0 - theta) * ey.constraints[i],
                &mut secant_ok,
            );
            check(
                ex.constraints[i] + lin(&ex.constraint_grads[i]),
                ey.constraints[i],
                &mut sub_ok,
            );
        }
        report.secant_violations += usize::from(!secant_ok);
        report.subgradient_violations += usize::from(!sub_ok);
    }
    report
}

/// Largest finite-difference relative error of the objective and every
/// constraint gradient over `points` random feasible points.
pub fn gradient_probe<P: StochasticProblem>(problem: &P, points: usize, seed: u64, h: f64) -> f64 {
    let set = problem.feasible_set();
    let mut rng = SeededStream::new(seed, StreamId::raw(0xF0));
    let mut worst: f64 = 0.0;
    for t in 0..points {
        let x = set.random_point(&mut rng);
        let mut s = SeededStream::new(seed, StreamId::validation(t as u64));
        let scen = problem.sample(&mut s);
        let ev = problem.evaluate(&x, &scen);
        let fd = finite_difference_gradient(|z| problem.objective(z, &scen), &x, h);
        worst = worst.max(gradient_relative_error(&ev.objective_grad, &fd));
        for i in 0..problem.num_constraints() {
            let fd = finite_difference_gradient(|z| problem.constraints(z, &scen)[i], &x, h);
            worst = worst.max(gradient_relative_error(&ev.constraint_grads[i], &fd));
        }
    }
    worst
}

/// Output of [`full_batch_reference`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub point: Vec<f64>,
    pub objective: f64,
    pub constraints: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub outer_iterations: usize,
    /// Gradient-mapping norm at the last inner solve.
    pub stationarity: f64,
}

struct FullBatch {
    objective: f64,
    constraints: Vec<f64>,
    objective_grad: Vec<f64>,
    constraint_grads: Vec<Vec<f64>>,
}

fn full_batch<P: StochasticProblem>(
    problem: &P,
    population: &[P::Scenario],
    x: &[f64],
) -> FullBatch {
    let (n, p) = (problem.dim(), problem.num_constraints());
    let mut acc = FullBatch {
        objective: 0.0,
        constraints: vec![0.0; p],
        objective_grad: vec![0.0; n],
        constraint_grads: vec![vec![0.0; n]; p],
    };
    for s in population {
        let ev = problem.evaluate(x, s);
        acc.objective += ev.objective;
        for i in 0..p {
            acc.constraints[i] += ev.constraints[i];
            for j in 0..n {
                acc.constraint_grads[i][j] += ev.constraint_grads[i][j];
            }
        }
        for j in 0..n {
            acc.objective_grad[j] += ev.objective_grad[j];
        }
    }
    let w = 1.0 / population.len() as f64;
    acc.objective *= w;
    acc.constraints.iter_mut().for_each(|v| *v *= w);
    acc.objective_grad.iter_mut().for_each(|v| *v *= w);
    acc.constraint_grads
        .iter_mut()
        .flatten()
        .for_each(|v| *v *= w);
    acc
}

/// Deterministic reference optimum of a finite-sum problem with smooth `F`
/// and `G`: a classical augmented Lagrangian method with penalty `rho` whose
/// inner problems are solved by restarted accelerated projected gradient on
/// exact full-population gradients. Returns `None` without a finite
/// population.
pub fn full_batch_reference<P: StochasticProblem>(
    problem: &P,
    rho: f64,
    outer: usize,
    tol: f64,
) -> Option<ReferenceSolution> {
    let population = problem.full_pass()?;
    let set = problem.feasible_set();
    let p = problem.num_constraints();
    let mut x = problem.initial_point();
    let mut lambda = vec![0.0; p];

    let lagrangian = |x: &[f64], lambda: &[f64]| -> (f64, Vec<f64>) {
        let fb = full_batch(problem, &population, x);
        let mut value = fb.objective;
        let mut grad = fb.objective_grad;
        for ((l, g_i), v_i) in lambda.iter().zip(&fb.constraints).zip(&fb.constraint_grads) {
            let t = (l + rho * g_i).max(0.0);
            value += (t * t - l * l) / (2.0 * rho);
            for (g, v) in grad.iter_mut().zip(v_i) {
                *g += t * v;
            }
        }
        (value, grad)
    };

    let mut stationarity = f64::INFINITY;
    let mut outer_done = 0;
    for it in 0..outer {
        outer_done = it + 1;
        // restarted accelerated projected gradient on the inner problem
        let mut lip = 1.0f64;
        let mut y = x.clone();
        let mut x_prev = x.clone();
        let mut theta = 1.0f64;
        let mut f_prev = f64::INFINITY;
        for _ in 0..20_000 {
            let (fy, gy) = lagrangian(&y, &lambda);
            let (next, fnext) = loop {
                let trial: Vec<f64> = y.iter().zip(&gy).map(|(a, g)| a - g / lip).collect();
                let z = set.project(&trial);
                let d: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
                let fz = lagrangian(&z, &lambda).0;
                let model = fy
                    + d.iter().zip(&gy).map(|(a, b)| a * b).sum::<f64>()
                    + 0.5 * lip * d.iter().map(|v| v * v).sum::<f64>();
                if fz <= model + 1e-14 * (1.0 + fy.abs()) {
                    break (z, fz);
                }
                lip *= 2.0;
            };
            stationarity = lip
                * next
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
            if stationarity <= tol {
                x = next;
                break;
            }
            if fnext > f_prev {
                // function-value restart
                theta = 1.0;
                y = x_prev.clone();
                f_prev = f64::INFINITY;
                continue;
            }
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let beta = (theta - 1.0) / theta_next;
            y = next
                .iter()
                .zip(&x_prev)
                .map(|(a, b)| a + beta * (a - b))
                .collect();
            theta = theta_next;
            x_prev = next.clone();
            x = next;
            f_prev = fnext;
            lip = (lip / 1.5).max(1e-8);
        }
        let g = full_batch(problem, &population, &x).constraints;
        let lambda_next: Vec<f64> = lambda
            .iter()
            .zip(&g)
            .map(|(l, gi)| (l + rho * gi).max(0.0))
            .collect();
        let change = lambda_next
            .iter()
            .zip(&lambda)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        lambda = lambda_next;
        let violation = g.iter().fold(0.0f64, |m, v| m.max(*v));
        if violation <= tol && change <= tol * rho {
            break;
        }
    }
    let fb = full_batch(problem, &population, &x);
    Some(ReferenceSolution {
        point: x,
        objective: fb.objective,
        constraints: fb.constraints,
        multipliers: lambda,
        outer_iterations: outer_done,
        stationarity,
    })
}
