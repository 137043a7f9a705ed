//! Exact Euclidean projections onto the feasible-set variants.
//!
//! All functions are pure. Simplex ties need no special handling: equal
//! components sit on the same side of the threshold and receive equal
//! values.

use crate::error::{Error, Result};
use crate::vecops::{dist, norm};

/// Which bounds are tight at a projected point.
#[derive(Clone, Debug, PartialEq)]
pub enum ActiveConstraints {
    Ball {
        on_boundary: bool,
    },
    Box {
        at_lower: Vec<usize>,
        at_upper: Vec<usize>,
    },
    Simplex {
        at_zero: Vec<usize>,
    },
    CappedSimplex {
        at_zero: Vec<usize>,
        at_cap: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    pub active: ActiveConstraints,
}

/// Projection onto `{z : ‖z − center‖ ≤ radius}`.
pub fn project_ball(y: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    debug_assert!(radius > 0.0);
    let d = dist(y, center);
    if d <= radius {
        return y.to_vec();
    }
    let s = radius / d;
    y.iter()
        .zip(center)
        .map(|(yi, ci)| ci + s * (yi - ci))
        .collect()
}

/// Componentwise clamp onto `[lower, upper]`.
pub fn project_box(y: &[f64], lower: &[f64], upper: &[f64]) -> Result<Vec<f64>> {
    check_box(lower, upper)?;
    Ok(clamp_box(y, lower, upper))
}

pub(crate) fn check_box(lower: &[f64], upper: &[f64]) -> Result<()> {
    if lower.len() != upper.len() {
        return Err(Error::contract("box bounds differ in length"));
    }
    if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
        return Err(Error::input(format!(
            "box lower bound exceeds upper bound at index {i}: {} > {}",
            lower[i], upper[i]
        )));
    }
    Ok(())
}

pub(crate) fn clamp_box(y: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    y.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&v, (&l, &u))| v.max(l).min(u))
        .collect()
}

/// Projection onto the unit simplex `{z ≥ 0, Σz = 1}` by sort-and-threshold.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    let mut u = y.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let mut z: Vec<f64> = y.iter().map(|&v| (v - theta).max(0.0)).collect();
    renormalize(&mut z, |_, _| true);
    z
}

/// Projection onto `{0 ≤ z ≤ upper, Σz = 1}`.
///
/// `z_i = clamp(y_i − θ, 0, upper_i)` is nonincreasing in θ; the breakpoints
/// `y_i − upper_i` and `y_i` are sorted once, the bracketing segment is found
/// by bisection over them, and θ is solved exactly on that linear piece.
/// Infinite caps are allowed.
pub fn project_capped_simplex(y: &[f64], upper: &[f64]) -> Result<Vec<f64>> {
    check_caps(y.len(), upper)?;
    Ok(capped_simplex_unchecked(y, upper))
}

pub(crate) fn check_caps(n: usize, upper: &[f64]) -> Result<()> {
    if upper.len() != n {
        return Err(Error::contract(format!(
            "cap vector has length {}, expected {n}",
            upper.len()
        )));
    }
    if upper.iter().any(|&u| u.is_nan() || u < 0.0) {
        return Err(Error::input("capped simplex bounds must be nonnegative"));
    }
    let total: f64 = upper.iter().sum();
    if total < 1.0 {
        return Err(Error::input(format!(
            "capped simplex is empty: sum of caps {total} < 1"
        )));
    }
    Ok(())
}

pub(crate) fn capped_simplex_unchecked(y: &[f64], upper: &[f64]) -> Vec<f64> {
    let clamp_at = |theta: f64| -> Vec<f64> {
        y.iter()
            .zip(upper)
            .map(|(&v, &u)| (v - theta).max(0.0).min(u))
            .collect()
    };
    let total = |theta: f64| -> f64 { clamp_at(theta).iter().sum() };
    // free at θ means y_i − u_i < θ < y_i
    let free_count = |theta: f64| -> usize {
        y.iter()
            .zip(upper)
            .filter(|(&v, &u)| v - u < theta && theta < v)
            .count()
    };

    let mut breaks: Vec<f64> = y
        .iter()
        .zip(upper)
        .flat_map(|(&v, &u)| [v - u, v])
        .filter(|b| b.is_finite())
        .collect();
    breaks.sort_unstable_by(f64::total_cmp);
    breaks.dedup();

    let theta = if breaks.is_empty() {
        0.0
    } else if total(breaks[0]) < 1.0 {
        // only infinite caps are free left of the first breakpoint
        let b0 = breaks[0];
        let count = free_count(b0 - 1.0).max(1);
        b0 - (1.0 - total(b0)) / count as f64
    } else {
        // invariant: total(breaks[lo]) >= 1, total(breaks[hi]) < 1 or hi == len
        let (mut lo, mut hi) = (0usize, breaks.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if total(breaks[mid]) >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let b = breaks[lo];
        let s = total(b);
        if s == 1.0 || hi == breaks.len() {
            b
        } else {
            let mid = 0.5 * (b + breaks[hi]);
            let count = free_count(mid);
            if count == 0 {
                b
            } else {
                (b + (s - 1.0) / count as f64).min(breaks[hi])
            }
        }
    };

    let mut z = clamp_at(theta);
    renormalize(&mut z, |i, zi| zi > 0.0 && zi < upper[i]);
    z
}

/// Pushes the rounding residual of `Σz − 1` onto the largest eligible entry.
fn renormalize(z: &mut [f64], eligible: impl Fn(usize, f64) -> bool) {
    for _ in 0..2 {
        let residual = 1.0 - z.iter().sum::<f64>();
        if residual == 0.0 {
            return;
        }
        let best = (0..z.len())
            .filter(|&i| eligible(i, z[i]))
            .max_by(|&a, &b| z[a].total_cmp(&z[b]));
        match best {
            Some(i) if (z[i] + residual) >= 0.0 => z[i] += residual,
            _ => return,
        }
    }
}

pub(crate) fn ball_active(point: &[f64], center: &[f64], radius: f64) -> ActiveConstraints {
    let d = norm(&crate::vecops::sub(point, center));
    ActiveConstraints::Ball {
        on_boundary: (d - radius).abs() <= 1e-12 * radius.max(1.0),
    }
}
