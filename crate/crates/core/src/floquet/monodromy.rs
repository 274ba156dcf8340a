use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::operator::PeriodicOperator;

use super::lambda_matrix::{FloquetFamily, LambdaMatrix};
use super::normalized_discriminant;

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyTrace {
    pub center: Complex64,
    pub radius: f64,
    pub windings: usize,
    /// `permutation[i] = j`: continuing branch `i` once around lands on branch `j`.
    pub permutation: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
    pub thetas: Vec<f64>,
    /// Tracked eigenvalues at each accepted θ, in branch order.
    pub values: Vec<Vec<Complex64>>,
    pub min_normalized_discriminant: f64,
    pub refinements: usize,
}

/// Cycle decomposition of a permutation given as `perm[i] = j`.
pub fn cycle_type(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            cyc.push(i);
            i = perm[i];
        }
        cycles.push(cyc);
    }
    cycles
}

fn match_step(cur: &[Complex64], next: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = cur.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut used = vec![false; n];
    for i in 0..n {
        let radius = (0..n)
            .filter(|&j| j != i)
            .map(|j| (cur[i] - cur[j]).norm())
            .fold(f64::INFINITY, f64::min)
            * 0.25;
        let (j, d) = next
            .iter()
            .enumerate()
            .map(|(j, v)| (j, (v - cur[i]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        let radius = if radius.is_finite() {
            radius
        } else {
            f64::INFINITY
        };
        if d >= radius || used[j] {
            return None;
        }
        used[j] = true;
        out[i] = next[j];
    }
    Some(out)
}

/// Continues the eigenvalues of `family` along `λ(θ) = center + radius·e^{iθ}`, `θ ∈ [0, 2π·windings]`,
/// starting from `steps` uniform steps per winding and halving locally on collisions.
pub fn track_eigenvalues<F: LambdaMatrix + ?Sized>(
    family: &F,
    center: Complex64,
    radius: f64,
    windings: usize,
    steps: usize,
    tol: &Tolerances,
) -> Result<MonodromyTrace> {
    if !(radius > 0.0) || windings == 0 || steps == 0 {
        return Err(FloquetError::InvalidArgument(
            "radius, windings and steps must be positive".into(),
        ));
    }
    let path = |theta: f64| center + Complex64::from_polar(radius, theta);
    let total = 2.0 * PI * windings as f64;
    let base = 2.0 * PI / steps as f64;
    let min_step = 2.0 * PI / tol.max_monodromy_steps as f64;
    let start = family.eigenvalues(path(0.0))?;
    let mut cur = start.clone();
    let mut theta = 0.0;
    let mut h = base;
    let mut thetas = vec![0.0];
    let mut values = vec![cur.clone()];
    let mut min_disc = normalized_discriminant(&cur);
    let mut refinements = 0;
    while theta < total - 1e-15 {
        let step = h.min(total - theta);
        let next = family.eigenvalues(path(theta + step))?;
        match match_step(&cur, &next) {
            Some(m) => {
                theta += step;
                cur = m;
                min_disc = min_disc.min(normalized_discriminant(&cur));
                thetas.push(theta);
                values.push(cur.clone());
                h = (h * 2.0).min(base);
            }
            None => {
                h *= 0.5;
                refinements += 1;
                if h < min_step {
                    return Err(FloquetError::TrackingCollision {
                        theta,
                        detail: format!(
                            "step below 2π/{} without a consistent match",
                            tol.max_monodromy_steps
                        ),
                    });
                }
            }
        }
    }
    if min_disc < tol.disc_floor {
        return Err(FloquetError::PathNearBranch(min_disc));
    }
    // Final values are the starting set permuted; identify by nearest start value.
    let mut perm = vec![0; cur.len()];
    let mut used = vec![false; cur.len()];
    for (i, v) in cur.iter().enumerate() {
        let (j, _) = start
            .iter()
            .enumerate()
            .map(|(j, s)| (j, (s - v).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if used[j] {
            return Err(FloquetError::TrackingCollision {
                theta: total,
                detail: "closing values do not match the starting set".into(),
            });
        }
        used[j] = true;
        perm[i] = j;
    }
    Ok(MonodromyTrace {
        center,
        radius,
        windings,
        cycles: cycle_type(&perm),
        permutation: perm,
        thetas,
        values,
        min_normalized_discriminant: min_disc,
        refinements,
    })
}

/// Multiplier monodromy along `|λ| = (R/b)^n`.
pub fn monodromy_permutation(
    op: &PeriodicOperator,
    r: f64,
    steps: usize,
    tol: &Tolerances,
) -> Result<MonodromyTrace> {
    let radius = (r / op.period()).powi(op.order() as i32);
    monodromy_around(op, Complex64::new(0.0, 0.0), radius, steps, 1, tol)
}

pub fn monodromy_around(
    op: &PeriodicOperator,
    center: Complex64,
    radius: f64,
    steps: usize,
    windings: usize,
    tol: &Tolerances,
) -> Result<MonodromyTrace> {
    let family = FloquetFamily {
        op,
        tol: tol.clone(),
    };
    track_eigenvalues(&family, center, radius, windings, steps, tol)
}
