use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::ode::{propagate, OdeOptions};
use crate::operator::PeriodicOperator;

use super::floquet_record;

/// Floquet solution `φ = u₁ + Σ_{k≥2} c_k u_k` with `φ(0) = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct NormalizedFloquet {
    pub lambda: Complex64,
    pub branch_index: usize,
    pub multiplier: Complex64,
    /// `(1, c₂, …, c_n)`.
    pub coefficients: CVector,
    /// `Δ(r; λ) = det(T₁₁ − r I)`, `T₁₁` the trailing `(n−1)×(n−1)` block.
    pub delta_value: Complex64,
    /// `|φ(b) − r φ(0)| / |r|`.
    pub residual: f64,
}

impl NormalizedFloquet {
    /// `φ(x)` at each point, by integrating the fundamental system from 0.
    pub fn eval(
        &self,
        op: &PeriodicOperator,
        xs: &[f64],
        tol: &Tolerances,
    ) -> Result<Vec<Complex64>> {
        let n = op.order();
        let init = CMatrix::from_column_slice(n, 1, self.coefficients.as_slice());
        let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
        let opts = OdeOptions::from_tolerances(tol);
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        // Nonnegative points in increasing order, negative ones in decreasing order.
        idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let (neg, pos): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| xs[i] < 0.0);
        for (group, rev) in [(pos, false), (neg, true)] {
            if group.is_empty() {
                continue;
            }
            let order: Vec<usize> = if rev {
                group.into_iter().rev().collect()
            } else {
                group
            };
            let targets: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
            let p = propagate(op, self.lambda, 0.0, &init, &targets, &opts)?;
            for (k, &i) in order.iter().enumerate() {
                out[i] = p.states[k][(0, 0)] * p.log_scales[k].exp();
            }
        }
        Ok(out)
    }
}

pub fn normalized_floquet(
    op: &PeriodicOperator,
    lambda: Complex64,
    branch_index: usize,
    tol: &Tolerances,
) -> Result<NormalizedFloquet> {
    let rec = floquet_record(op, lambda, tol)?;
    let n = op.order();
    if branch_index >= n {
        return Err(FloquetError::InvalidArgument(format!(
            "branch index {branch_index} outside 0..{n}"
        )));
    }
    let s = rec.log_scale;
    let r = rec.multipliers[branch_index];
    let rs = r * (-s).exp();
    let t = &rec.t;
    let m = n - 1;
    let t11 = CMatrix::from_fn(m, m, |i, j| {
        t[(i + 1, j + 1)] - if i == j { rs } else { Complex64::new(0.0, 0.0) }
    });
    let rhs = CVector::from_fn(m, |i, _| -t[(i + 1, 0)]);
    let delta_scaled = linalg::determinant(&t11);
    let block_norm = CMatrix::from_fn(m, m, |i, j| t[(i + 1, j + 1)])
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let delta_value = delta_scaled * ((m as f64) * s).exp();
    if delta_scaled.norm() < tol.pole_tol * block_norm.powi(m as i32) {
        return Err(FloquetError::PoleCandidate {
            lambda,
            delta: delta_value.norm(),
        });
    }
    let c = linalg::solve(&t11, &rhs).ok_or(FloquetError::PoleCandidate {
        lambda,
        delta: delta_value.norm(),
    })?;
    let mut coefficients = CVector::zeros(n);
    coefficients[0] = Complex64::new(1.0, 0.0);
    for i in 0..m {
        coefficients[i + 1] = c[i];
    }
    let phi_b = (t.row(0) * &coefficients)[(0, 0)];
    let residual = (phi_b - rs).norm() / rs.norm();
    Ok(NormalizedFloquet {
        lambda,
        branch_index,
        multiplier: r,
        coefficients,
        delta_value,
        residual,
    })
}
