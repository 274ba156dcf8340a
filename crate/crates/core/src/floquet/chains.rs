use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::ode::{propagate, OdeOptions};
use crate::operator::PeriodicOperator;

use super::floquet_record;
use super::jordan::{profile_from_record, JordanProfile};

/// `g^ℓ(x + b) = r g^ℓ(x) + g^{ℓ−1}(x)`, `g⁰ = 0`, with each `g^ℓ` given by its coefficients in the
/// fundamental basis.
#[derive(Clone, Debug, Serialize)]
pub struct FloquetSolutionChain {
    pub multiplier: Complex64,
    pub rank: usize,
    /// `vectors[ℓ−1]` holds the coefficients of `g^ℓ`.
    pub vectors: Vec<CVector>,
}

pub fn floquet_chains(
    op: &PeriodicOperator,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<Vec<FloquetSolutionChain>> {
    let rec = floquet_record(op, lambda, tol)?;
    let profile = profile_from_record(&rec, tol)?;
    floquet_chains_of(&profile)
}

fn complement(candidates: &CMatrix, against: &CMatrix, count: usize) -> CMatrix {
    let n = candidates.nrows();
    let projected = if against.ncols() == 0 {
        candidates.clone()
    } else {
        let q = linalg::orthonormal_basis(against, 1e-10);
        candidates - &q * (q.adjoint() * candidates)
    };
    match linalg::svd(&projected) {
        Ok(d) => d.u.columns(0, count.min(n)).into_owned(),
        Err(_) => CMatrix::zeros(n, 0),
    }
}

/// Chains from a computed profile, one per Jordan block.
pub fn floquet_chains_of(profile: &JordanProfile) -> Result<Vec<FloquetSolutionChain>> {
    let scale = Complex64::new(profile.log_scale.exp(), 0.0);
    let mut chains = Vec::new();
    for cl in &profile.clusters {
        let m = &cl.nilpotent;
        let a = m.nrows();
        let smax = cl.block_sizes.first().copied().unwrap_or(0);
        // Kernel bases of M^k with the dimensions fixed by the profile.
        let mut kernels = vec![CMatrix::zeros(a, 0)];
        let mut pow = CMatrix::identity(a, a);
        for k in 1..=smax {
            pow = &pow * m;
            let dim: usize = cl.block_sizes.iter().map(|&s| s.min(k)).sum();
            kernels.push(linalg::null_space(&pow, a - dim));
        }
        // (top vector, length) in restricted coordinates
        let mut tops: Vec<(CVector, usize)> = Vec::new();
        for k in (1..=smax).rev() {
            let count = cl.block_sizes.iter().filter(|&&s| s == k).count();
            if count == 0 {
                continue;
            }
            let mut against: Vec<CVector> = kernels[k - 1]
                .column_iter()
                .map(|c| c.into_owned())
                .collect();
            for (top, len) in &tops {
                let mut v = top.clone();
                for _ in 0..(len - k) {
                    v = m * v;
                }
                against.push(v);
            }
            let against = if against.is_empty() {
                CMatrix::zeros(a, 0)
            } else {
                CMatrix::from_columns(&against)
            };
            let new = complement(&kernels[k], &against, count);
            for c in new.column_iter() {
                tops.push((c.into_owned(), k));
            }
        }
        if tops.len() != cl.geometric {
            return Err(FloquetError::Classification(
                "chain construction lost a block".into(),
            ));
        }
        for (top, len) in tops {
            let mut vs = vec![top];
            for _ in 1..len {
                let prev = m * vs.last().expect("nonempty") * scale;
                vs.push(prev);
            }
            vs.reverse();
            let norm = vs[0].norm();
            let vectors = vs
                .into_iter()
                .map(|v| &cl.basis * v / Complex64::new(norm, 0.0))
                .collect();
            chains.push(FloquetSolutionChain {
                multiplier: cl.multiplier,
                rank: len,
                vectors,
            });
        }
    }
    Ok(chains)
}

/// Largest `|g^ℓ(x+b) − r g^ℓ(x) − g^{ℓ−1}(x)|` over 16 points in `[0, b)`, relative to the size
/// of the chain values there.
pub fn chain_residual(
    op: &PeriodicOperator,
    lambda: Complex64,
    chain: &FloquetSolutionChain,
    tol: &Tolerances,
) -> Result<f64> {
    let n = op.order();
    let b = op.period();
    let xs: Vec<f64> = (0..16).map(|i| b * (i as f64 + 0.5) / 16.0).collect();
    let targets: Vec<f64> = xs.iter().copied().chain(xs.iter().map(|x| x + b)).collect();
    let p = propagate(
        op,
        lambda,
        0.0,
        &CMatrix::identity(n, n),
        &targets,
        &OdeOptions::from_tolerances(tol),
    )?;
    let value = |state: &CMatrix, c: &CVector, scale: f64| (state.row(0) * c)[(0, 0)] * scale;
    let mut worst: f64 = 0.0;
    let mut size: f64 = 0.0;
    for i in 0..16 {
        let (s0, l0) = (&p.states[i], p.log_scales[i].exp());
        let (s1, l1) = (&p.states[16 + i], p.log_scales[16 + i].exp());
        for l in 0..chain.rank {
            let g = &chain.vectors[l];
            let gx = value(s0, g, l0);
            let gxb = value(s1, g, l1);
            let prev = if l == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                value(s0, &chain.vectors[l - 1], l0)
            };
            worst = worst.max((gxb - chain.multiplier * gx - prev).norm());
            size = size
                .max(gxb.norm())
                .max((chain.multiplier * gx).norm())
                .max(prev.norm());
        }
    }
    Ok(worst / size.max(1e-300))
}
