use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::linalg::{self, rank_from_sigma, CMatrix};
use crate::operator::PeriodicOperator;

use super::{floquet_record, FloquetRecord};

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierCluster {
    /// Mean of the member multipliers, in the units of the unscaled `T`.
    pub multiplier: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    /// Block sizes in decreasing order.
    pub block_sizes: Vec<usize>,
    /// Indices into the multiplier list.
    pub members: Vec<usize>,
    /// Worst gap ratio over the rank decisions made for this cluster.
    pub gap_ratio: f64,
    /// Orthonormal basis of the generalized eigenspace (columns), in fundamental-basis coordinates.
    #[serde(skip)]
    pub basis: CMatrix,
    /// Action of the scaled `T − r I` on `basis`: `(t − r e^{−s}) basis = basis · nilpotent`.
    #[serde(skip)]
    pub nilpotent: CMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct JordanProfile {
    pub lambda: Complex64,
    pub clusters: Vec<MultiplierCluster>,
    pub rank_tolerance_used: f64,
    /// `T = e^{log_scale} t` for the matrix the profile was built from.
    pub log_scale: f64,
}

impl JordanProfile {
    pub fn total_size(&self) -> usize {
        self.clusters
            .iter()
            .flat_map(|c| c.block_sizes.iter())
            .sum()
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.clusters
            .iter()
            .all(|c| c.block_sizes.iter().all(|&s| s == 1))
    }

    /// Whether any eigenvalue has fewer eigenvectors than its multiplicity.
    pub fn has_anomaly(&self) -> bool {
        !self.is_diagonalizable()
    }
}

pub fn jordan_profile(
    op: &PeriodicOperator,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<JordanProfile> {
    let rec = floquet_record(op, lambda, tol)?;
    profile_from_record(&rec, tol)
}

pub(crate) fn profile_from_record(rec: &FloquetRecord, tol: &Tolerances) -> Result<JordanProfile> {
    let mut p = jordan_profile_of(&rec.t, &scaled(&rec.multipliers, rec.log_scale), tol)?;
    let f = rec.log_scale.exp();
    for c in &mut p.clusters {
        c.multiplier *= f;
    }
    p.lambda = rec.lambda;
    p.log_scale = rec.log_scale;
    Ok(p)
}

fn scaled(r: &[Complex64], s: f64) -> Vec<Complex64> {
    let f = (-s).exp();
    r.iter().map(|z| z * f).collect()
}

fn single_linkage(values: &[Complex64], idx: &[usize], rel: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; idx.len()];
    for start in 0..idx.len() {
        if assigned[start] {
            continue;
        }
        assigned[start] = true;
        let mut group = vec![start];
        let mut q = 0;
        while q < group.len() {
            let a = values[idx[group[q]]];
            for other in 0..idx.len() {
                if assigned[other] {
                    continue;
                }
                let b = values[idx[other]];
                if (a - b).norm() < rel * a.norm().max(b.norm()) {
                    assigned[other] = true;
                    group.push(other);
                }
            }
            q += 1;
        }
        groups.push(group.into_iter().map(|g| idx[g]).collect());
    }
    groups
}

/// Orthonormal basis of the invariant subspace for the eigenvalues inside `|z − center| < radius`,
/// from the Riesz projector by trapezoidal quadrature.
fn spectral_basis(t: &CMatrix, center: Complex64, radius: f64, dim: usize) -> Result<CMatrix> {
    let n = t.nrows();
    if dim == n {
        return Ok(CMatrix::identity(n, n));
    }
    const K: usize = 96;
    let mut proj = CMatrix::zeros(n, n);
    for k in 0..K {
        let w = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / K as f64);
        let z = center + w;
        let m = CMatrix::identity(n, n) * z - t;
        let inv = m.try_inverse().ok_or_else(|| {
            FloquetError::Classification("resolvent singular on the projector contour".into())
        })?;
        proj += inv * (w / K as f64);
    }
    Ok(linalg::svd(&proj)?.u.columns(0, dim).into_owned())
}

struct Analysis {
    nullities: Vec<usize>,
    gap: f64,
    ambiguous: bool,
}

fn analyze(nil: &CMatrix, scale: f64, tol: &Tolerances) -> Analysis {
    let a = nil.nrows();
    let base = linalg::spectral_norm(nil).max(scale);
    let mut pow = CMatrix::identity(a, a);
    let mut nullities = vec![0];
    let mut gap = f64::INFINITY;
    let mut ambiguous = false;
    for k in 1..=a {
        pow = &pow * nil;
        let sigma = linalg::singular_values(&pow);
        let dec = rank_from_sigma(&sigma, tol.rank_tol * base.powi(k as i32), tol.rank_gap);
        gap = gap.min(dec.gap_ratio);
        ambiguous |= dec.ambiguous;
        nullities.push(a - dec.rank);
    }
    Analysis {
        nullities,
        gap,
        ambiguous,
    }
}

fn blocks_from_nullities(d: &[usize]) -> Option<Vec<usize>> {
    // c_k = d_k − d_{k−1}: number of blocks of size ≥ k.
    let a = d.len() - 1;
    let mut c = Vec::with_capacity(a + 1);
    for k in 1..=a {
        if d[k] < d[k - 1] {
            return None;
        }
        c.push(d[k] - d[k - 1]);
    }
    c.push(0);
    let mut sizes = Vec::new();
    for k in (1..=a).rev() {
        if c[k - 1] < c[k] {
            return None;
        }
        for _ in 0..(c[k - 1] - c[k]) {
            sizes.push(k);
        }
    }
    Some(sizes)
}

/// Jordan structure of a matrix given (estimates of) its eigenvalues.
pub fn jordan_profile_of(
    t: &CMatrix,
    eigenvalues: &[Complex64],
    tol: &Tolerances,
) -> Result<JordanProfile> {
    let n = t.nrows();
    if eigenvalues.len() != n {
        return Err(FloquetError::InvalidArgument(format!(
            "{} eigenvalues for a {n}×{n} matrix",
            eigenvalues.len()
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    let mut pending: Vec<(Vec<usize>, f64)> = single_linkage(eigenvalues, &all, tol.cluster_tol)
        .into_iter()
        .map(|g| (g, tol.cluster_tol))
        .collect();
    let mut clusters = Vec::new();
    while let Some((members, rel)) = pending.pop() {
        let a = members.len();
        let mean = members.iter().map(|&i| eigenvalues[i]).sum::<Complex64>() / a as f64;
        let spread = members
            .iter()
            .map(|&i| (eigenvalues[i] - mean).norm())
            .fold(0.0, f64::max);
        let gap = (0..n)
            .filter(|i| !members.contains(i))
            .map(|i| (eigenvalues[i] - mean).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if gap.is_finite() {
            0.5 * gap
        } else {
            1.0 + mean.norm()
        };
        if spread >= radius {
            return Err(FloquetError::Classification(format!(
                "multiplier cluster at {mean} is not separated from the rest of the spectrum"
            )));
        }
        let q = spectral_basis(t, mean, radius, a)?;
        let restricted = q.adjoint() * t * &q;
        // Center on the block's own trace; `mean` carries errors on the scale of ‖T‖.
        let center = restricted.trace() / a as f64;
        let nil = &restricted - CMatrix::identity(a, a) * center;
        let an = analyze(&nil, mean.norm(), tol);
        let verified = an.nullities[a] == a;
        if !verified && a > 1 {
            let finer = rel / 10.0;
            let groups = single_linkage(eigenvalues, &members, finer);
            if groups.len() > 1 || finer > 1e-14 {
                pending.extend(groups.into_iter().map(|g| (g, finer)));
                continue;
            }
        }
        if an.ambiguous {
            return Err(FloquetError::RankAmbiguous {
                value: mean,
                gap_ratio: an.gap,
            });
        }
        let sizes = blocks_from_nullities(&an.nullities)
            .filter(|s| s.iter().sum::<usize>() == a)
            .ok_or_else(|| {
                FloquetError::Classification(format!(
                    "inconsistent kernel dimensions {:?} at {mean}",
                    an.nullities
                ))
            })?;
        clusters.push(MultiplierCluster {
            multiplier: mean,
            algebraic: a,
            geometric: sizes.len(),
            block_sizes: sizes,
            members,
            gap_ratio: an.gap,
            basis: q,
            nilpotent: nil,
        });
    }
    clusters.sort_by(|x, y| x.members[0].cmp(&y.members[0]));
    Ok(JordanProfile {
        lambda: Complex64::new(f64::NAN, f64::NAN),
        clusters,
        rank_tolerance_used: tol.rank_tol,
        log_scale: 0.0,
    })
}
