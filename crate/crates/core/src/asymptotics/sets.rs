use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Tolerances;
use crate::contour::{find_zeros, ContourScan, Rect, Scaled, ScanOptions, ZeroHit};
use crate::error::{FloquetError, Result};
use crate::floquet::{
    floquet_record, track_eigenvalues, FloquetFamily, JordanProfile, LambdaMatrix, MonodromyTrace,
};
use crate::operator::PeriodicOperator;

/// `∏_{j<k} (r_k − r_j)²` from `ln r_j`, without overflow.
pub fn discriminant_scaled(logs: &[Complex64]) -> Scaled {
    let mut ln = Complex64::new(0.0, 0.0);
    for k in 0..logs.len() {
        for j in 0..k {
            // r_k − r_j = r_a (e^{l_b − l_a} − 1) with Re(l_b − l_a) ≤ 0.
            let (a, b) = if logs[j].re >= logs[k].re {
                (logs[j], logs[k])
            } else {
                (logs[k], logs[j])
            };
            let d = b - a;
            let em1 = if d.norm() < 1e-5 {
                d * (1.0 + d * (0.5 + d / 6.0))
            } else {
                d.exp() - 1.0
            };
            if em1 == Complex64::new(0.0, 0.0) {
                return Scaled::new(Complex64::new(0.0, 0.0));
            }
            ln += 2.0 * (a + em1.ln());
        }
    }
    Scaled::with_scale(Complex64::from_polar(1.0, ln.im), ln.re)
}

/// Zeros of `D_P` in `region`.
pub fn discriminant_zeros(
    op: &PeriodicOperator,
    region: &Rect,
    tol: &Tolerances,
) -> Result<ContourScan> {
    let f =
        |l: Complex64| floquet_record(op, l, tol).map(|r| discriminant_scaled(&r.log_multipliers));
    find_zeros(
        &f,
        region,
        &ScanOptions::from_tolerances(tol).with_resolution(op.order(), op.period()),
    )
}

/// Zeros of `∏_{j<k} (r_k − r_j)²` for the eigenvalues of a lambda matrix.
pub fn lambda_matrix_discriminant_zeros<F: LambdaMatrix + ?Sized>(
    family: &F,
    region: &Rect,
    tol: &Tolerances,
) -> Result<ContourScan> {
    let f = |l: Complex64| {
        family
            .eigenvalues(l)
            .map(|r| Scaled::new(crate::poly::discriminant_from_roots(&r)))
    };
    find_zeros(&f, region, &ScanOptions::from_tolerances(tol))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterPathology {
    pub multiplier: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    pub block_sizes: Vec<usize>,
    /// Lengths of the monodromy cycles of the sheets meeting at this value.
    pub cycle_lengths: Vec<usize>,
    pub ramified: bool,
    /// More independent eigenvectors than sheet groups: a ramified group keeps a multi-dimensional eigenspace.
    pub first_kind: bool,
    /// Fewer eigenvectors than sheet groups: separate sheets collapse onto one eigenline.
    pub second_kind: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointClassification {
    pub lambda: Complex64,
    pub jordan: JordanProfile,
    pub monodromy: Option<MonodromyTrace>,
    pub monodromy_error: Option<String>,
    pub jordan_anomaly: bool,
    pub ramified: bool,
    pub clusters: Vec<ClusterPathology>,
    pub first_kind: bool,
    pub second_kind: bool,
}

const BRANCH_STEPS: usize = 64;

fn local_monodromy<F: LambdaMatrix + ?Sized>(
    family: &F,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<MonodromyTrace> {
    let radius = 1e-3 * (1.0 + lambda.norm());
    let mut steps = BRANCH_STEPS;
    loop {
        match track_eigenvalues(family, lambda, radius, 1, steps, tol) {
            Err(FloquetError::TrackingCollision { .. }) if steps < 16 * BRANCH_STEPS => steps *= 2,
            other => return other,
        }
    }
}

/// Jordan structure at `λ*` against the sheet permutation on a small circle about it.
pub fn classify_point<F: LambdaMatrix + ?Sized>(
    family: &F,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<PointClassification> {
    let jordan = family.jordan(lambda, tol)?;
    let (monodromy, monodromy_error) = match local_monodromy(family, lambda, tol) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut clusters: Vec<ClusterPathology> = jordan
        .clusters
        .iter()
        .map(|c| ClusterPathology {
            multiplier: c.multiplier,
            algebraic: c.algebraic,
            geometric: c.geometric,
            block_sizes: c.block_sizes.clone(),
            cycle_lengths: Vec::new(),
            ramified: false,
            first_kind: false,
            second_kind: false,
        })
        .collect();
    if let Some(t) = &monodromy {
        let start = &t.values[0];
        for cyc in &t.cycles {
            let v = start[cyc[0]];
            if let Some(idx) = (0..clusters.len()).min_by(|&a, &b| {
                (clusters[a].multiplier - v)
                    .norm()
                    .total_cmp(&(clusters[b].multiplier - v).norm())
            }) {
                clusters[idx].cycle_lengths.push(cyc.len());
            }
        }
        for c in &mut clusters {
            c.cycle_lengths.sort_unstable_by(|a, b| b.cmp(a));
            c.ramified = c.cycle_lengths.iter().any(|&d| d > 1);
            let m = c.cycle_lengths.len();
            if c.geometric > m {
                c.first_kind = true;
            } else if c.geometric < m {
                c.second_kind = true;
            } else if c.cycle_lengths != c.block_sizes {
                c.first_kind = true;
                c.second_kind = true;
            }
        }
    }
    let ramified = monodromy
        .as_ref()
        .is_some_and(|t| t.cycles.iter().any(|c| c.len() > 1));
    Ok(PointClassification {
        lambda,
        jordan_anomaly: jordan.has_anomaly(),
        first_kind: clusters.iter().any(|c| c.first_kind),
        second_kind: clusters.iter().any(|c| c.second_kind),
        jordan,
        monodromy,
        monodromy_error,
        ramified,
        clusters,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PointSetsReport {
    /// `𝒵`: zeros of `D_P` with multiplicities.
    pub zeros: Vec<ZeroHit>,
    /// `𝒵_J`: points of `𝒵` where `T` is not diagonalizable.
    pub jordan_set: Vec<Complex64>,
    /// `ℛ_Γ`: points of `𝒵` with nontrivial local monodromy.
    pub branch_set: Vec<Complex64>,
    pub points: Vec<PointClassification>,
    pub jordan_subset_of_zeros: bool,
    pub branch_subset_of_zeros: bool,
    /// Observation only: whether `ℛ_Γ ⊆ 𝒵_J` held here.
    pub branch_subset_of_jordan: bool,
    pub any_first_kind: bool,
    pub any_second_kind: bool,
    pub scan: ContourScan,
}

pub fn definition1_sets(
    op: &PeriodicOperator,
    region: &Rect,
    tol: &Tolerances,
) -> Result<PointSetsReport> {
    let scan = discriminant_zeros(op, region, tol)?;
    let family = FloquetFamily {
        op,
        tol: tol.clone(),
    };
    let points: Vec<PointClassification> = scan
        .zeros
        .par_iter()
        .map(|z| classify_point(&family, z.lambda, tol))
        .collect::<Result<_>>()?;
    let jordan_set: Vec<Complex64> = points
        .iter()
        .filter(|p| p.jordan_anomaly)
        .map(|p| p.lambda)
        .collect();
    let branch_set: Vec<Complex64> = points
        .iter()
        .filter(|p| p.ramified)
        .map(|p| p.lambda)
        .collect();
    let zeros = scan.zeros.clone();
    let in_zeros = |l: &Complex64| zeros.iter().any(|z| z.lambda == *l);
    Ok(PointSetsReport {
        jordan_subset_of_zeros: jordan_set.iter().all(in_zeros),
        branch_subset_of_zeros: branch_set.iter().all(in_zeros),
        branch_subset_of_jordan: branch_set.iter().all(|l| jordan_set.contains(l)),
        any_first_kind: points.iter().any(|p| p.first_kind),
        any_second_kind: points.iter().any(|p| p.second_kind),
        zeros,
        jordan_set,
        branch_set,
        points,
        scan,
    })
}
