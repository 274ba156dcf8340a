use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FloquetError, Result};
use crate::linalg::{self, CMatrix};

#[derive(Clone, Debug, Serialize)]
pub struct GershgorinDisk {
    pub center: Complex64,
    pub radius: f64,
    pub isolated: bool,
    /// Eigenvalues inside this disk (meaningful when isolated).
    pub eigenvalue_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GershgorinReport {
    pub disks: Vec<GershgorinDisk>,
    pub eigenvalues: Vec<Complex64>,
    /// Every eigenvalue lies in the union of the disks.
    pub contained: bool,
    /// Every isolated disk holds exactly one eigenvalue.
    pub isolation_consistent: bool,
}

/// Row disks `|r − a_jj| ≤ Σ_{k≠j} |a_jk|`, checked against a direct eigensolve.
pub fn gershgorin_disks(a: &CMatrix) -> Result<GershgorinReport> {
    if a.nrows() != a.ncols() {
        return Err(FloquetError::InvalidArgument(
            "Gershgorin disks need a square matrix".into(),
        ));
    }
    let n = a.nrows();
    let mut disks: Vec<GershgorinDisk> = (0..n)
        .map(|j| GershgorinDisk {
            center: a[(j, j)],
            radius: (0..n).filter(|&k| k != j).map(|k| a[(j, k)].norm()).sum(),
            isolated: true,
            eigenvalue_count: 0,
        })
        .collect();
    for j in 0..n {
        for k in 0..n {
            if j != k
                && (disks[j].center - disks[k].center).norm() <= disks[j].radius + disks[k].radius
            {
                disks[j].isolated = false;
            }
        }
    }
    let ev = linalg::eigenvalues(a)?;
    let scale = linalg::max_abs(a).max(1e-300);
    // Eigensolver error allowance on the containment test.
    let slack = 1e-12 * scale * n as f64;
    let inside = |d: &GershgorinDisk, z: &Complex64| (z - d.center).norm() <= d.radius + slack;
    for d in &mut disks {
        d.eigenvalue_count = ev.iter().filter(|z| inside(d, z)).count();
    }
    let contained = ev.iter().all(|z| disks.iter().any(|d| inside(d, z)));
    let isolation_consistent = disks
        .iter()
        .filter(|d| d.isolated)
        .all(|d| d.eigenvalue_count == 1);
    Ok(GershgorinReport {
        disks,
        eigenvalues: ev,
        contained,
        isolation_consistent,
    })
}
