//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{FloquetError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenvalues via the complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(FloquetError::EigenSolver);
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or(FloquetError::EigenSolver)?;
    let ev = schur.eigenvalues().ok_or(FloquetError::EigenSolver)?;
    Ok(ev.iter().copied().collect())
}

pub fn determinant(a: &CMatrix) -> Complex64 {
    a.clone().lu().determinant()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Full SVD `a = U diag(s) V*` with `s` in decreasing order.
// nalgebra's complex SVD can return a wrong factorization, so this goes through faer.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Svd {
            u: CMatrix::identity(m, m),
            s: Vec::new(),
            v: CMatrix::identity(n, n),
        });
    }
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(FloquetError::EigenSolver);
    }
    let f = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let d = f.svd().map_err(|_| FloquetError::EigenSolver)?;
    let (fu, fv) = (d.U(), d.V());
    let sv = d.S().column_vector();
    Ok(Svd {
        u: CMatrix::from_fn(m, m, |i, j| fu[(i, j)]),
        s: (0..m.min(n)).map(|i| sv[i].re).collect(),
        v: CMatrix::from_fn(n, n, |i, j| fv[(i, j)]),
    })
}

/// Singular values sorted in decreasing order; empty if the input is not finite.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() || !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Vec::new();
    }
    let f = faer::Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let mut s = f.singular_values().unwrap_or_default();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    pub sigma: Vec<f64>,
    pub threshold: f64,
    /// Smallest kept over largest dropped singular value; infinite if one side is empty.
    pub gap_ratio: f64,
    pub ambiguous: bool,
}

pub fn rank_from_sigma(sigma: &[f64], threshold: f64, min_gap: f64) -> RankDecision {
    let rank = sigma.iter().filter(|&&s| s > threshold).count();
    let gap_ratio = if rank == 0 || rank == sigma.len() || sigma[rank] == 0.0 {
        f64::INFINITY
    } else {
        sigma[rank - 1] / sigma[rank]
    };
    RankDecision {
        rank,
        sigma: sigma.to_vec(),
        threshold,
        gap_ratio,
        ambiguous: gap_ratio < min_gap,
    }
}

/// Rank with threshold `rel_tol · σ_max`.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64, min_gap: f64) -> RankDecision {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    rank_from_sigma(&s, rel_tol * smax, min_gap)
}

/// Scales each row to unit max-norm; zero rows are left alone.
pub fn equilibrate_rows(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for mut row in out.row_iter_mut() {
        let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            row.scale_mut(1.0 / m);
        }
    }
    out
}

/// Orthonormal basis of the right null space, given the rank. Columns are the
/// right singular vectors of the smallest singular values.
pub fn null_space(a: &CMatrix, rank: usize) -> CMatrix {
    let n = a.ncols();
    let padded = if a.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let k = n.saturating_sub(rank);
    match svd(&padded) {
        Ok(d) => d.v.columns(rank.min(n), k).into_owned(),
        Err(_) => CMatrix::zeros(n, 0),
    }
}

/// Orthonormal basis for the column space, dropping directions below `rel_tol · σ_max`.
pub fn orthonormal_basis(a: &CMatrix, rel_tol: f64) -> CMatrix {
    if a.ncols() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let Ok(d) = svd(a) else {
        return CMatrix::zeros(a.nrows(), 0);
    };
    let smax = d.s.first().copied().unwrap_or(0.0);
    let keep = d.s.iter().filter(|&&x| x > rel_tol * smax).count();
    d.u.columns(0, keep).into_owned()
}

/// Sine of the largest principal angle between two column spaces of equal dimension.
pub fn subspace_sine(a: &CMatrix, b: &CMatrix) -> f64 {
    let qa = orthonormal_basis(a, 1e-12);
    let qb = orthonormal_basis(b, 1e-12);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    spectral_norm(&resid).min(1.0)
}

/// Solves `a x = rhs` by LU.
pub fn solve(a: &CMatrix, rhs: &CVector) -> Option<CVector> {
    a.clone().lu().solve(rhs)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_triangular() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(1.0, 0.0),
                c64(2.0, 0.0),
                c64(0.0, 1.0),
                c64(0.0, 0.0),
                c64(-1.0, 0.5),
                c64(3.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(4.0, 0.0),
            ],
        );
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((ev[0] - c64(-1.0, 0.5)).norm() < 1e-13);
        assert!((ev[1] - c64(1.0, 0.0)).norm() < 1e-13);
        assert!((ev[2] - c64(4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn rank_and_null_space() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(1.0, 0.0),
                c64(2.0, 0.0),
                c64(3.0, 0.0),
                c64(2.0, 0.0),
                c64(4.0, 0.0),
                c64(6.0, 0.0),
                c64(0.0, 1.0),
                c64(0.0, 0.0),
                c64(1.0, 0.0),
            ],
        );
        let d = numerical_rank(&a, 1e-8, 10.0);
        assert_eq!(d.rank, 2);
        assert!(!d.ambiguous);
        let ns = null_space(&a, d.rank);
        assert_eq!(ns.ncols(), 1);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn subspace_sine_detects_equal_spans() {
        let a = CMatrix::from_row_slice(
            3,
            2,
            &[
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
            ],
        );
        let b = CMatrix::from_row_slice(
            3,
            2,
            &[
                c64(1.0, 0.0),
                c64(1.0, 0.0),
                c64(1.0, 0.0),
                c64(-1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
            ],
        );
        assert!(subspace_sine(&a, &b) < 1e-14);
        let c = CMatrix::from_row_slice(
            3,
            2,
            &[
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(1.0, 0.0),
            ],
        );
        assert!((subspace_sine(&a, &c) - 1.0).abs() < 1e-14);
    }
}
