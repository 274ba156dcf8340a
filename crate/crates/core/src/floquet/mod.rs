//! Floquet matrix, multipliers, Jordan structure and multiplier monodromy.

mod chains;
mod jordan;
mod lambda_matrix;
mod monodromy;
mod normalized;
mod palindrome;

pub use chains::{chain_residual, floquet_chains, floquet_chains_of, FloquetSolutionChain};
pub use jordan::{jordan_profile, jordan_profile_of, JordanProfile, MultiplierCluster};
pub use lambda_matrix::{FloquetFamily, LambdaMatrix, PolynomialLambdaMatrix};
pub use monodromy::{
    cycle_type, monodromy_around, monodromy_permutation, track_eigenvalues, MonodromyTrace,
};
pub use normalized::{normalized_floquet, NormalizedFloquet};
pub use palindrome::{
    default_palindrome_grid, is_formally_self_adjoint, palindrome_check, PalindromeReport,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Result;
use crate::linalg::{self, CMatrix};
use crate::ode::{dominant_growth_rate, propagate, OdeOptions};
use crate::operator::PeriodicOperator;
use crate::oracle::principal_root;
use crate::poly;

/// Growth exponents beyond this are integrated with a growth shift.
const SHIFT_THRESHOLD: f64 = 30.0;

#[derive(Clone, Debug, Serialize)]
pub struct FloquetRecord {
    pub lambda: Complex64,
    /// `T = e^{log_scale} · t`.
    pub t: CMatrix,
    pub log_scale: f64,
    /// `T⁻¹ = e^{inv_log_scale} · t_inv`, from integrating to `−b`.
    pub t_inv: CMatrix,
    pub inv_log_scale: f64,
    /// Ordered by the paired unperturbed exponent when the pairing is a bijection.
    pub multipliers: Vec<Complex64>,
    pub log_multipliers: Vec<Complex64>,
    /// `pairing[i] = k`: multiplier `i` is nearest to `exp(ρ^k ζ b)`.
    pub pairing: Vec<usize>,
    pub pairing_unique: bool,
    /// Monic, ascending, from the multipliers.
    pub char_coeffs: Vec<Complex64>,
    /// Monic, ascending, from `T` by Hessenberg reduction.
    pub char_coeffs_direct: Vec<Complex64>,
    /// `∏_{j<k} (r_k − r_j)²`.
    pub discriminant: Complex64,
    /// Discriminant of `char_coeffs` through the Sylvester resultant.
    pub discriminant_resultant: Complex64,
    /// Product of the multipliers.
    pub det: Complex64,
    /// `det t` by LU, with `det T = det_direct · e^{n log_scale}`.
    pub det_direct: Complex64,
    /// Hadamard bound of `|det t|`.
    pub det_direct_scale: f64,
    pub est_error: f64,
}

impl FloquetRecord {
    pub fn order(&self) -> usize {
        self.multipliers.len()
    }

    /// `T` itself; entries overflow when `log_scale` is large.
    pub fn matrix(&self) -> CMatrix {
        &self.t * Complex64::new(self.log_scale.exp(), 0.0)
    }

    /// `P(0; λ)`.
    pub fn char_constant(&self) -> Complex64 {
        self.char_coeffs[0]
    }

    /// Relative gap between the pair-product and resultant discriminants.
    pub fn discriminant_mismatch(&self) -> f64 {
        let a = self.discriminant;
        let b = self.discriminant_resultant;
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    /// `∏_{j<k} (|r_k − r_j| / max(|r_j|, |r_k|))²`: scale-free closeness to a double point.
    pub fn normalized_discriminant(&self) -> f64 {
        normalized_discriminant(&self.multipliers)
    }
}

pub(crate) fn normalized_discriminant(r: &[Complex64]) -> f64 {
    let mut d = 1.0;
    for k in 0..r.len() {
        for j in 0..k {
            let m = r[j].norm().max(r[k].norm());
            if m > 0.0 {
                d *= ((r[k] - r[j]).norm() / m).powi(2);
            }
        }
    }
    d
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Nearest unperturbed exponent `ρ^k ζ b` to each `log r`, distances taken modulo `2πi`.
pub fn pair_multipliers(
    order: usize,
    period: f64,
    lambda: Complex64,
    log_multipliers: &[Complex64],
) -> (Vec<usize>, bool) {
    let zeta = principal_root(lambda, order);
    let targets: Vec<Complex64> = (0..order)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64) * zeta * period)
        .collect();
    let pairing: Vec<usize> = log_multipliers
        .iter()
        .map(|lr| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, w) in targets.iter().enumerate() {
                let d = (lr.re - w.re).hypot(wrap_angle(lr.im - w.im));
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            best
        })
        .collect();
    let mut seen = vec![false; order];
    let mut unique = pairing.len() == order;
    for &k in &pairing {
        if seen[k] {
            unique = false;
        }
        seen[k] = true;
    }
    (pairing, unique)
}

/// Characteristic polynomial `det(rI − A)` (monic, ascending) via Hessenberg reduction and
/// the La Budde recursion.
pub fn char_poly_hessenberg(a: &CMatrix) -> Vec<Complex64> {
    let n = a.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if n == 0 {
        return vec![one];
    }
    let h = a.clone().hessenberg().h();
    let mut p: Vec<Vec<Complex64>> = vec![vec![one]];
    for i in 1..=n {
        let prev = &p[i - 1];
        let mut next = vec![zero; i + 1];
        for (d, c) in prev.iter().enumerate() {
            next[d + 1] += *c;
            next[d] -= h[(i - 1, i - 1)] * c;
        }
        let mut sub = one;
        for m in 1..i {
            sub *= h[(i - m, i - m - 1)];
            let coef = h[(i - m - 1, i - 1)] * sub;
            for (d, c) in p[i - m - 1].iter().enumerate() {
                next[d] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().expect("nonempty")
}

fn frob(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Combines eigenvalues of `t` (scale `s`) and of `t_inv` (scale `s_inv`) into log multipliers,
/// keeping for each pair the estimate with the smaller first-order error bound.
fn two_sided_log_multipliers(
    t: &CMatrix,
    s: f64,
    t_inv: &CMatrix,
    s_inv: f64,
) -> Result<Vec<Complex64>> {
    let n = t.nrows();
    // An eigenvalue lost to rounding comes out as 0; its partner from the other side is used.
    let safe_ln = |z: Complex64| {
        if z.norm() > 0.0 {
            z.ln()
        } else {
            Complex64::new(-745.0, 0.0)
        }
    };
    let fwd: Vec<Complex64> = linalg::eigenvalues(t)?
        .into_iter()
        .map(|e| safe_ln(e) + s)
        .collect();
    let bwd: Vec<Complex64> = linalg::eigenvalues(t_inv)?
        .into_iter()
        .map(|f| -(safe_ln(f) + s_inv))
        .collect();
    let log_nt = frob(t).ln() + s;
    let log_ninv = frob(t_inv).ln() + s_inv;
    // Log of the first-order relative error bound of each estimate (up to the unit roundoff).
    let bf: Vec<f64> = fwd.iter().map(|z| log_nt - z.re).collect();
    let bb: Vec<f64> = bwd.iter().map(|z| log_ninv + z.re).collect();
    let eps = f64::EPSILON;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, a) in fwd.iter().enumerate() {
        for (j, b) in bwd.iter().enumerate() {
            pairs.push(((a.re - b.re).hypot(wrap_angle(a.im - b.im)), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_f = vec![false; n];
    let mut used_b = vec![false; n];
    let mut out = Vec::with_capacity(n);
    // Estimates that agree within their error bars describe the same multiplier.
    for &(d, i, j) in &pairs {
        if used_f[i] || used_b[j] {
            continue;
        }
        // Two rounding-dominated estimates can sit close together by accident.
        if 100.0 * eps * bf[i].min(bb[j]).min(700.0).exp() > 1e-6 {
            continue;
        }
        let allowed = 1e-6 + 100.0 * eps * (bf[i].min(700.0).exp() + bb[j].min(700.0).exp());
        if d > allowed.sqrt().max(1e-6) {
            continue;
        }
        used_f[i] = true;
        used_b[j] = true;
        out.push(if bf[i] <= bb[j] { fwd[i] } else { bwd[j] });
    }
    // The rest is accurate on at most one side: keep the best-conditioned half.
    let mut rest: Vec<(f64, Complex64)> = (0..n)
        .filter(|&i| !used_f[i])
        .map(|i| (bf[i], fwd[i]))
        .chain((0..n).filter(|&j| !used_b[j]).map(|j| (bb[j], bwd[j])))
        .collect();
    rest.sort_by(|x, y| x.0.total_cmp(&y.0));
    let missing = n - out.len();
    out.extend(rest.into_iter().take(missing).map(|(_, z)| z));
    Ok(out)
}

fn shifted_options(tol: &Tolerances, rate: f64, period: f64) -> OdeOptions {
    let opts = OdeOptions::from_tolerances(tol);
    if rate * period > SHIFT_THRESHOLD {
        opts.with_growth_shift(rate)
    } else {
        opts
    }
}

/// `T` scaled by its log growth, from a forward pass only.
pub fn floquet_matrix(
    op: &PeriodicOperator,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<(CMatrix, f64, f64)> {
    let n = op.order();
    let b = op.period();
    let opts = shifted_options(tol, dominant_growth_rate(n, lambda), b);
    let p = propagate(op, lambda, 0.0, &CMatrix::identity(n, n), &[b], &opts)?;
    Ok((p.states[0].clone(), p.log_scales[0], p.est_error))
}

pub fn floquet_record(
    op: &PeriodicOperator,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<FloquetRecord> {
    tol.validate()?;
    let n = op.order();
    let b = op.period();
    let id = CMatrix::identity(n, n);
    let fwd_opts = shifted_options(tol, dominant_growth_rate(n, lambda), b);
    let bwd_opts = shifted_options(
        tol,
        dominant_growth_rate(n, lambda * if n % 2 == 0 { 1.0 } else { -1.0 }),
        b,
    );
    // Backward growth is governed by −ρ^l ζ, the roots of (−1)^n λ.
    let bwd_opts = OdeOptions {
        growth_shift: -bwd_opts.growth_shift,
        ..bwd_opts
    };
    let fwd = propagate(op, lambda, 0.0, &id, &[b], &fwd_opts)?;
    let bwd = propagate(op, lambda, 0.0, &id, &[-b], &bwd_opts)?;
    let t = fwd.states[0].clone();
    let s = fwd.log_scales[0];
    let t_inv = bwd.states[0].clone();
    let s_inv = bwd.log_scales[0];

    let logs = two_sided_log_multipliers(&t, s, &t_inv, s_inv)?;
    let (pairing, unique) = pair_multipliers(n, b, lambda, &logs);
    let (logs, pairing) = if unique {
        let mut ordered = vec![Complex64::new(0.0, 0.0); n];
        for (i, &k) in pairing.iter().enumerate() {
            ordered[k] = logs[i];
        }
        (ordered, (0..n).collect())
    } else {
        (logs, pairing)
    };
    let multipliers: Vec<Complex64> = logs.iter().map(|l| l.exp()).collect();
    let char_coeffs = poly::from_roots(&multipliers);
    let discriminant = poly::discriminant_from_roots(&multipliers);
    let discriminant_resultant = poly::discriminant(&char_coeffs);
    let det = logs.iter().sum::<Complex64>().exp();

    let mut direct = char_poly_hessenberg(&t);
    for (k, c) in direct.iter_mut().enumerate() {
        *c *= ((n - k) as f64 * s).exp();
    }
    let det_direct = linalg::determinant(&t);
    let det_direct_scale = t.column_iter().map(|c| c.norm()).product();

    Ok(FloquetRecord {
        lambda,
        t,
        log_scale: s,
        t_inv,
        inv_log_scale: s_inv,
        multipliers,
        log_multipliers: logs,
        pairing,
        pairing_unique: unique,
        char_coeffs,
        char_coeffs_direct: direct,
        discriminant,
        discriminant_resultant,
        det,
        det_direct,
        det_direct_scale,
        est_error: fwd.est_error.max(bwd.est_error),
    })
}

/// Records over a set of λ values in parallel.
pub fn floquet_records(
    op: &PeriodicOperator,
    lambdas: &[Complex64],
    tol: &Tolerances,
) -> Vec<Result<FloquetRecord>> {
    use rayon::prelude::*;
    lambdas
        .par_iter()
        .map(|&l| floquet_record(op, l, tol))
        .collect()
}
