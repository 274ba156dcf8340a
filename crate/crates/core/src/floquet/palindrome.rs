use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::operator::{adjoint_operator, PeriodicOperator};

use super::floquet_record;

#[derive(Clone, Debug, Serialize)]
pub struct PalindromeReport {
    pub lambdas: Vec<Complex64>,
    /// `max_l |A_{n−l} − A_l| / max_l |A_l|` at each λ.
    pub violations: Vec<f64>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// 20 points: real parts −8, −3, 2, 7, 12 times imaginary parts −3, −1, 1, 3.
pub fn default_palindrome_grid() -> Vec<Complex64> {
    let mut g = Vec::with_capacity(20);
    for re in [-8.0, -3.0, 2.0, 7.0, 12.0] {
        for im in [-3.0, -1.0, 1.0, 3.0] {
            g.push(Complex64::new(re, im));
        }
    }
    g
}

pub fn palindrome_check(
    op: &PeriodicOperator,
    lambdas: &[Complex64],
    tol: &Tolerances,
) -> Result<PalindromeReport> {
    let n = op.order();
    let real = op.coefficients().iter().all(|c| c.is_real(1e-12));
    if n % 2 != 0 || !real || !is_formally_self_adjoint(op) {
        return Err(FloquetError::InvalidArgument(
            "palindrome check needs an even-order, real, formally self-adjoint operator".into(),
        ));
    }
    let tolerance = 1e-7;
    let mut violations = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let rec = floquet_record(op, lam, tol)?;
        let a = &rec.char_coeffs;
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let worst = (0..=n)
            .map(|l| (a[n - l] - a[l]).norm())
            .fold(0.0, f64::max);
        violations.push(worst / scale);
    }
    let max_violation = violations.iter().copied().fold(0.0, f64::max);
    Ok(PalindromeReport {
        lambdas: lambdas.to_vec(),
        violations,
        max_violation,
        tolerance,
        pass: max_violation <= tolerance,
    })
}

/// Coefficients of the formal adjoint agree with those of `op` to 1e-12 relative to the
/// largest derivative amplitude `|c_m| (2π|m|/b)^k` the adjoint can produce from `p_k`.
pub fn is_formally_self_adjoint(op: &PeriodicOperator) -> bool {
    let adj = adjoint_operator(op);
    if adj.normalization().lambda_sign != 1.0 {
        return false;
    }
    let w = 2.0 * std::f64::consts::PI / op.period();
    let scale = op
        .coefficients()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            p.terms()
                .iter()
                .map(|(&m, c)| c.norm() * (w * m.unsigned_abs() as f64).max(1.0).powi(k as i32))
                .sum::<f64>()
        })
        .fold(1.0, f64::max);
    op.coefficients()
        .iter()
        .zip(adj.coefficients())
        .all(|(a, b)| {
            let d = a.add(&b.scale(Complex64::new(-1.0, 0.0)));
            d.terms().values().all(|c| c.norm() <= 1e-12 * scale)
        })
}
