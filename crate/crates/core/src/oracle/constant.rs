use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::poly;

/// `u^{(n)} + Σ_{k≤n−2} γ_k u^{(k)}` with constant `γ_k` on period `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstCoeffContext {
    pub order: usize,
    pub period: f64,
    pub gammas: Vec<Complex64>,
}

impl ConstCoeffContext {
    pub fn new(order: usize, period: f64, gammas: Vec<Complex64>) -> Result<Self> {
        if order < 2 {
            return Err(FloquetError::InvalidArgument(format!(
                "order must be at least 2, got {order}"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(FloquetError::InvalidArgument(format!(
                "period must be positive, got {period}"
            )));
        }
        if gammas.len() > order - 1 {
            return Err(FloquetError::InvalidArgument(format!(
                "at most n−1 = {} coefficients allowed, got {}",
                order - 1,
                gammas.len()
            )));
        }
        Ok(Self {
            order,
            period,
            gammas,
        })
    }
}

/// Roots `w` of `w^n + Σ γ_k w^k − λ`.
pub fn const_coeff_exponents(ctx: &ConstCoeffContext, lambda: Complex64) -> Result<Vec<Complex64>> {
    let mut c = vec![Complex64::new(0.0, 0.0); ctx.order + 1];
    for (k, g) in ctx.gammas.iter().enumerate() {
        c[k] = *g;
    }
    c[0] -= lambda;
    c[ctx.order] = Complex64::new(1.0, 0.0);
    poly::roots(&c)
}

/// Multipliers `e^{w b}`.
pub fn const_coeff_multipliers(
    ctx: &ConstCoeffContext,
    lambda: Complex64,
) -> Result<Vec<Complex64>> {
    Ok(const_coeff_exponents(ctx, lambda)?
        .into_iter()
        .map(|w| (w * ctx.period).exp())
        .collect())
}

/// Lower edge of the real spectrum of `(−1)^ν Σ_k (−1)^k D^k[α_k D^k]`-type constant operators:
/// the minimum over `η ≤ 0` of `q(η) = (−1)^ν η^ν + Σ_{k<ν} α_k η^k`.
pub fn const_coeff_spectrum_edge(nu: usize, alphas: &[f64]) -> Result<f64> {
    if nu == 0 {
        return Err(FloquetError::InvalidArgument("ν must be at least 1".into()));
    }
    if alphas.len() > nu {
        return Err(FloquetError::InvalidArgument(format!(
            "expected at most ν = {nu} coefficients, got {}",
            alphas.len()
        )));
    }
    let mut q = vec![0.0; nu + 1];
    q[..alphas.len()].copy_from_slice(alphas);
    q[nu] = if nu % 2 == 0 { 1.0 } else { -1.0 };
    let eval = |x: f64| q.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let dq: Vec<f64> = (1..=nu).map(|k| k as f64 * q[k]).collect();
    let deval = |x: f64| dq.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let mut candidates = vec![0.0];
    if dq.len() > 1 {
        let dqc: Vec<Complex64> = dq.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for r in poly::roots(&dqc)? {
            let scale = 1.0 + r.norm();
            if r.im.abs() > 1e-7 * scale {
                continue;
            }
            let mut x = r.re;
            // Newton polish of the critical point in real arithmetic.
            let ddq: Vec<f64> = (1..dq.len()).map(|k| k as f64 * dq[k]).collect();
            for _ in 0..5 {
                let d2 = ddq.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                if d2 == 0.0 {
                    break;
                }
                let step = deval(x) / d2;
                x -= step;
                if step.abs() <= 1e-16 * scale {
                    break;
                }
            }
            if x <= 0.0 {
                candidates.push(x);
            }
        }
    }
    Ok(candidates
        .into_iter()
        .map(eval)
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pure_power_matches_unperturbed() {
        use crate::oracle::{tilde_multipliers, UnperturbedContext};
        let ctx = ConstCoeffContext::new(3, 1.0, vec![]).unwrap();
        let u = UnperturbedContext::new(3, 1.0).unwrap();
        let lam = Complex64::new(8.0, 3.0);
        let mut a = const_coeff_multipliers(&ctx, lam).unwrap();
        let mut b = tilde_multipliers(&u, lam);
        let key = |z: &Complex64| (z.re * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12 * y.norm());
        }
    }

    #[test]
    fn product_of_multipliers_is_one() {
        let ctx = ConstCoeffContext::new(4, 2.0, vec![c(0.5), c(-1.0), c(2.0)]).unwrap();
        let p: Complex64 = const_coeff_multipliers(&ctx, Complex64::new(3.0, 1.0))
            .unwrap()
            .iter()
            .product();
        assert!((p - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn spectrum_edges() {
        assert_eq!(const_coeff_spectrum_edge(2, &[0.0, 2.0]).unwrap(), -1.0);
        assert_eq!(const_coeff_spectrum_edge(1, &[3.0]).unwrap(), 3.0);
        assert_eq!(const_coeff_spectrum_edge(2, &[0.0, -2.0]).unwrap(), 0.0);
        // q = −η³ + 3η: minimum on η ≤ 0 at η = −1 gives −2.
        assert!((const_coeff_spectrum_edge(3, &[0.0, 3.0]).unwrap() + 2.0).abs() < 1e-14);
        assert!(const_coeff_spectrum_edge(0, &[]).is_err());
    }

    #[test]
    fn validation() {
        assert!(ConstCoeffContext::new(2, 1.0, vec![c(1.0), c(1.0)]).is_err());
        assert!(ConstCoeffContext::new(1, 1.0, vec![]).is_err());
        assert!(ConstCoeffContext::new(3, -1.0, vec![]).is_err());
    }
}
