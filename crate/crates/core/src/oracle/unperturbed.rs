use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FloquetError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct UnperturbedContext {
    pub order: usize,
    pub period: f64,
    pub rho: Complex64,
}

impl UnperturbedContext {
    pub fn new(order: usize, period: f64) -> Result<Self> {
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
        Ok(Self {
            order,
            period,
            rho: Complex64::from_polar(1.0, 2.0 * PI / order as f64),
        })
    }

    /// `ρ^k`, computed directly from the angle.
    pub fn rho_pow(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * (k % self.order) as f64 / self.order as f64)
    }
}

/// n-th root with `0 ≤ arg < 2π/n`.
pub fn principal_root(lambda: Complex64, n: usize) -> Complex64 {
    let r = lambda.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let theta = lambda.arg().rem_euclid(2.0 * PI);
    Complex64::from_polar(r.powf(1.0 / n as f64), theta / n as f64)
}

fn series_derivative(n: usize, x: f64, lambda: Complex64, j: usize, i: usize) -> Complex64 {
    // ũ_j^{(i)}(x) = Σ_k λ^k x^{nk+j−1−i} / (nk+j−1−i)!, terms with negative power dropped.
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k0 = 0;
    while n * k0 + j < 1 + i {
        k0 += 1;
    }
    let p0 = n * k0 + j - 1 - i;
    let mut term = lambda.powu(k0 as u32) * x.powi(p0 as i32);
    for f in 1..=p0 {
        term /= f as f64;
    }
    let mut p = p0;
    for _ in 0..400 {
        sum += term;
        let mut next = term * lambda * x.powi(n as i32);
        for f in 1..=n {
            next /= (p + f) as f64;
        }
        p += n;
        term = next;
        if term.norm() <= 1e-18 * sum.norm() || term.norm() == 0.0 {
            break;
        }
    }
    sum + term
}

fn exp_sum(
    ctx: &UnperturbedContext,
    x: f64,
    zeta: Complex64,
    j: usize,
    i: usize,
    shift: f64,
) -> Complex64 {
    let n = ctx.order;
    let power = i as i32 + 1 - j as i32;
    let mut sum = Complex64::new(0.0, 0.0);
    for l in 0..n {
        let w = ctx.rho_pow(l) * zeta;
        sum += w.powi(power) * (w * x - shift * x).exp();
    }
    sum / n as f64
}

/// `ũ_j^{(i)}(x; λ)` for `1 ≤ j ≤ n`, `0 ≤ i`.
pub fn tilde_fundamental_derivative(
    ctx: &UnperturbedContext,
    x: f64,
    lambda: Complex64,
    j: usize,
    i: usize,
) -> Result<Complex64> {
    let n = ctx.order;
    if j == 0 || j > n {
        return Err(FloquetError::InvalidArgument(format!(
            "index j = {j} outside 1..={n}"
        )));
    }
    let zeta = principal_root(lambda, n);
    let arg = zeta.norm() * x.abs();
    if arg <= 1.0 {
        return Ok(series_derivative(n, x, lambda, j, i));
    }
    if arg > 700.0 {
        return Err(FloquetError::Overflow(arg));
    }
    Ok(exp_sum(ctx, x, zeta, j, i, 0.0))
}

/// `ũ_j(x; λ)`: the unperturbed fundamental solutions.
pub fn tilde_fundamental(
    ctx: &UnperturbedContext,
    x: f64,
    lambda: Complex64,
    j: usize,
) -> Result<Complex64> {
    tilde_fundamental_derivative(ctx, x, lambda, j, 0)
}

/// `e^{−c x} ũ_j^{(i)}(x; λ)`, usable far beyond the overflow limit.
pub fn tilde_fundamental_scaled(
    ctx: &UnperturbedContext,
    x: f64,
    lambda: Complex64,
    j: usize,
    i: usize,
    shift: f64,
) -> Result<Complex64> {
    let n = ctx.order;
    if j == 0 || j > n {
        return Err(FloquetError::InvalidArgument(format!(
            "index j = {j} outside 1..={n}"
        )));
    }
    let zeta = principal_root(lambda, n);
    if zeta.norm() * x.abs() <= 1.0 {
        return Ok(series_derivative(n, x, lambda, j, i) * (-shift * x).exp());
    }
    Ok(exp_sum(ctx, x, zeta, j, i, shift))
}

/// `r̃_j = exp(ρ^{j−1} ζ b)`.
pub fn tilde_multipliers(ctx: &UnperturbedContext, lambda: Complex64) -> Vec<Complex64> {
    let zeta = principal_root(lambda, ctx.order);
    (0..ctx.order)
        .map(|l| (ctx.rho_pow(l) * zeta * ctx.period).exp())
        .collect()
}

/// `λ̃_{m,d} = (−1)^d π^n m^n / (sin(πd/n)^n b^n)`.
pub fn tilde_double_points(ctx: &UnperturbedContext, m: usize, d: usize) -> Result<f64> {
    let n = ctx.order;
    if m == 0 || d == 0 || d >= n {
        return Err(FloquetError::InvalidArgument(format!(
            "need m ≥ 1 and 1 ≤ d ≤ n−1, got m = {m}, d = {d}"
        )));
    }
    let s = (PI * d as f64 / n as f64).sin();
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * (PI * m as f64 / (s * ctx.period)).powi(n as i32))
}

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^{−s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    const B2: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let direct = 10usize;
    let mut sum = 0.0;
    for k in 0..direct {
        sum += (a + k as f64).powf(-s);
    }
    let x = a + direct as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^{−s−2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xpow = x.powf(-s - 1.0);
    for (jj, b) in B2.iter().enumerate() {
        let j = jj + 1;
        sum += b / fact * rising * xpow;
        let k = 2 * j;
        rising *= (s + k as f64 - 1.0) * (s + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
        xpow /= x * x;
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TildeH {
    pub value: Complex64,
    /// Natural log of `value` (any branch); finite even when `value` overflows.
    pub log_value: Complex64,
    /// Analytic correction applied for the factors `m > M`.
    pub tail_factor: Complex64,
    /// `exp(Σ_d |λ/λ̃_{1,d}| ζ(n, M+1)) − 1`: relative size of the neglected tail.
    pub tail_bound: f64,
}

/// Product form `H̃(λ) = b^{n(n−1)/2} ∏_{m≥1} ∏_{d=1}^{n−1} (1 − λ/λ̃_{m,d})`, truncated at `m ≤ M`
/// with the tail restored through Hurwitz zeta sums.
pub fn tilde_h(ctx: &UnperturbedContext, lambda: Complex64, truncation: usize) -> TildeH {
    let n = ctx.order;
    let nf = n as f64;
    let mut log = Complex64::new(ctx.period.ln() * (nf * (nf - 1.0) / 2.0), 0.0);
    let mut zero = false;
    // λ/λ̃_{m,d} = c_d λ / m^n with c_d = 1/λ̃_{1,d}.
    let cds: Vec<f64> = (1..n)
        .map(|d| 1.0 / tilde_double_points(ctx, 1, d).expect("valid index"))
        .collect();
    for m in 1..=truncation {
        let mn = (m as f64).powi(n as i32);
        for &cd in &cds {
            let f = Complex64::new(1.0, 0.0) - lambda * (cd / mn);
            if f.norm() == 0.0 {
                zero = true;
            } else {
                log += f.ln();
            }
        }
    }
    let a = truncation as f64 + 1.0;
    let mut tail_log = Complex64::new(0.0, 0.0);
    let mut bound_sum = 0.0;
    for &cd in &cds {
        let x = lambda * cd;
        bound_sum += x.norm() * hurwitz_zeta(nf, a);
        let mut xk = x;
        for k in 1..=200usize {
            let z = hurwitz_zeta(nf * k as f64, a);
            let term = xk * z / k as f64;
            tail_log -= term;
            if term.norm() < 1e-20 * (1.0 + tail_log.norm()) || z == 0.0 {
                break;
            }
            xk *= x;
        }
    }
    let log_value = log + tail_log;
    TildeH {
        value: if zero {
            Complex64::new(0.0, 0.0)
        } else {
            log_value.exp()
        },
        log_value,
        tail_factor: tail_log.exp(),
        tail_bound: bound_sum.exp_m1(),
    }
}

/// Exponential closed form `∏_{j<k} (e^{ρ^k ζ b} − e^{ρ^j ζ b}) / ((ρ^k − ρ^j) ζ)`, each factor
/// multiplied by `e^{−c b}`.
pub fn tilde_h_closed_scaled(ctx: &UnperturbedContext, lambda: Complex64, shift: f64) -> Complex64 {
    let n = ctx.order;
    let zeta = principal_root(lambda, n);
    let b = ctx.period;
    let mut acc = Complex64::new(1.0, 0.0);
    for k in 0..n {
        for j in 0..k {
            let dk = ctx.rho_pow(k) - ctx.rho_pow(j);
            let w = dk * zeta;
            // (e^{ρ^k ζ b} − e^{ρ^j ζ b}) / (dk ζ) = e^{ρ^j ζ b} · (e^{w b} − 1)/w
            let base = (ctx.rho_pow(j) * zeta * b - shift * b).exp();
            let q = if w.norm() * b < 1e-3 {
                // series for (e^{wb} − 1)/w
                let mut s = Complex64::new(b, 0.0);
                let mut t = Complex64::new(b, 0.0);
                for m in 2..12 {
                    t *= w * b / m as f64;
                    s += t;
                }
                s
            } else {
                ((w * b).exp() - 1.0) / w
            };
            acc *= base * q;
        }
    }
    acc
}

/// Relative residual of `D_P̃ = (−1)^{(n−1)(n−2)/2} n^n λ^{n−1} H̃²` with the left side from the
/// closed-form multipliers and `H̃` from the truncated product.
pub fn tilde_discriminant_identity(
    ctx: &UnperturbedContext,
    lambda: Complex64,
    truncation: usize,
) -> f64 {
    let n = ctx.order;
    let r = tilde_multipliers(ctx, lambda);
    let lhs = crate::poly::discriminant_from_roots(&r);
    let h = tilde_h(ctx, lambda, truncation).value;
    let sign = if ((n - 1) * (n - 2) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let rhs = lambda.powu(n as u32 - 1) * h * h * (sign * (n as f64).powi(n as i32));
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hill_closed_forms() {
        let ctx = UnperturbedContext::new(2, 1.0).unwrap();
        for &lam in &[c(0.3, 0.0), c(4.0, 1.0), c(-9.0, 0.5), c(50.0, -20.0)] {
            let z = lam.sqrt();
            for &x in &[0.2, 0.9, 1.7] {
                let u1 = tilde_fundamental(&ctx, x, lam, 1).unwrap();
                assert!((u1 - (z * x).cosh()).norm() < 1e-12 * (z * x).cosh().norm().max(1.0));
                let u2 = tilde_fundamental(&ctx, x, lam, 2).unwrap();
                assert!((u2 - (z * x).sinh() / z).norm() < 1e-12 * u2.norm().max(1.0));
            }
        }
    }

    #[test]
    fn cubic_series_value() {
        let ctx = UnperturbedContext::new(3, 1.0).unwrap();
        let u = tilde_fundamental(&ctx, 1.0, c(1.0, 0.0), 1).unwrap();
        assert!((u.re - 1.168_058_31).abs() < 1e-8);
    }

    #[test]
    fn series_and_exponential_forms_agree() {
        for n in [2usize, 3, 4, 6] {
            let ctx = UnperturbedContext::new(n, 1.0).unwrap();
            for &lam in &[c(0.7, 0.2), c(-3.0, 1.0), c(20.0, 5.0)] {
                let zeta = principal_root(lam, n);
                for &t in &[0.6, 1.0, 1.8] {
                    let x = t / zeta.norm();
                    for j in 1..=n {
                        let s = series_derivative(n, x, lam, j, 0);
                        let e = exp_sum(&ctx, x, zeta, j, 0, 0.0);
                        assert!(
                            (s - e).norm() <= 1e-12 * s.norm().max(1e-3),
                            "n={n} j={j} t={t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn initial_conditions_are_identity() {
        let ctx = UnperturbedContext::new(4, 1.0).unwrap();
        for j in 1..=4 {
            for i in 0..4 {
                let v = tilde_fundamental_derivative(&ctx, 0.0, c(3.0, -2.0), j, i).unwrap();
                let want = if i + 1 == j { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn overflow_reported() {
        let ctx = UnperturbedContext::new(2, 1.0).unwrap();
        assert!(matches!(
            tilde_fundamental(&ctx, 1.0, c(1e6, 0.0), 1),
            Err(FloquetError::Overflow(_))
        ));
    }

    #[test]
    fn multipliers() {
        let ctx = UnperturbedContext::new(2, 1.0).unwrap();
        for r in tilde_multipliers(&ctx, c(-PI * PI, 0.0)) {
            assert!((r - c(-1.0, 0.0)).norm() < 1e-14);
        }
        let ctx = UnperturbedContext::new(4, 1.0).unwrap();
        let r = tilde_multipliers(&ctx, c(16.0, 0.0));
        let want = [
            c(2.0, 0.0).exp(),
            c(0.0, 2.0).exp(),
            c(-2.0, 0.0).exp(),
            c(0.0, -2.0).exp(),
        ];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).norm() < 1e-14 * b.norm());
        }
        assert!(tilde_multipliers(&ctx, c(0.0, 0.0))
            .iter()
            .all(|&r| r == c(1.0, 0.0)));
    }

    #[test]
    fn double_points() {
        let ctx2 = UnperturbedContext::new(2, 1.0).unwrap();
        assert!((tilde_double_points(&ctx2, 1, 1).unwrap() + PI * PI).abs() < 1e-13);
        let ctx4 = UnperturbedContext::new(4, 1.0).unwrap();
        assert!((tilde_double_points(&ctx4, 1, 2).unwrap() - PI.powi(4)).abs() < 1e-11);
        assert!((tilde_double_points(&ctx4, 1, 1).unwrap() + 4.0 * PI.powi(4)).abs() < 1e-10);
        for n in 2..8 {
            let ctx = UnperturbedContext::new(n, 1.3).unwrap();
            for m in 1..4 {
                for d in 1..n {
                    let a = tilde_double_points(&ctx, m, d).unwrap();
                    let b = tilde_double_points(&ctx, m, n - d).unwrap();
                    let want = if n % 2 == 0 { a } else { -a };
                    assert!((b - want).abs() <= 1e-12 * a.abs());
                }
            }
        }
        assert!(tilde_double_points(&ctx2, 0, 1).is_err());
        assert!(tilde_double_points(&ctx2, 1, 2).is_err());
    }

    #[test]
    fn hurwitz_reference_values() {
        // reference values from an arbitrary-precision evaluation
        assert!((hurwitz_zeta(3.0, 3.0) - 0.077_056_903_159_594_3).abs() < 1e-16);
        assert!((hurwitz_zeta(4.0, 10_001.0) / 3.332_833_366_666_67e-13 - 1.0).abs() < 1e-12);
        assert!((hurwitz_zeta(40.0, 3.0) / 8.225_346_069_033_83e-20 - 1.0).abs() < 1e-12);
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn product_values() {
        let ctx = UnperturbedContext::new(4, 1.0).unwrap();
        assert!((tilde_h(&ctx, c(0.0, 0.0), 10_000).value - c(1.0, 0.0)).norm() < 1e-15);
        let ctx2 = UnperturbedContext::new(2, 1.0).unwrap();
        assert_eq!(tilde_h(&ctx2, c(-PI * PI, 0.0), 100).value, c(0.0, 0.0));
        let ctx3 = UnperturbedContext::new(3, 2.0).unwrap();
        assert!((tilde_h(&ctx3, c(0.0, 0.0), 10).value - c(8.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn product_matches_closed_form() {
        for n in [2usize, 3, 4] {
            let ctx = UnperturbedContext::new(n, 1.0).unwrap();
            for &lam in &[c(1.0, 0.0), c(-30.0, 7.0), c(250.0, -400.0)] {
                let p = tilde_h(&ctx, lam, 10_000).value;
                let e = tilde_h_closed_scaled(&ctx, lam, 0.0);
                assert!(
                    (p - e).norm() < 1e-10 * e.norm(),
                    "n={n} lam={lam}: {p} vs {e}"
                );
            }
        }
    }

    #[test]
    fn discriminant_identity_small_cases() {
        let ctx = UnperturbedContext::new(2, 1.0).unwrap();
        assert!(tilde_discriminant_identity(&ctx, c(1.0, 0.0), 10_000) < 1e-10);
        let t = 2.0 * 1f64.cosh();
        let d = tilde_multipliers(&ctx, c(1.0, 0.0));
        assert!((crate::poly::discriminant_from_roots(&d) - c(t * t - 4.0, 0.0)).norm() < 1e-12);
        let ctx3 = UnperturbedContext::new(3, 1.0).unwrap();
        assert!(tilde_discriminant_identity(&ctx3, c(10.0, 0.0), 10_000) < 1e-8);
    }
}
