//! Periodic differential operators `u^(n) + Σ_{k≤n-2} p_k(x) u^(k)`.

pub mod config;
mod trig;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};

pub use config::OperatorConfig;
pub use trig::TrigPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormTag {
    General,
    SymmetricReal,
    Constant,
    Unperturbed,
}

/// Bookkeeping that relates a normalized operator to the problem it came from.
///
/// An eigenvalue `λ` of the normalized operator corresponds to `lambda_sign · λ` for the
/// source, and a multiplier `r` corresponds to `r · exp(multiplier_rate · b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub lambda_sign: f64,
    pub multiplier_rate: Complex64,
}

impl Default for Normalization {
    fn default() -> Self {
        Self {
            lambda_sign: 1.0,
            multiplier_rate: Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOperator {
    order: usize,
    period: f64,
    coeffs: Vec<TrigPolynomial>,
    form: FormTag,
    normalization: Normalization,
}

impl PeriodicOperator {
    /// `coeffs[k]` is `p_k` for `k = 0..=n-2`.
    pub fn new(
        order: usize,
        period: f64,
        coeffs: Vec<TrigPolynomial>,
        form: FormTag,
    ) -> Result<Self> {
        if order < 2 {
            return Err(FloquetError::InvalidOperator(format!(
                "order must be at least 2, got {order}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(FloquetError::InvalidOperator(format!(
                "period must be positive, got {period}"
            )));
        }
        if coeffs.len() != order - 1 {
            return Err(FloquetError::InvalidOperator(format!(
                "expected {} coefficients, got {}",
                order - 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|p| p.period() != period) {
            return Err(FloquetError::InvalidOperator(
                "coefficient periods differ from the operator period".into(),
            ));
        }
        let op = Self {
            order,
            period,
            coeffs,
            form,
            normalization: Normalization::default(),
        };
        op.check_form()?;
        Ok(op)
    }

    fn check_form(&self) -> Result<()> {
        match self.form {
            FormTag::General => Ok(()),
            FormTag::Unperturbed => {
                if self.coeffs.iter().all(TrigPolynomial::is_zero) {
                    Ok(())
                } else {
                    Err(FloquetError::InvalidOperator(
                        "unperturbed form requires all coefficients to vanish".into(),
                    ))
                }
            }
            FormTag::Constant => {
                if self.coeffs.iter().all(TrigPolynomial::is_constant) {
                    Ok(())
                } else {
                    Err(FloquetError::InvalidOperator(
                        "constant form admits only the m = 0 harmonic".into(),
                    ))
                }
            }
            FormTag::SymmetricReal => {
                if self.order % 2 != 0 {
                    return Err(FloquetError::InvalidOperator(
                        "symmetric_real form requires even order".into(),
                    ));
                }
                if self.coeffs.iter().all(|p| p.is_real(1e-12)) {
                    Ok(())
                } else {
                    Err(FloquetError::InvalidOperator(
                        "symmetric_real form requires real coefficients".into(),
                    ))
                }
            }
        }
    }

    pub fn unperturbed(order: usize, period: f64) -> Result<Self> {
        let coeffs = vec![TrigPolynomial::zero(period); order.saturating_sub(1)];
        Self::new(order, period, coeffs, FormTag::Unperturbed)
    }

    /// Constant coefficients `p_k ≡ γ_k`.
    pub fn constant(order: usize, period: f64, gammas: &[Complex64]) -> Result<Self> {
        if gammas.len() != order.saturating_sub(1) {
            return Err(FloquetError::InvalidOperator(format!(
                "expected {} constants, got {}",
                order.saturating_sub(1),
                gammas.len()
            )));
        }
        let coeffs = gammas
            .iter()
            .map(|&g| TrigPolynomial::constant(period, g))
            .collect();
        Self::new(order, period, coeffs, FormTag::Constant)
    }

    /// Hill operator `u'' + p_0 u`.
    pub fn hill(p0: TrigPolynomial) -> Result<Self> {
        let period = p0.period();
        let form = infer_form(2, std::slice::from_ref(&p0));
        Self::new(2, period, vec![p0], form)
    }

    /// Picks the most specific tag the coefficients satisfy.
    pub fn with_inferred_form(
        order: usize,
        period: f64,
        coeffs: Vec<TrigPolynomial>,
    ) -> Result<Self> {
        let form = infer_form(order, &coeffs);
        Self::new(order, period, coeffs, form)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coefficients(&self) -> &[TrigPolynomial] {
        &self.coeffs
    }

    pub fn form(&self) -> FormTag {
        self.form
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn is_unperturbed(&self) -> bool {
        self.coeffs.iter().all(TrigPolynomial::is_zero)
    }

    pub fn max_harmonic(&self) -> i64 {
        self.coeffs
            .iter()
            .map(TrigPolynomial::max_harmonic)
            .max()
            .unwrap_or(0)
    }

    /// Writes `p_k(x)` into `out[k]`.
    pub fn eval_coefficients(&self, x: f64, out: &mut [Complex64]) {
        for (o, p) in out.iter_mut().zip(&self.coeffs) {
            *o = if p.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                p.eval(x)
            };
        }
    }

    /// Coefficientwise homotopy `t·p_k` from the unperturbed operator.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let s = Complex64::new(t, 0.0);
        let coeffs: Vec<_> = self.coeffs.iter().map(|p| p.scale(s)).collect();
        let form = if t == 0.0 {
            FormTag::Unperturbed
        } else {
            self.form
        };
        let mut op = Self::new(self.order, self.period, coeffs, form)?;
        op.normalization = self.normalization;
        Ok(op)
    }
}

fn infer_form(order: usize, coeffs: &[TrigPolynomial]) -> FormTag {
    if coeffs.iter().all(TrigPolynomial::is_zero) {
        FormTag::Unperturbed
    } else if coeffs.iter().all(TrigPolynomial::is_constant) {
        FormTag::Constant
    } else if order % 2 == 0 && coeffs.iter().all(|p| p.is_real(1e-12)) {
        FormTag::SymmetricReal
    } else {
        FormTag::General
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Coefficient description before normalization; may include `p_{n-1}`.
#[derive(Clone, Debug)]
pub struct RawOperator {
    pub order: usize,
    pub period: f64,
    /// `(k, p_k)` pairs with `k ≤ n-1`; repeated `k` are summed.
    pub coefficients: Vec<(usize, TrigPolynomial)>,
    pub form: Option<FormTag>,
}

/// Normalizes a raw operator so that `p_{n-1} ≡ 0`.
///
/// A nonzero `p_{n-1}` is removed with `u = v·exp(w)`, `w' = -p_{n-1}/n`. The new
/// coefficients stay periodic; a nonzero mean of `p_{n-1}` only rescales the multipliers,
/// which is recorded in the operator's [`Normalization`].
pub fn build_operator(raw: &RawOperator) -> Result<PeriodicOperator> {
    let n = raw.order;
    let b = raw.period;
    if n < 2 {
        return Err(FloquetError::InvalidOperator(format!(
            "order must be at least 2, got {n}"
        )));
    }
    if raw.coefficients.is_empty() {
        return Err(FloquetError::InvalidOperator(
            "empty coefficient list".into(),
        ));
    }
    let mut p = vec![TrigPolynomial::zero(b); n + 1];
    for (k, poly) in &raw.coefficients {
        if *k >= n {
            return Err(FloquetError::InvalidOperator(format!(
                "coefficient index {k} out of range for order {n}"
            )));
        }
        if poly.period() != b {
            return Err(FloquetError::InvalidOperator(format!(
                "coefficient p_{k} has period {} but the operator has period {b}",
                poly.period()
            )));
        }
        p[*k] = p[*k].add(poly);
    }
    p[n] = TrigPolynomial::constant(b, Complex64::new(1.0, 0.0));

    let mut normalization = Normalization::default();
    let coeffs: Vec<TrigPolynomial> = if p[n - 1].is_zero() {
        p[..n - 1].to_vec()
    } else {
        let wp = p[n - 1].scale(Complex64::new(-1.0 / n as f64, 0.0));
        normalization.multiplier_rate = -p[n - 1].mean() / n as f64;
        // B_0 = 1, B_{j+1} = B_j' + w' B_j gives (e^w)^{(j)} = e^w B_j.
        let mut bell = vec![TrigPolynomial::constant(b, Complex64::new(1.0, 0.0))];
        for j in 0..n {
            let next = bell[j].derivative(1).add(&wp.mul(&bell[j]));
            bell.push(next);
        }
        (0..n - 1)
            .map(|i| {
                let mut q = TrigPolynomial::zero(b);
                for (k, pk) in p.iter().enumerate().skip(i) {
                    if pk.is_zero() {
                        continue;
                    }
                    let term = pk
                        .mul(&bell[k - i])
                        .scale(Complex64::new(binomial(k, i), 0.0));
                    q = q.add(&term);
                }
                q
            })
            .collect()
    };

    let form = match raw.form {
        Some(f) => f,
        None => infer_form(n, &coeffs),
    };
    let mut op = PeriodicOperator::new(n, b, coeffs, form)?;
    op.normalization = normalization;
    Ok(op)
}

/// Operator with coefficients `p_k(x + ξ)`.
pub fn shift_operator(op: &PeriodicOperator, xi: f64) -> PeriodicOperator {
    let mut out = op.clone();
    out.coeffs = op.coeffs.iter().map(|p| p.shift(xi)).collect();
    out
}

/// Formal adjoint in standard form.
///
/// `L*` has leading coefficient `(-1)^n`; the result is `(-1)^n L*`, whose eigenvalue
/// `λ'` corresponds to `(-1)^n λ'` for `L*`. That sign is folded into the normalization.
pub fn adjoint_operator(op: &PeriodicOperator) -> PeriodicOperator {
    let n = op.order;
    let b = op.period;
    let conj: Vec<TrigPolynomial> = op.coeffs.iter().map(TrigPolynomial::conj).collect();
    let coeffs: Vec<TrigPolynomial> = (0..n - 1)
        .map(|i| {
            let mut q = TrigPolynomial::zero(b);
            for (k, pk) in conj.iter().enumerate().skip(i) {
                if pk.is_zero() {
                    continue;
                }
                let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                let term = pk
                    .derivative((k - i) as u32)
                    .scale(Complex64::new(sign * binomial(k, i), 0.0));
                q = q.add(&term);
            }
            q
        })
        .collect();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    PeriodicOperator {
        order: n,
        period: b,
        form: match op.form {
            FormTag::SymmetricReal => infer_form(n, &coeffs),
            f => f,
        },
        coeffs,
        normalization: Normalization {
            lambda_sign: op.normalization.lambda_sign * sign,
            multiplier_rate: op.normalization.multiplier_rate,
        },
    }
}

/// Real formally self-adjoint form `D^{2ν} + Σ_{k<ν} D^k [a_k D^k]`.
#[derive(Clone, Debug)]
pub struct SymmetricSpec {
    pub half_order: usize,
    pub period: f64,
    pub a_coeffs: Vec<TrigPolynomial>,
}

impl SymmetricSpec {
    /// Leibniz expansion into standard form.
    pub fn expand(&self) -> Result<PeriodicOperator> {
        let nu = self.half_order;
        if nu == 0 {
            return Err(FloquetError::InvalidOperator(
                "half order must be at least 1".into(),
            ));
        }
        if self.a_coeffs.len() != nu {
            return Err(FloquetError::InvalidOperator(format!(
                "expected {nu} coefficients a_0..a_{}, got {}",
                nu - 1,
                self.a_coeffs.len()
            )));
        }
        if self.a_coeffs.iter().any(|a| !a.is_real(1e-12)) {
            return Err(FloquetError::InvalidOperator(
                "symmetric coefficients must be real".into(),
            ));
        }
        let n = 2 * nu;
        let b = self.period;
        let mut p = vec![TrigPolynomial::zero(b); n];
        for (k, a) in self.a_coeffs.iter().enumerate() {
            if a.period() != b {
                return Err(FloquetError::InvalidOperator("mismatched periods".into()));
            }
            for i in 0..=k {
                let term = a
                    .derivative((k - i) as u32)
                    .scale(Complex64::new(binomial(k, i), 0.0));
                p[k + i] = p[k + i].add(&term);
            }
        }
        debug_assert!(p[n - 1].is_zero());
        p.truncate(n - 1);
        PeriodicOperator::new(n, b, p, FormTag::SymmetricReal)
    }
}
