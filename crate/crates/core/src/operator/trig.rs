use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FloquetError, Result};

/// Finite Fourier series `Σ c_m exp(2πi m x / b)` with period `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    period: f64,
    terms: BTreeMap<i64, Complex64>,
}

impl TrigPolynomial {
    pub fn new<I>(period: f64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        if !(period.is_finite() && period > 0.0) {
            return Err(FloquetError::InvalidOperator(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(FloquetError::InvalidOperator(format!(
                    "non-finite amplitude for harmonic {m}"
                )));
            }
            *map.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self::from_map(period, map))
    }

    fn from_map(period: f64, mut terms: BTreeMap<i64, Complex64>) -> Self {
        terms.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        Self { period, terms }
    }

    pub fn zero(period: f64) -> Self {
        Self {
            period,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(period: f64, c: Complex64) -> Self {
        Self::from_map(period, BTreeMap::from([(0, c)]))
    }

    /// `amp · cos(2π m x / b)`.
    pub fn cosine(period: f64, m: i64, amp: f64) -> Self {
        let half = Complex64::new(0.5 * amp, 0.0);
        if m == 0 {
            return Self::constant(period, Complex64::new(amp, 0.0));
        }
        Self::from_map(period, BTreeMap::from([(m, half), (-m, half)]))
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn terms(&self) -> &BTreeMap<i64, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, m: i64) -> Complex64 {
        self.terms.get(&m).copied().unwrap_or_default()
    }

    pub fn mean(&self) -> Complex64 {
        self.coefficient(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&m| m == 0)
    }

    pub fn max_harmonic(&self) -> i64 {
        self.terms.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// Evaluates at `x`; the argument is reduced modulo the period first.
    pub fn eval(&self, x: f64) -> Complex64 {
        let xr = x.rem_euclid(self.period);
        let theta = 2.0 * PI * xr / self.period;
        self.terms
            .iter()
            .map(|(&m, &c)| c * Complex64::from_polar(1.0, theta * m as f64))
            .sum()
    }

    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let w = 2.0 * PI / self.period;
        let terms = self
            .terms
            .iter()
            .map(|(&m, &c)| (m, c * Complex64::new(0.0, w * m as f64).powu(order)))
            .collect();
        Self::from_map(self.period, terms)
    }

    /// Coefficients of `x ↦ p(x + ξ)`.
    pub fn shift(&self, xi: f64) -> Self {
        let xr = xi.rem_euclid(self.period);
        if xr == 0.0 {
            return self.clone();
        }
        let theta = 2.0 * PI * xr / self.period;
        let terms = self
            .terms
            .iter()
            .map(|(&m, &c)| (m, c * Complex64::from_polar(1.0, theta * m as f64)))
            .collect();
        Self::from_map(self.period, terms)
    }

    /// Pointwise complex conjugate: harmonic `m` receives `conj(c_{-m})`.
    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|(&m, &c)| (-m, c.conj())).collect();
        Self::from_map(self.period, terms)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let terms = self.terms.iter().map(|(&m, &c)| (m, c * s)).collect();
        Self::from_map(self.period, terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.period, other.period);
        let mut terms = self.terms.clone();
        for (&m, &c) in &other.terms {
            *terms.entry(m).or_default() += c;
        }
        Self::from_map(self.period, terms)
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.period, other.period);
        let mut terms: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&m1, &c1) in &self.terms {
            for (&m2, &c2) in &other.terms {
                *terms.entry(m1 + m2).or_default() += c1 * c2;
            }
        }
        Self::from_map(self.period, terms)
    }

    /// True when the sampled values are real to `tol` (relative to the amplitude sum).
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.terms.values().map(|c| c.norm()).sum::<f64>().max(1.0);
        (0..64).all(|i| {
            let x = self.period * i as f64 / 64.0;
            self.eval(x).im.abs() <= tol * scale
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cosine_evaluates() {
        let p = TrigPolynomial::cosine(1.0, 1, 2.0);
        assert!((p.eval(0.0) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((p.eval(0.5) - c(-2.0, 0.0)).norm() < 1e-15);
        assert!((p.eval(0.25)).norm() < 1e-15);
    }

    #[test]
    fn periodic_evaluation() {
        let p = TrigPolynomial::new(
            2.5,
            [(1, c(0.3, -0.1)), (-3, c(1.0, 2.0)), (0, c(0.5, 0.0))],
        )
        .unwrap();
        for &x in &[0.0, 0.1, 1.7, -3.2, 11.9] {
            let a = p.eval(x);
            let b = p.eval(x + 2.5);
            assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = TrigPolynomial::new(1.0, [(2, c(0.3, 0.2)), (-1, c(-0.4, 0.1))]).unwrap();
        let d = p.derivative(1);
        let h = 1e-5;
        let x = 0.37;
        let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
        assert!((fd - d.eval(x)).norm() < 1e-7);
    }

    #[test]
    fn conj_is_pointwise() {
        let p = TrigPolynomial::new(1.0, [(1, c(0.0, 0.5)), (-1, c(0.0, 0.5))]).unwrap();
        let q = p.conj();
        assert_eq!(q.coefficient(1), c(0.0, -0.5));
        for &x in &[0.0, 0.2, 0.9] {
            assert!((q.eval(x) - p.eval(x).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn product_is_pointwise() {
        let p = TrigPolynomial::new(1.0, [(1, c(0.3, 0.2)), (0, c(1.0, 0.0))]).unwrap();
        let q = TrigPolynomial::new(1.0, [(-2, c(0.1, -0.7)), (3, c(0.2, 0.0))]).unwrap();
        let pq = p.mul(&q);
        for &x in &[0.0, 0.13, 0.77] {
            assert!((pq.eval(x) - p.eval(x) * q.eval(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_period() {
        assert!(TrigPolynomial::new(0.0, []).is_err());
        assert!(TrigPolynomial::new(f64::NAN, []).is_err());
    }
}
