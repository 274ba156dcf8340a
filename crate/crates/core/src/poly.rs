//! Polynomials with complex coefficients in ascending order `c_0 + c_1 x + …`.

use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::linalg::{self, CMatrix};

pub fn eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        p = next;
    }
    p
}

fn trim(coeffs: &[Complex64]) -> &[Complex64] {
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1] == Complex64::new(0.0, 0.0) {
        len -= 1;
    }
    &coeffs[..len]
}

/// Roots by companion-matrix eigenvalues followed by one Newton polish step.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = trim(coeffs);
    if p.is_empty() {
        return Err(FloquetError::RootFinder("zero polynomial".into()));
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let mut rs = linalg::eigenvalues(&comp)
        .map_err(|_| FloquetError::RootFinder("companion eigenvalues did not converge".into()))?;
    let dp = derivative(p);
    for r in rs.iter_mut() {
        let f = eval(p, *r);
        let d = eval(&dp, *r);
        if d.norm() > 0.0 {
            let cand = *r - f / d;
            if eval(p, cand).norm() < f.norm() {
                *r = cand;
            }
        }
    }
    Ok(rs)
}

/// Determinant of the Sylvester matrix of `p` and `q`.
pub fn resultant(p: &[Complex64], q: &[Complex64]) -> Complex64 {
    let p = trim(p);
    let q = trim(q);
    let m = p.len().saturating_sub(1);
    let n = q.len().saturating_sub(1);
    let size = m + n;
    if size == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut s = CMatrix::zeros(size, size);
    for row in 0..n {
        for (k, &c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..m {
        for (k, &c) in q.iter().rev().enumerate() {
            s[(n + row, row + k)] = c;
        }
    }
    linalg::determinant(&s)
}

/// `∏_{j<k} (r_k − r_j)^2` for a monic polynomial, via `(−1)^{n(n−1)/2} Res(P, P')`.
pub fn discriminant(p: &[Complex64]) -> Complex64 {
    let p = trim(p);
    let n = p.len().saturating_sub(1);
    let lead = p[n];
    let res = resultant(p, &derivative(p));
    let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    res * sign / lead.powu((2 * n).saturating_sub(1) as u32)
}

/// Pair-product discriminant `∏_{j<k} (r_k − r_j)^2`.
pub fn discriminant_from_roots(roots: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for k in 0..roots.len() {
        for j in 0..k {
            let d = roots[k] - roots[j];
            acc *= d * d;
        }
    }
    acc
}

/// Monic polynomial whose roots have the given power sums `s_1..s_m` (Newton identities).
pub fn from_power_sums(s: &[Complex64]) -> Vec<Complex64> {
    let m = s.len();
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=m {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let term = e[k - i] * s[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / k as f64);
    }
    // x^m − e1 x^{m−1} + e2 x^{m−2} − …
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
    for (k, ek) in e.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[m - k] = ek * sign;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_product() {
        let rs = [c(1.0, 0.0), c(-2.0, 0.5), c(0.3, -1.0)];
        let p = from_roots(&rs);
        let mut found = roots(&p).unwrap();
        for r in rs {
            let (idx, d) = found
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - r).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-12);
            found.remove(idx);
        }
    }

    #[test]
    fn resultant_discriminant_matches_pair_product() {
        let rs = [c(1.0, 0.2), c(-0.5, 0.5), c(0.3, -1.0), c(2.0, 0.0)];
        let p = from_roots(&rs);
        let d1 = discriminant(&p);
        let d2 = discriminant_from_roots(&rs);
        assert!((d1 - d2).norm() < 1e-10 * d2.norm());
    }

    #[test]
    fn quadratic_discriminant() {
        // r^2 - t r + 1 has discriminant t^2 - 4.
        let t = c(3.0, 1.0);
        let p = [c(1.0, 0.0), -t, c(1.0, 0.0)];
        assert!((discriminant(&p) - (t * t - 4.0)).norm() < 1e-13);
    }

    #[test]
    fn power_sums_recover_roots() {
        let rs = [c(0.1, 0.2), c(-0.3, 0.05), c(0.2, -0.1)];
        let s: Vec<Complex64> = (1..=3)
            .map(|k| rs.iter().map(|r| r.powu(k)).sum())
            .collect();
        let p = from_power_sums(&s);
        let q = from_roots(&rs);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
