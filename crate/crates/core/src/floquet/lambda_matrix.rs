use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::PeriodicOperator;
use crate::poly;

use super::floquet_record;
use super::jordan::{jordan_profile_of, profile_from_record, JordanProfile};

/// A matrix-valued function of λ whose eigenvalues are continued along paths.
pub trait LambdaMatrix: Sync {
    fn dim(&self) -> usize;

    fn matrix(&self, lambda: Complex64) -> Result<CMatrix>;

    fn eigenvalues(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        linalg::eigenvalues(&self.matrix(lambda)?)
    }

    fn jordan(&self, lambda: Complex64, tol: &Tolerances) -> Result<JordanProfile> {
        let m = self.matrix(lambda)?;
        let ev = self.eigenvalues(lambda)?;
        let mut p = jordan_profile_of(&m, &ev, tol)?;
        p.lambda = lambda;
        Ok(p)
    }
}

/// `λ ↦ T(λ)` for a periodic operator.
pub struct FloquetFamily<'a> {
    pub op: &'a PeriodicOperator,
    pub tol: Tolerances,
}

impl LambdaMatrix for FloquetFamily<'_> {
    fn dim(&self) -> usize {
        self.op.order()
    }

    fn matrix(&self, lambda: Complex64) -> Result<CMatrix> {
        Ok(floquet_record(self.op, lambda, &self.tol)?.matrix())
    }

    fn eigenvalues(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        Ok(floquet_record(self.op, lambda, &self.tol)?.multipliers)
    }

    fn jordan(&self, lambda: Complex64, tol: &Tolerances) -> Result<JordanProfile> {
        profile_from_record(&floquet_record(self.op, lambda, &self.tol)?, tol)
    }
}

/// Square matrix with polynomial entries, row-major, coefficients ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialLambdaMatrix {
    dim: usize,
    entries: Vec<Vec<Complex64>>,
}

impl PolynomialLambdaMatrix {
    pub fn new(dim: usize, entries: Vec<Vec<Complex64>>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(FloquetError::InvalidArgument(format!(
                "expected {} polynomial entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    /// Entries given by real ascending coefficients.
    pub fn from_real(dim: usize, entries: &[&[f64]]) -> Result<Self> {
        Self::new(
            dim,
            entries
                .iter()
                .map(|e| e.iter().map(|&c| Complex64::new(c, 0.0)).collect())
                .collect(),
        )
    }

    /// Characteristic polynomial coefficients of the 2×2 case as polynomials in λ:
    /// `det(rI − N) = r² − tr N · r + det N`.
    pub fn trace_det_2x2(&self) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        if self.dim != 2 {
            return None;
        }
        let add = |a: &[Complex64], b: &[Complex64], sign: f64| {
            let mut out = vec![Complex64::new(0.0, 0.0); a.len().max(b.len())];
            for (i, c) in a.iter().enumerate() {
                out[i] += c;
            }
            for (i, c) in b.iter().enumerate() {
                out[i] += c * sign;
            }
            out
        };
        let mul = |a: &[Complex64], b: &[Complex64]| {
            let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let e = &self.entries;
        let tr = add(&e[0], &e[3], 1.0);
        let det = add(&mul(&e[0], &e[3]), &mul(&e[1], &e[2]), -1.0);
        Some((tr, det))
    }
}

impl LambdaMatrix for PolynomialLambdaMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn matrix(&self, lambda: Complex64) -> Result<CMatrix> {
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            poly::eval(&self.entries[i * self.dim + j], lambda)
        }))
    }
}
