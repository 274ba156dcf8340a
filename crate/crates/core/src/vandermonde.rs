//! Confluent (generalized) Vandermonde determinants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::linalg::{self, CMatrix};

/// Nodes with their block sizes; `A` is the sum of the sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfluentSpec {
    pub nodes: Vec<Complex64>,
    pub sizes: Vec<usize>,
}

impl ConfluentSpec {
    pub fn new(nodes: Vec<Complex64>, sizes: Vec<usize>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != sizes.len() {
            return Err(FloquetError::InvalidArgument(format!(
                "{} nodes with {} block sizes",
                nodes.len(),
                sizes.len()
            )));
        }
        if sizes.iter().any(|&a| a == 0) {
            return Err(FloquetError::InvalidArgument(
                "block sizes must be positive".into(),
            ));
        }
        Ok(Self { nodes, sizes })
    }

    pub fn order(&self) -> usize {
        self.sizes.iter().sum()
    }
}

fn binomial(a: usize, b: usize) -> f64 {
    if b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
}

/// The `A x alpha` block with entries `C(j-1, k-1) x^(j-k)`.
pub fn block(x: Complex64, rows: usize, alpha: usize) -> Result<CMatrix> {
    if alpha == 0 || rows < alpha {
        return Err(FloquetError::InvalidArgument(format!(
            "block needs A >= alpha >= 1, got A = {rows}, alpha = {alpha}"
        )));
    }
    Ok(CMatrix::from_fn(rows, alpha, |j, k| {
        if j < k {
            Complex64::new(0.0, 0.0)
        } else {
            x.powu((j - k) as u32) * binomial(j, k)
        }
    }))
}

/// The blocks of all nodes side by side.
pub fn confluent_matrix(spec: &ConfluentSpec) -> Result<CMatrix> {
    let a = spec.order();
    let mut m = CMatrix::zeros(a, a);
    let mut col = 0;
    for (&x, &alpha) in spec.nodes.iter().zip(&spec.sizes) {
        let b = block(x, a, alpha)?;
        m.view_mut((0, col), (a, alpha)).copy_from(&b);
        col += alpha;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConfluentDet {
    pub direct: Complex64,
    pub product: Complex64,
    /// `|direct - product| / max(|product|, |direct|)`, or 0 when both vanish.
    pub rel_diff: f64,
}

/// Product `prod_{j<k} (x_k - x_j)^(alpha_j alpha_k)`.
pub fn product_formula(spec: &ConfluentSpec) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for k in 0..spec.nodes.len() {
        for j in 0..k {
            p *= (spec.nodes[k] - spec.nodes[j]).powu((spec.sizes[j] * spec.sizes[k]) as u32);
        }
    }
    p
}

pub fn confluent_det(spec: &ConfluentSpec) -> Result<ConfluentDet> {
    let direct = linalg::determinant(&confluent_matrix(spec)?);
    let product = product_formula(spec);
    let scale = direct.norm().max(product.norm());
    let rel_diff = if scale == 0.0 {
        0.0
    } else {
        (direct - product).norm() / scale
    };
    Ok(ConfluentDet {
        direct,
        product,
        rel_diff,
    })
}
