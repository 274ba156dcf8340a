use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FloquetError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundBranch {
    /// `|Re z| ≥ σ`: the rigorous bound `1 − e^{−σ}`.
    RealPart,
    /// `|Re z| < σ`: principal term of the large-`|z|` estimate only.
    Oscillatory,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpGapBound {
    pub bound: f64,
    pub branch: BoundBranch,
    /// Set on the oscillatory branch: the `O(1/|z|)` remainder is not controlled.
    pub uncontrolled_remainder: bool,
}

/// Lower bound on `|e^z − 1|`.
pub fn lemma_a1_bound(z: Complex64, sigma: f64) -> Result<ExpGapBound> {
    if !(sigma > 0.0) {
        return Err(FloquetError::InvalidArgument("σ must be positive".into()));
    }
    if z.re.abs() >= sigma {
        return Ok(ExpGapBound {
            bound: -(-sigma).exp_m1(),
            branch: BoundBranch::RealPart,
            uncontrolled_remainder: false,
        });
    }
    let r = z.norm();
    // R ∈ ⋃ (2πm − π/2, 2πm + π/2) exactly when cos R > 0.
    let bound = if r.cos() > 0.0 { r.sin().abs() } else { 1.0 };
    Ok(ExpGapBound {
        bound,
        branch: BoundBranch::Oscillatory,
        uncontrolled_remainder: true,
    })
}

fn boundary_min(delta: f64, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let z = Complex64::from_polar(delta, 2.0 * PI * i as f64 / samples as f64);
            (z.exp() - 1.0).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest `δ` (to bisection resolution) with `min_{|z|=δ} |e^z − 1| ≥ β`, on 360 boundary samples.
pub fn corollary_a1_delta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(FloquetError::InvalidArgument("β must lie in (0, 1)".into()));
    }
    const SAMPLES: usize = 360;
    // Disks about 2πim stay disjoint for δ < π.
    let hi_cap = PI * (1.0 - 1e-12);
    if boundary_min(hi_cap, SAMPLES) < beta {
        return Err(FloquetError::InvalidArgument(format!(
            "β = {beta} exceeds the boundary minimum reachable with disjoint disks"
        )));
    }
    let (mut lo, mut hi) = (0.0, hi_cap);
    while hi - lo > 1e-14 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if boundary_min(mid, SAMPLES) >= beta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
