use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FloquetError, Result};

/// Union of the open disks of radius `delta` about `πm/(b sin(π(k−j)/n)) e^{−π(j+k−2)i/n}`,
/// `m ∈ ℤ∖{0}`, `1 ≤ j < k ≤ n`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExclusionRegion {
    pub delta: f64,
    pub period: f64,
    pub order: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExclusionHit {
    pub inside: bool,
    /// Distance to the nearest enumerated center.
    pub distance: f64,
    pub nearest: Complex64,
    pub m: i64,
    pub j: usize,
    pub k: usize,
}

impl ExclusionRegion {
    pub fn new(delta: f64, period: f64, order: usize) -> Result<Self> {
        if !(delta > 0.0) || !(period > 0.0) || order < 2 {
            return Err(FloquetError::InvalidArgument(
                "exclusion region needs delta > 0, period > 0 and order ≥ 2".into(),
            ));
        }
        Ok(Self {
            delta,
            period,
            order,
        })
    }

    /// Center for `(m, j, k)` with 1-based `j < k`.
    pub fn center(&self, m: i64, j: usize, k: usize) -> Complex64 {
        let n = self.order as f64;
        let s = (PI * (k - j) as f64 / n).sin();
        Complex64::from_polar(
            PI * m as f64 / (self.period * s),
            -PI * (j + k - 2) as f64 / n,
        )
    }

    /// Largest `|m|` whose centers for the pair `(j, k)` can lie within `delta` of `|ζ|`.
    fn m_bound(&self, abs_zeta: f64, j: usize, k: usize) -> i64 {
        let s = (PI * (k - j) as f64 / self.order as f64).sin();
        ((abs_zeta + self.delta) * self.period * s / PI).ceil() as i64 + 1
    }

    pub fn contains(&self, zeta: Complex64) -> ExclusionHit {
        let n = self.order;
        let mut best = ExclusionHit {
            inside: false,
            distance: f64::INFINITY,
            nearest: Complex64::new(f64::NAN, f64::NAN),
            m: 0,
            j: 0,
            k: 0,
        };
        for k in 2..=n {
            for j in 1..k {
                let mb = self.m_bound(zeta.norm(), j, k);
                for m in (-mb..=mb).filter(|&m| m != 0) {
                    let c = self.center(m, j, k);
                    let d = (zeta - c).norm();
                    if d < best.distance {
                        best = ExclusionHit {
                            inside: d < self.delta,
                            distance: d,
                            nearest: c,
                            m,
                            j,
                            k,
                        };
                    }
                }
            }
        }
        best
    }

    /// Moduli of all centers up to `r_max`, sorted and deduplicated.
    pub fn center_moduli(&self, r_max: f64) -> Vec<f64> {
        let n = self.order;
        let mut out = Vec::new();
        for d in 1..n {
            let s = (PI * d as f64 / n as f64).sin();
            let step = PI / (self.period * s);
            let mut m = 1;
            while m as f64 * step <= r_max {
                out.push(m as f64 * step);
                m += 1;
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        out
    }
}

/// Annuli `a ≤ |ζ| ≤ a + width` inside `[r_min, r_max]` disjoint from the region.
pub fn annulus_gaps(
    region: &ExclusionRegion,
    r_min: f64,
    r_max: f64,
    width: f64,
) -> Vec<(f64, f64)> {
    let mut edges = vec![r_min - region.delta];
    edges.extend(region.center_moduli(r_max + region.delta));
    edges.push(r_max + region.delta);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let lo = (w[0] + region.delta).max(r_min);
        let hi = (w[1] - region.delta).min(r_max);
        if hi - lo >= width {
            let a = 0.5 * (lo + hi) - 0.5 * width;
            out.push((a, a + width));
        }
    }
    out
}
