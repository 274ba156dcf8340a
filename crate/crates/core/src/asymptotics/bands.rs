use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::floquet::floquet_record;
use crate::operator::PeriodicOperator;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// The edge is an end of the scanned interval rather than a located band edge.
    pub lo_clipped: bool,
    pub hi_clipped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumBands {
    /// Scanned parameter `s`; multipliers are evaluated at `λ = sign · s`.
    pub sign: f64,
    pub interval: (f64, f64),
    pub bands: Vec<Band>,
    /// `(s, min_j ||r_j| − 1|)` on the scan grid.
    pub samples: Vec<(f64, f64)>,
}

fn band_distance(op: &PeriodicOperator, s: f64, sign: f64, tol: &Tolerances) -> Result<f64> {
    let rec = floquet_record(op, Complex64::new(sign * s, 0.0), tol)?;
    // ||r| − 1| from log multipliers: |e^{Re l} − 1|.
    Ok(rec
        .log_multipliers
        .iter()
        .map(|l| l.re.exp_m1().abs())
        .fold(f64::INFINITY, f64::min))
}

/// Bands of `{s : |r_j(sign·s)| = 1 for some j}` on `[a, b]`, `sign = (−1)^ν` for `n = 2ν` and
/// `+1` for odd `n`.
pub fn spectrum_scan(
    op: &PeriodicOperator,
    interval: (f64, f64),
    resolution: usize,
    tol: &Tolerances,
) -> Result<SpectrumBands> {
    let (a, b) = interval;
    if !(a < b) || resolution < 2 {
        return Err(FloquetError::InvalidArgument(
            "need a < b and resolution ≥ 2".into(),
        ));
    }
    tol.validate()?;
    let n = op.order();
    let sign = if n % 2 == 0 && (n / 2) % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    let grid: Vec<f64> = (0..=resolution)
        .map(|i| a + (b - a) * i as f64 / resolution as f64)
        .collect();
    let dist: Vec<f64> = grid
        .par_iter()
        .map(|&s| band_distance(op, s, sign, tol))
        .collect::<Result<_>>()?;
    let inside = |d: f64| d < tol.band_tol;
    let refine = |mut lo: f64, mut hi: f64, lo_in: bool| -> Result<f64> {
        // Invariant: predicate(lo) == lo_in, predicate(hi) == !lo_in.
        while hi - lo > tol.band_bisect_tol * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if inside(band_distance(op, mid, sign, tol)?) == lo_in {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut bands = Vec::new();
    let mut start: Option<(f64, bool)> = None;
    for i in 0..grid.len() {
        let here = inside(dist[i]);
        match (start, here) {
            (None, true) => {
                start = Some(if i == 0 {
                    (grid[0], true)
                } else {
                    (refine(grid[i - 1], grid[i], false)?, false)
                });
            }
            (Some((lo, lo_clipped)), false) => {
                let hi = refine(grid[i - 1], grid[i], true)?;
                bands.push(Band {
                    lo,
                    hi,
                    lo_clipped,
                    hi_clipped: false,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((lo, lo_clipped)) = start {
        bands.push(Band {
            lo,
            hi: b,
            lo_clipped,
            hi_clipped: true,
        });
    }
    Ok(SpectrumBands {
        sign,
        interval,
        bands,
        samples: grid.into_iter().zip(dist).collect(),
    })
}
