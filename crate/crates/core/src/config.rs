//! Numerical tolerances shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Local error tolerance of the integrator.
    pub ode_tol: f64,
    /// Step ceiling `h ≤ factor / |λ|^{1/n}`.
    pub step_ceiling: f64,
    pub max_steps: usize,
    /// Relative distance under which multipliers are clustered.
    pub cluster_tol: f64,
    /// Singular values below `rank_tol · scale` count as zero.
    pub rank_tol: f64,
    /// Required ratio between the smallest kept and largest dropped singular value.
    pub rank_gap: f64,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    pub band_tol: f64,
    pub band_bisect_tol: f64,
    pub pole_tol: f64,
    /// Relative floor for `|D_P|` on monodromy paths.
    pub disc_floor: f64,
    /// Cell side below which a cluster of zeros is no longer subdivided (relative to `1 + |λ|`).
    pub min_cell: f64,
    pub max_nudges: usize,
    pub max_evals: usize,
    pub product_truncation: usize,
    pub max_monodromy_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_tol: 1e-12,
            step_ceiling: 0.5,
            max_steps: 2_000_000,
            cluster_tol: 1e-3,
            rank_tol: 1e-8,
            rank_gap: 10.0,
            newton_max_iter: 40,
            newton_tol: 1e-12,
            band_tol: 1e-8,
            band_bisect_tol: 1e-10,
            pole_tol: 1e-10,
            disc_floor: 1e-14,
            min_cell: 1e-6,
            max_nudges: 8,
            max_evals: 2_000_000,
            product_truncation: 10_000,
            max_monodromy_steps: 1 << 16,
        }
    }
}

impl Tolerances {
    pub fn with_ode_tol(mut self, tol: f64) -> Self {
        self.ode_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(FloquetError::InvalidArgument(what.to_string()));
        if !(1e-14..=1e-4).contains(&self.ode_tol) {
            return bad("ode_tol must lie in [1e-14, 1e-4]");
        }
        if !(self.step_ceiling > 0.0 && self.step_ceiling.is_finite()) {
            return bad("step_ceiling must be positive");
        }
        if !(self.cluster_tol > 0.0 && self.cluster_tol < 1.0) {
            return bad("cluster_tol must lie in (0, 1)");
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return bad("rank_tol must lie in (0, 1)");
        }
        if self.rank_gap < 1.0 {
            return bad("rank_gap must be at least 1");
        }
        if !(self.band_tol > 0.0 && self.band_bisect_tol > 0.0) {
            return bad("band tolerances must be positive");
        }
        if self.product_truncation == 0 {
            return bad("product_truncation must be at least 1");
        }
        if self.max_steps == 0 || self.max_evals == 0 || self.newton_max_iter == 0 {
            return bad("budgets must be positive");
        }
        if !(self.min_cell > 0.0 && self.newton_tol > 0.0 && self.pole_tol > 0.0) {
            return bad("min_cell, newton_tol and pole_tol must be positive");
        }
        Ok(())
    }
}
