//! Large-λ regions, bounds and empirical checks of the asymptotic estimates.

mod bands;
mod exclusion;
mod expbound;
mod fits;
mod gershgorin;
mod sets;

pub use bands::{spectrum_scan, Band, SpectrumBands};
pub use exclusion::{annulus_gaps, ExclusionHit, ExclusionRegion};
pub use expbound::{corollary_a1_delta, lemma_a1_bound, BoundBranch, ExpGapBound};
pub use fits::{
    fit_power_law, sample_plan_lambdas, validate_asymptotics, AsymptoticFit, AsymptoticQuantity,
    FitSample, SamplePlan,
};
pub use gershgorin::{gershgorin_disks, GershgorinDisk, GershgorinReport};
pub use sets::{
    classify_point, definition1_sets, discriminant_scaled, discriminant_zeros,
    lambda_matrix_discriminant_zeros, ClusterPathology, PointClassification, PointSetsReport,
};

#[cfg(test)]
mod tests;
