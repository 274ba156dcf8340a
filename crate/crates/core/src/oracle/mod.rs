//! Closed-form ground truth for the unperturbed and constant-coefficient operators.

mod constant;
mod unperturbed;

pub use constant::{
    const_coeff_exponents, const_coeff_multipliers, const_coeff_spectrum_edge, ConstCoeffContext,
};
pub use unperturbed::{
    hurwitz_zeta, principal_root, tilde_discriminant_identity, tilde_double_points,
    tilde_fundamental, tilde_fundamental_derivative, tilde_fundamental_scaled, tilde_h,
    tilde_h_closed_scaled, tilde_multipliers, TildeH, UnperturbedContext,
};
