//! Floquet analysis of n-th order ordinary differential operators with periodic coefficients.

pub mod asymptotics;
pub mod config;
pub mod contour;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod multipoint;
pub mod ode;
pub mod operator;
pub mod oracle;
pub mod poly;
pub mod vandermonde;

pub use config::Tolerances;
pub use error::{FloquetError, Result};
pub use num_complex::Complex64;
