use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum FloquetError {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at x = {x} (lambda = {lambda})")]
    StepUnderflow { lambda: Complex64, x: f64 },

    #[error("step budget of {max_steps} exhausted at x = {x} (lambda = {lambda})")]
    StepBudget {
        lambda: Complex64,
        x: f64,
        max_steps: usize,
    },

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("overflow: |zeta x| = {0} exceeds the representable range")]
    Overflow(f64),

    #[error("ambiguous rank decision near {value}: gap ratio {gap_ratio:.3e} below 10")]
    RankAmbiguous { value: Complex64, gap_ratio: f64 },

    #[error("pole candidate at lambda = {lambda}: |Delta| = {delta:.3e}")]
    PoleCandidate { lambda: Complex64, delta: f64 },

    #[error("zero of the scanned function on the contour after {nudges} nudges")]
    ZeroOnContour { nudges: usize },

    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),

    #[error("tracking collision at theta = {theta}: {detail}")]
    TrackingCollision { theta: f64, detail: String },

    #[error("discriminant too small on the monodromy path: {0:.3e}")]
    PathNearBranch(f64),

    #[error("root finder failed to converge: {0}")]
    RootFinder(String),

    #[error("winding count changed from {before} to {after} at t = {t}")]
    CountJump { before: i64, after: i64, t: f64 },

    #[error("classification failure: {0}")]
    Classification(String),

    #[error("fit degenerate: only {0} usable samples")]
    FitDegenerate(usize),
}

pub type Result<T> = std::result::Result<T, FloquetError>;
