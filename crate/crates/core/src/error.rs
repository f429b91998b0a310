//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("bodies {i} and {j} closer than the collision floor (|d| = {distance:.3e})")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("step size underflow at t = {t}: h = {h:.3e}")]
    StepFailure { t: f64, h: f64 },

    #[error("{what} did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("boundary parameters grew past |a| = {bound}; minimization setup is suspect")]
    Divergence { bound: f64 },

    #[error("shooting stalled with residual {residual:.3e} after {iterations} iterations")]
    ShootingDivergence { residual: f64, iterations: usize },

    #[error("rotation angle {theta} has zero boundary angular speed")]
    DegenerateOmega { theta: f64 },

    #[error("Jacobi radius {index} below 1e-10 ({value:.3e}); polar chart is degenerate")]
    DegenerateRadius { index: usize, value: f64 },

    #[error("bodies {i} and {j} collide along the straight-line segment")]
    SegmentCollision { i: usize, j: usize },

    #[error("theta = {theta} is excluded (pi/2, pi, 3pi/2 are inadmissible)")]
    ExcludedAngle { theta: f64 },

    #[error("negative time {t} is only defined for periodic orbits")]
    NegativeTime { t: f64 },

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("archive: {0}")]
    Archive(String),
}
