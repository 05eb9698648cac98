use thiserror::Error;

/// Errors produced by the spectral routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid has {0} samples, need at least {min}", min = crate::spectral::MIN_GRID_LEN)]
    GridTooSmall(usize),

    #[error("sample {index} is {value}, expected a finite strictly positive value")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("grid length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("denominator vanishes on the unit circle near theta = {theta}")]
    DenominatorZeroOnCircle { theta: f64 },

    #[error("rational spectrum vanishes at theta = {theta}")]
    NonpositiveRationalSample { theta: f64 },

    #[error("numerator polynomial is identically zero")]
    ZeroNumerator,

    #[error("generalized mean of order {r} overflows (max sample {max_sample})")]
    Overflow { r: f64, max_sample: f64 },

    #[error("mean orders must satisfy r < s (got r = {r}, s = {s})")]
    BadOrder { r: f64, s: f64 },

    #[error("tau = {0} outside [0, 1]")]
    TauOutOfRange(f64),

    #[error("density must have unit mean, found {mean}")]
    UnnormalizedDensity { mean: f64 },

    #[error("perturbation too large: max |eps*delta/f| = {0}")]
    PerturbationTooLarge(f64),

    #[error("path has {0} frames, need at least {1}")]
    TooFewFrames(usize, usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path speed vanishes at frame {frame} (tau = {tau})")]
    ZeroSpeed { frame: usize, tau: f64 },

    #[error("factorization reconstruction residual {residual:.3e} exceeds {limit:.0e}; increase the coefficient count or grid size")]
    GridTooCoarse { residual: f64, limit: f64 },

    #[error("{requested} coefficients requested but a grid of {n} supports at most {max}")]
    TooManyCoefficients { requested: usize, n: usize, max: usize },

    #[error("{requested} moments requested but a grid of {n} supports at most {max}")]
    TooManyMoments { requested: usize, n: usize, max: usize },

    #[error("moment sequence is not positive definite (reflection coefficient {reflection} at order {order})")]
    NotPositiveDefinite { order: usize, reflection: f64 },

    #[error("Levinson recursion is numerically singular at order {order} (|k| = {reflection})")]
    NumericallySingular { order: usize, reflection: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("maximum-entropy initialization is infeasible: {0}")]
    InfeasibleStart(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
