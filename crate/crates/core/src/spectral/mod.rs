//! Spectrum representations, grid quadrature and scalar means.

mod grid;
mod means;
mod rational;

pub use grid::{
    compensated_sum, grid_theta, SignedGrid, SpectrumGrid, DEFAULT_GRID_LEN, MIN_GRID_LEN,
};
pub use means::{
    generalized_mean, geometric_mean, harmonic_mean, log_mean, mean, weighted_mean, MeanOrder,
};
pub(crate) use grid::average;
pub(crate) use means::weighted_mean_slices;
pub use rational::{builtin, poly_mul, sample_rational, RationalPsd, DENOMINATOR_TOLERANCE};

/// Normalizes `f` to unit mean.
pub fn normalize(f: &SpectrumGrid) -> SpectrumGrid {
    f.normalize()
}
