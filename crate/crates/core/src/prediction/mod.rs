//! Linear prediction and smoothing of stationary processes.
//!
//! These are the filtering quantities the distances are built from: the
//! optimal one-step prediction error variance is the geometric mean of the
//! spectrum, the optimal two-sided smoothing error variance is its harmonic
//! mean, and applying a filter designed for the wrong spectrum inflates both
//! by exactly the ratios behind `delta_ag` and `delta_smooth`.

mod factor;
mod simulate;

pub use factor::{
    cepstrum, exp_series, factorize, factorize_truncated, inverse_outer,
    squared_magnitude_on_grid, OuterFactorization, RECONSTRUCTION_LIMIT,
};
pub use simulate::{simulate_prediction, SimulationReport, MIN_SAMPLES, MAX_FILTER_LEN, SUBSTREAM_LEN};

use crate::error::Result;
use crate::spectral::{average, geometric_mean, harmonic_mean, mean, SpectrumGrid};

/// Optimal one-step prediction error variance, `exp(mean(log f))`.
pub fn prediction_variance(f: &SpectrumGrid) -> f64 {
    geometric_mean(f)
}

/// Optimal smoothing (past and future) error variance, `1 / mean(1/f)`.
pub fn smoothing_variance(f: &SpectrumGrid) -> f64 {
    harmonic_mean(f)
}

/// How [`mismatched_prediction_variance`] evaluates the error variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMethod {
    /// `mean(|a_model|^2 f_true)` with the outer factor truncated to `m` taps.
    #[default]
    TruncatedFilter,
    /// `mean(f_true / f_model) * g_model`, the infinite-filter limit.
    ClosedForm,
}

/// Error variance of the one-step predictor designed for `f_model`, applied to
/// a process with spectrum `f_true`.
pub fn mismatched_prediction_variance(
    f_true: &SpectrumGrid,
    f_model: &SpectrumGrid,
    m: usize,
    method: VarianceMethod,
) -> Result<f64> {
    f_true.ensure_same_len(f_model)?;
    match method {
        VarianceMethod::ClosedForm => {
            let ratio = average(
                f_true.values().iter().zip(f_model.values()).map(|(a, b)| a / b),
                f_true.len(),
            );
            Ok(ratio * geometric_mean(f_model))
        }
        VarianceMethod::TruncatedFilter => {
            let fac = factorize_truncated(f_model, m)?;
            Ok(filter_error_variance(&fac.a_coeffs, f_true))
        }
    }
}

/// `mean(|sum_k a_k e^{jk theta}|^2 f(theta))`: output variance of the FIR
/// filter `a` driven by a process with spectrum `f`.
pub fn filter_error_variance(a_coeffs: &[f64], f: &SpectrumGrid) -> f64 {
    let mag = squared_magnitude_on_grid(a_coeffs, f.len());
    average(mag.iter().zip(f.values()).map(|(m, v)| m * v), f.len())
}

/// The optimal smoother's error image `b_f = h_f / f`, whose zeroth Fourier
/// coefficient is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingFilter {
    pub h: f64,
    pub b_values: SpectrumGrid,
}

pub fn smoothing_filter(f: &SpectrumGrid) -> Result<SmoothingFilter> {
    let h = harmonic_mean(f);
    let b_values = f.recip()?.scale(h)?;
    debug_assert!((mean(&b_values) - 1.0).abs() < 1e-10);
    Ok(SmoothingFilter { h, b_values })
}

/// Error variance of the `f_model`-optimal smoother applied to an `f_true` process:
/// `mean((h_model / f_model)^2 * f_true)`.
pub fn mismatched_smoothing_variance(f_true: &SpectrumGrid, f_model: &SpectrumGrid) -> Result<f64> {
    f_true.ensure_same_len(f_model)?;
    let filter = smoothing_filter(f_model)?;
    Ok(average(
        filter
            .b_values
            .values()
            .iter()
            .zip(f_true.values())
            .map(|(b, v)| b * b * v),
        f_true.len(),
    ))
}
