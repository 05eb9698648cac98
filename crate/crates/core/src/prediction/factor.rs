use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral::SpectrumGrid;

/// Largest accepted sup-norm relative reconstruction error for [`factorize`].
pub const RECONSTRUCTION_LIMIT: f64 = 1e-4;

fn plan(n: usize, inverse: bool) -> Arc<dyn rustfft::Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Real parts of the Fourier coefficients `c_k = mean(log f * e^{-jk theta})`, `k = 0..n`.
///
/// For an even density these are the full (real) cepstral coefficients.
pub fn cepstrum(f: &SpectrumGrid) -> Vec<f64> {
    let n = f.len();
    let mut buf: Vec<Complex64> = f.values().iter().map(|v| Complex64::new(v.ln(), 0.0)).collect();
    plan(n, false).process(&mut buf);
    // theta_j = -pi + 2 pi j/n contributes (-1)^k to the k-th coefficient.
    buf.iter()
        .enumerate()
        .map(|(k, c)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * c.re / n as f64
        })
        .collect()
}

/// Power-series coefficients of `exp(sum_{k>=1} b_k z^k)` up to `z^(m-1)`.
///
/// Uses `k a_k = sum_{j=1}^{k} j b_j a_{k-j}`, which follows from `a' = b' a`.
pub fn exp_series(b: &[f64], m: usize) -> Vec<f64> {
    let mut a = vec![0.0; m];
    if m == 0 {
        return a;
    }
    a[0] = 1.0;
    for k in 1..m {
        let mut acc = 0.0;
        for j in 1..=k.min(b.len().saturating_sub(1)) {
            acc += j as f64 * b[j] * a[k - j];
        }
        a[k] = acc / k as f64;
    }
    a
}

/// `|sum_k coeffs[k] e^{jk theta}|^2` on the `n`-point grid.
pub fn squared_magnitude_on_grid(coeffs: &[f64], n: usize) -> Vec<f64> {
    assert!(coeffs.len() <= n, "filter longer than the grid");
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, &c) in coeffs.iter().enumerate() {
        buf[k] = Complex64::new(if k % 2 == 0 { c } else { -c }, 0.0);
    }
    plan(n, true).process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).collect()
}

/// `f = g / |a(e^{j theta})|^2` with `a(z) = 1 + a_1 z + ...` outer, truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFactorization {
    /// Geometric mean of the density: the optimal one-step prediction error variance.
    pub g: f64,
    /// `a_0 = 1, a_1, ..., a_{m-1}`.
    pub a_coeffs: Vec<f64>,
    /// Sup-norm relative error of `g / |a|^2` against the source grid.
    pub residual: f64,
}

impl OuterFactorization {
    /// One-step predictor weights on past samples, `(-a_1, -a_2, ...)`.
    pub fn predictor(&self) -> Vec<f64> {
        self.a_coeffs[1..].iter().map(|a| -a).collect()
    }

    /// `g / |a|^2` on the `n`-point grid.
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        squared_magnitude_on_grid(&self.a_coeffs, n)
            .into_iter()
            .map(|m| self.g / m)
            .collect()
    }
}

fn check_count(f: &SpectrumGrid, m: usize) -> Result<()> {
    let max = f.len() / 2;
    if m == 0 || m > max {
        return Err(Error::TooManyCoefficients {
            requested: m,
            n: f.len(),
            max,
        });
    }
    Ok(())
}

/// Cepstral factorization truncated to `m` coefficients, without checking how
/// well the truncated filter reproduces `f`.
///
/// The truncated polynomial is still a valid monic prediction-error filter,
/// so variances computed from it are meaningful even when it is far from `a_f`.
pub fn factorize_truncated(f: &SpectrumGrid, m: usize) -> Result<OuterFactorization> {
    check_count(f, m)?;
    let c = cepstrum(f);
    let g = c[0].exp();
    let b: Vec<f64> = c[..m].iter().enumerate().map(|(k, &v)| if k == 0 { 0.0 } else { -v }).collect();
    let a_coeffs = exp_series(&b, m);
    let residual = squared_magnitude_on_grid(&a_coeffs, f.len())
        .iter()
        .zip(f.values())
        .fold(0.0_f64, |acc, (mag, v)| acc.max((g / mag / v - 1.0).abs()));
    Ok(OuterFactorization {
        g,
        a_coeffs,
        residual: if residual.is_nan() { f64::INFINITY } else { residual },
    })
}

/// Cepstral spectral factorization of `f` with `m` outer-function coefficients.
///
/// Fails with [`Error::GridTooCoarse`] when the truncated factor reproduces
/// `f` worse than [`RECONSTRUCTION_LIMIT`] in relative sup norm.
pub fn factorize(f: &SpectrumGrid, m: usize) -> Result<OuterFactorization> {
    let fac = factorize_truncated(f, m)?;
    if !(fac.residual <= RECONSTRUCTION_LIMIT) {
        return Err(Error::GridTooCoarse {
            residual: fac.residual,
            limit: RECONSTRUCTION_LIMIT,
        });
    }
    Ok(fac)
}

/// Coefficients `(h_0 = 1, h_1, ...)` of `1 / a_f(z)`, truncated to `m`, with `g_f`.
pub fn inverse_outer(f: &SpectrumGrid, m: usize) -> Result<(f64, Vec<f64>)> {
    check_count(f, m)?;
    let c = cepstrum(f);
    let b: Vec<f64> = c[..m].iter().enumerate().map(|(k, &v)| if k == 0 { 0.0 } else { v }).collect();
    Ok((c[0].exp(), exp_series(&b, m)))
}
