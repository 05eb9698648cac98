//! Trigonometric moment problem.
//!
//! Given autocorrelations `R_0..R_n`, find the positive density matching them
//! that is closest to a prior in the `delta_ag` sense. With a flat prior this
//! is the maximum-entropy (all-pole) density, computed independently by the
//! Levinson-Durbin recursion in [`max_entropy_reference`].

mod levinson;
mod solver;

pub use levinson::{levinson_durbin, Levinson};
pub use solver::{solve_ag_closest, solve_ag_closest_from, MomentSolution, SolverOptions, DENOMINATOR_FLOOR};

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{average, SpectrumGrid};

/// Reflection coefficients at or beyond this magnitude make the all-pole
/// reference numerically singular.
pub const SINGULARITY_MARGIN: f64 = 1e-12;

/// Autocorrelations `R_0..R_n` of a real process with a positive definite Toeplitz matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    r: Vec<f64>,
}

impl MomentVector {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        levinson_durbin(&r)?;
        Ok(Self { r })
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    /// Highest lag `n`.
    pub fn order(&self) -> usize {
        self.r.len() - 1
    }
}

/// `cos(k theta_j)` for `k = 0..=order` on the `n`-point grid, row-major by `k`.
pub(crate) struct CosTable {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl CosTable {
    pub(crate) fn new(n: usize, order: usize) -> Self {
        // theta_j = -pi + 2 pi j / n, so cos(k theta_j) = (-1)^k cos(2 pi (k j mod n) / n).
        let rows = (0..=order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                (0..n)
                    .map(|j| sign * (2.0 * PI * ((k * j) % n) as f64 / n as f64).cos())
                    .collect()
            })
            .collect();
        Self { n, rows }
    }

    pub(crate) fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub(crate) fn order(&self) -> usize {
        self.rows.len() - 1
    }

    /// `mean(values * cos(k theta))` for every `k`.
    pub(crate) fn project(&self, values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| average(row.iter().zip(values).map(|(c, v)| c * v), self.n))
            .collect()
    }
}

fn check_moment_count(n: usize, n_moments: usize) -> Result<()> {
    let max = (n / 4).saturating_sub(1);
    if n_moments > max {
        return Err(Error::TooManyMoments {
            requested: n_moments,
            n,
            max,
        });
    }
    Ok(())
}

/// `R_k = mean(f cos(k theta))` for `k = 0..=n_moments`.
pub fn compute_moments(f: &SpectrumGrid, n_moments: usize) -> Result<MomentVector> {
    check_moment_count(f.len(), n_moments)?;
    let table = CosTable::new(f.len(), n_moments);
    MomentVector::new(table.project(f.values()))
}

/// The maximum-entropy density `g / |1 + a_1 e^{j theta} + ... + a_n e^{jn theta}|^2`
/// matching `moments`, sampled on `n` points.
pub fn max_entropy_reference(moments: &MomentVector, n: usize) -> Result<SpectrumGrid> {
    let lev = levinson_durbin(moments.values())?;
    if let Some((i, &k)) = lev
        .reflections
        .iter()
        .enumerate()
        .find(|(_, k)| k.abs() >= 1.0 - SINGULARITY_MARGIN)
    {
        return Err(Error::NumericallySingular {
            order: i + 1,
            reflection: k.abs(),
        });
    }
    let mag = crate::prediction::squared_magnitude_on_grid(&lev.a, n);
    SpectrumGrid::new(mag.into_iter().map(|m| lev.error / m).collect())
}
