use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest accepted grid size.
pub const MIN_GRID_LEN: usize = 16;

/// Grid size used when callers do not pick one.
pub const DEFAULT_GRID_LEN: usize = 4096;

/// Frequency of grid point `k` on an `n`-point grid: `-pi + 2*pi*k/n`.
#[inline]
pub fn grid_theta(n: usize, k: usize) -> f64 {
    -PI + 2.0 * PI * (k as f64) / (n as f64)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Average over the grid, i.e. the periodic trapezoid rule for `(1/2pi) * integral`.
#[inline]
pub(crate) fn average<I: IntoIterator<Item = f64>>(values: I, n: usize) -> f64 {
    compensated_sum(values) / n as f64
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// A strictly positive power spectral density sampled at `theta_k = -pi + 2*pi*k/n`.
///
/// The frequency grid is implicit. Samples are finite and strictly positive,
/// and `n >= 16`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    values: Vec<f64>,
}

impl SpectrumGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_GRID_LEN {
            return Err(Error::GridTooSmall(values.len()));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveSample { index, value });
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Samples `f(theta)` on the `n`-point grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|k| f(grid_theta(n, k))).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn theta(&self, k: usize) -> f64 {
        grid_theta(self.len(), k)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::MAX, f64::min)
    }

    pub(crate) fn ensure_same_len(&self, other: &SpectrumGrid) -> Result<()> {
        check_len(self.len(), other.len())
    }

    fn zip_map(&self, other: &SpectrumGrid, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_len(other)?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        )
    }

    /// Pointwise `self / other`.
    pub fn ratio(&self, other: &SpectrumGrid) -> Result<Self> {
        self.zip_map(other, |a, b| a / b)
    }

    /// Pointwise `self * other`.
    pub fn product(&self, other: &SpectrumGrid) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Pointwise `self^p`. Fails if the power overflows or underflows to zero.
    pub fn powf(&self, p: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v.powf(p)).collect())
    }

    /// Pointwise `c * self`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| c * v).collect())
    }

    /// Pointwise `1 / self`.
    pub fn recip(&self) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v.recip()).collect())
    }

    /// Pointwise natural logarithm; the result may take either sign.
    pub fn ln(&self) -> SignedGrid {
        SignedGrid {
            values: self.values.iter().map(|v| v.ln()).collect(),
        }
    }

    /// Rescales to unit mean.
    pub fn normalize(&self) -> Self {
        let m = super::means::mean(self);
        Self {
            values: self.values.iter().map(|v| v / m).collect(),
        }
    }
}

/// A real-valued grid without the positivity invariant (logarithms, perturbations).
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGrid {
    values: Vec<f64>,
}

impl SignedGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_GRID_LEN {
            return Err(Error::GridTooSmall(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|k| f(grid_theta(n, k))).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        average(self.values.iter().copied(), self.len())
    }

    /// `mean(x^2) - mean(x)^2`, evaluated as the mean squared deviation so it
    /// never goes negative.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        average(self.values.iter().map(|v| (v - m) * (v - m)), self.len())
    }

    /// `(mean |x|^k)^(1/k)`.
    pub fn lk_norm(&self, k: f64) -> f64 {
        average(self.values.iter().map(|v| v.abs().powf(k)), self.len()).powf(k.recip())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &SignedGrid) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Pointwise exponential back onto a positive grid.
    pub fn exp(&self) -> Result<SpectrumGrid> {
        SpectrumGrid::new(self.values.iter().map(|v| v.exp()).collect())
    }
}

impl From<&SpectrumGrid> for SignedGrid {
    fn from(f: &SpectrumGrid) -> Self {
        SignedGrid {
            values: f.values().to_vec(),
        }
    }
}
