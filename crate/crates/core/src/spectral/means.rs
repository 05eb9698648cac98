//! Scalar means of positive densities.
//!
//! All integrals `(1/2pi) * integral over [-pi, pi)` are evaluated as the grid
//! average, which is the trapezoid rule for periodic integrands.

use std::cmp::Ordering;
use std::fmt;

use super::grid::{average, SpectrumGrid};
use crate::error::{Error, Result};

/// Order `r` of a generalized (power) mean.
///
/// `Zero` is kept distinct from `Finite(r)` so the geometric mean is selected
/// exactly rather than approached through a small exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanOrder {
    NegInfinity,
    Zero,
    Finite(f64),
    PosInfinity,
}

impl MeanOrder {
    pub fn new(r: f64) -> Self {
        if r == 0.0 {
            MeanOrder::Zero
        } else if r == f64::INFINITY {
            MeanOrder::PosInfinity
        } else if r == f64::NEG_INFINITY {
            MeanOrder::NegInfinity
        } else {
            MeanOrder::Finite(r)
        }
    }

    /// The order as an extended real.
    pub fn value(self) -> f64 {
        match self {
            MeanOrder::NegInfinity => f64::NEG_INFINITY,
            MeanOrder::Zero => 0.0,
            MeanOrder::Finite(r) => r,
            MeanOrder::PosInfinity => f64::INFINITY,
        }
    }
}

impl From<f64> for MeanOrder {
    fn from(r: f64) -> Self {
        MeanOrder::new(r)
    }
}

impl PartialOrd for MeanOrder {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for MeanOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanOrder::NegInfinity => f.write_str("-inf"),
            MeanOrder::Zero => f.write_str("0"),
            MeanOrder::Finite(r) => write!(f, "{r}"),
            MeanOrder::PosInfinity => f.write_str("inf"),
        }
    }
}

/// Arithmetic mean.
pub fn mean(f: &SpectrumGrid) -> f64 {
    average(f.values().iter().copied(), f.len())
}

/// `exp(mean(log f))`.
pub fn geometric_mean(f: &SpectrumGrid) -> f64 {
    log_mean(f).exp()
}

/// `mean(log f)`.
pub fn log_mean(f: &SpectrumGrid) -> f64 {
    average(f.values().iter().map(|v| v.ln()), f.len())
}

/// `1 / mean(1/f)`.
pub fn harmonic_mean(f: &SpectrumGrid) -> f64 {
    average(f.values().iter().map(|v| v.recip()), f.len()).recip()
}

/// Power mean `M_r(f) = mean(f^r)^(1/r)` with the usual limits at `r = 0, +-inf`.
pub fn generalized_mean(f: &SpectrumGrid, r: MeanOrder) -> Result<f64> {
    match r {
        MeanOrder::NegInfinity => Ok(f.min()),
        MeanOrder::PosInfinity => Ok(f.max()),
        MeanOrder::Zero => Ok(geometric_mean(f)),
        MeanOrder::Finite(0.0) => Ok(geometric_mean(f)),
        MeanOrder::Finite(1.0) => Ok(mean(f)),
        MeanOrder::Finite(-1.0) => Ok(harmonic_mean(f)),
        MeanOrder::Finite(r) => {
            let overflow = || Error::Overflow {
                r,
                max_sample: f.max(),
            };
            let mut powers = Vec::with_capacity(f.len());
            for v in f.values() {
                let p = v.powf(r);
                if !p.is_finite() {
                    return Err(overflow());
                }
                powers.push(p);
            }
            let m = average(powers, f.len());
            let out = m.powf(r.recip());
            if !(m > 0.0 && m.is_finite() && out.is_finite() && out > 0.0) {
                return Err(overflow());
            }
            Ok(out)
        }
    }
}

/// `sum(g * w) / sum(w)`: the mean of `g` against the normalized weight density `w`.
pub fn weighted_mean(g: &SpectrumGrid, weight: &SpectrumGrid) -> Result<f64> {
    g.ensure_same_len(weight)?;
    Ok(weighted_mean_slices(g.values(), weight.values()))
}

pub(crate) fn weighted_mean_slices(g: &[f64], w: &[f64]) -> f64 {
    let num = super::grid::compensated_sum(g.iter().zip(w).map(|(a, b)| a * b));
    let den = super::grid::compensated_sum(w.iter().copied());
    num / den
}
