//! Distance measures between two power spectral densities.
//!
//! Every measure depends on the pair only through the ratio `f1/f2`, and
//! quantifies how far that ratio is from a constant. All of them are
//! invariant under independent positive rescaling of either argument.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::{average, generalized_mean, MeanOrder, SpectrumGrid};

/// Distances within this band of zero are reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    /// Log ratio of arithmetic to geometric mean of `f1/f2`.
    Ag,
    /// `Ag` symmetrized; log ratio of arithmetic to harmonic mean.
    Sym,
    /// Kullback-Leibler divergence of the unit-mean normalizations.
    Kl,
    /// Log degradation of a mismatched smoothing filter.
    Smooth,
    /// Gap `log M_s - log M_r` between two power means of `f1/f2`.
    Rs { r: MeanOrder, s: MeanOrder },
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::Ag => f.write_str("ag"),
            DistanceKind::Sym => f.write_str("sym"),
            DistanceKind::Kl => f.write_str("kl"),
            DistanceKind::Smooth => f.write_str("smooth"),
            DistanceKind::Rs { r, s } => write!(f, "rs({r},{s})"),
        }
    }
}

/// A nonnegative distance, `+inf` only if an underlying mean overflowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceValue {
    pub value: f64,
    pub kind: DistanceKind,
}

impl DistanceValue {
    fn new(raw: f64, kind: DistanceKind) -> Self {
        let value = if raw.is_nan() || raw == f64::INFINITY {
            f64::INFINITY
        } else if raw.abs() < ZERO_CLAMP {
            0.0
        } else {
            raw
        };
        Self { value, kind }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

fn check(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<usize> {
    f1.ensure_same_len(f2)?;
    Ok(f1.len())
}

fn pairs<'a>(f1: &'a SpectrumGrid, f2: &'a SpectrumGrid) -> impl Iterator<Item = (f64, f64)> + 'a {
    f1.values().iter().copied().zip(f2.values().iter().copied())
}

pub(crate) fn ag_raw(f1: &SpectrumGrid, f2: &SpectrumGrid) -> f64 {
    let n = f1.len();
    let arith = average(pairs(f1, f2).map(|(a, b)| a / b), n);
    let log_geo = average(pairs(f1, f2).map(|(a, b)| (a / b).ln()), n);
    arith.ln() - log_geo
}

pub(crate) fn sym_raw(f1: &SpectrumGrid, f2: &SpectrumGrid) -> f64 {
    let n = f1.len();
    let fwd = average(pairs(f1, f2).map(|(a, b)| a / b), n);
    let bwd = average(pairs(f1, f2).map(|(a, b)| b / a), n);
    fwd.ln() + bwd.ln()
}

pub(crate) fn kl_raw(f1: &SpectrumGrid, f2: &SpectrumGrid) -> f64 {
    let n = f1.len();
    let m1 = average(f1.values().iter().copied(), n);
    let m2 = average(f2.values().iter().copied(), n);
    average(
        pairs(f1, f2).map(|(a, b)| {
            let p = a / m1;
            p * (p / (b / m2)).ln()
        }),
        n,
    )
}

/// `log(mean(f1/f2)) - mean(log(f1/f2))`.
pub fn delta_ag(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<DistanceValue> {
    check(f1, f2)?;
    Ok(DistanceValue::new(ag_raw(f1, f2), DistanceKind::Ag))
}

/// `delta_ag(f1, f2) + delta_ag(f2, f1) = log(mean(f1/f2) * mean(f2/f1))`.
pub fn delta_sym(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<DistanceValue> {
    check(f1, f2)?;
    Ok(DistanceValue::new(sym_raw(f1, f2), DistanceKind::Sym))
}

/// `mean(p1 * log(p1/p2))` with `p_i = f_i / mean(f_i)`.
pub fn delta_kl(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<DistanceValue> {
    check(f1, f2)?;
    Ok(DistanceValue::new(kl_raw(f1, f2), DistanceKind::Kl))
}

/// Variance of the `f2`-optimal smoother on an `f1` process, over the `f1`-optimal one:
/// `mean(f1/f2^2) * mean(1/f1) / mean(1/f2)^2`.
pub fn rho_smooth(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<f64> {
    let n = check(f1, f2)?;
    let cross = average(pairs(f1, f2).map(|(a, b)| a / (b * b)), n);
    let inv1 = average(f1.values().iter().map(|v| v.recip()), n);
    let inv2 = average(f2.values().iter().map(|v| v.recip()), n);
    Ok(cross * inv1 / (inv2 * inv2))
}

/// The same ratio as [`rho_smooth`], written as the mean square of `f1/f2`
/// over its squared mean, both taken against the weight `1/f1`.
pub fn rho_smooth_weighted(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<f64> {
    check(f1, f2)?;
    let lambda: Vec<f64> = pairs(f1, f2).map(|(a, b)| a / b).collect();
    let lambda_sq: Vec<f64> = lambda.iter().map(|l| l * l).collect();
    let weight: Vec<f64> = f1.values().iter().map(|v| v.recip()).collect();
    let m2 = crate::spectral::weighted_mean_slices(&lambda_sq, &weight);
    let m1 = crate::spectral::weighted_mean_slices(&lambda, &weight);
    Ok(m2 / (m1 * m1))
}

/// `log(rho_smooth(f1, f2))`.
pub fn delta_smooth(f1: &SpectrumGrid, f2: &SpectrumGrid) -> Result<DistanceValue> {
    let rho = rho_smooth(f1, f2)?;
    Ok(DistanceValue::new(rho.ln(), DistanceKind::Smooth))
}

/// `log M_s(f1/f2) - log M_r(f1/f2)` for orders `r < s`.
///
/// `(r, s) = (0, 1)` reproduces [`delta_ag`] and `(-1, 1)` reproduces [`delta_sym`].
pub fn delta_rs(
    f1: &SpectrumGrid,
    f2: &SpectrumGrid,
    r: MeanOrder,
    s: MeanOrder,
) -> Result<DistanceValue> {
    check(f1, f2)?;
    if r.partial_cmp(&s) != Some(std::cmp::Ordering::Less) {
        return Err(Error::BadOrder {
            r: r.value(),
            s: s.value(),
        });
    }
    let kind = DistanceKind::Rs { r, s };
    let lambda = match f1.ratio(f2) {
        Ok(l) => l,
        Err(_) => return Ok(DistanceValue::new(f64::INFINITY, kind)),
    };
    let upper = generalized_mean(&lambda, s);
    let lower = generalized_mean(&lambda, r);
    match (upper, lower) {
        (Ok(hi), Ok(lo)) => Ok(DistanceValue::new(hi.ln() - lo.ln(), kind)),
        (Err(Error::Overflow { .. }), _) | (_, Err(Error::Overflow { .. })) => {
            Ok(DistanceValue::new(f64::INFINITY, kind))
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Evaluates the measure named by `kind`.
pub fn distance(f1: &SpectrumGrid, f2: &SpectrumGrid, kind: DistanceKind) -> Result<DistanceValue> {
    match kind {
        DistanceKind::Ag => delta_ag(f1, f2),
        DistanceKind::Sym => delta_sym(f1, f2),
        DistanceKind::Kl => delta_kl(f1, f2),
        DistanceKind::Smooth => delta_smooth(f1, f2),
        DistanceKind::Rs { r, s } => delta_rs(f1, f2, r, s),
    }
}
