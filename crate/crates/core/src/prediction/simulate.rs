use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{factorize_truncated, filter_error_variance, inverse_outer};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::spectral::SpectrumGrid;

pub const MIN_SAMPLES: usize = 10_000;
pub const MAX_FILTER_LEN: usize = 4096;

/// Samples per independently seeded substream. Fixed so that the result does
/// not depend on how substreams are distributed over workers.
pub const SUBSTREAM_LEN: usize = 1 << 16;

/// Outcome of a Monte Carlo run of a (possibly mismatched) one-step predictor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub empirical_variance: f64,
    pub analytic_variance: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub filter_len: usize,
    pub seed: u64,
}

impl SimulationReport {
    /// `|empirical - analytic|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.empirical_variance - self.analytic_variance).abs() / self.standard_error
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn run_substream(
    stream: u64,
    seed: u64,
    count: usize,
    synth_rev: &[f64],
    pred_rev: &[f64],
) -> Moments {
    let len = synth_rev.len();
    let warm = 4 * len;
    let total = warm + count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let noise: Vec<f64> = (0..total + len - 1)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let process: Vec<f64> = (0..total).map(|t| dot(synth_rev, &noise[t..t + len])).collect();
    let mut stats = Moments::default();
    for t in warm..total {
        stats.push(dot(pred_rev, &process[t + 1 - len..=t]));
    }
    stats
}

/// Simulates `samples` prediction errors of the `f_model` predictor on a
/// Gaussian process with spectrum `f_true`.
///
/// The process is white noise filtered by `sqrt(g) / a_true(z)` truncated to
/// `filter_len` taps; the predictor is the length-`filter_len` error filter
/// `a_model(z)`. The first `4 * filter_len` outputs of each substream are
/// discarded. Deterministic in `seed` for any worker count.
pub fn simulate_prediction(
    f_true: &SpectrumGrid,
    f_model: &SpectrumGrid,
    filter_len: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SimulationReport> {
    f_true.ensure_same_len(f_model)?;
    if filter_len == 0 || filter_len > MAX_FILTER_LEN {
        return Err(Error::InvalidArgument(format!(
            "filter length {filter_len} outside 1..={MAX_FILTER_LEN}"
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{samples} samples requested, need at least {MIN_SAMPLES}"
        )));
    }
    let (g_true, h) = inverse_outer(f_true, filter_len)?;
    let model = factorize_truncated(f_model, filter_len)?;
    let gain = g_true.sqrt();
    let synth_rev: Vec<f64> = h.iter().rev().map(|c| gain * c).collect();
    let pred_rev: Vec<f64> = model.a_coeffs.iter().rev().copied().collect();

    let streams = samples.div_ceil(SUBSTREAM_LEN);
    let parts = exec.map_range(0..streams, |s| {
        let count = SUBSTREAM_LEN.min(samples - s * SUBSTREAM_LEN);
        run_substream(s as u64, seed, count, &synth_rev, &pred_rev)
    });
    let stats = parts.into_iter().fold(Moments::default(), Moments::merge);
    let empirical_variance = stats.m2 / (stats.count - 1.0);
    Ok(SimulationReport {
        empirical_variance,
        analytic_variance: filter_error_variance(&model.a_coeffs, f_true),
        standard_error: empirical_variance * (2.0 / (samples as f64 - 1.0)).sqrt(),
        samples,
        filter_len,
        seed,
    })
}
