//! Logarithmic intervals, the quadratic forms induced by the distances, and
//! path lengths in the resulting (pseudo-)Riemannian geometry.
//!
//! The metric only sees `d/dtau log f_tau`, so paths are handled through
//! their log-frames `x_tau = log f_tau`. Along a logarithmic interval
//! `f_a^(1-tau) f_b^tau` that velocity is constant in `tau`, which is the
//! geodesic condition checked by [`geodesic_residual`].

use crate::distances::{ag_raw, kl_raw, sym_raw};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::spectral::{average, SignedGrid, SpectrumGrid};

/// Floor on the per-frame speed below which the normalized velocity is undefined.
pub const SPEED_FLOOR: f64 = 1e-12;

/// Tolerance on `|mean(f) - 1|` for the KL quadratic form.
pub const UNIT_MEAN_TOLERANCE: f64 = 1e-9;

/// `fa^(1-tau) * fb^tau`, pointwise.
pub fn log_interval(fa: &SpectrumGrid, fb: &SpectrumGrid, tau: f64) -> Result<SpectrumGrid> {
    fa.ensure_same_len(fb)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    let head = 1.0 - tau;
    SpectrumGrid::new(
        fa.values()
            .iter()
            .zip(fb.values())
            .map(|(a, b)| a.powf(head) * b.powf(tau))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadraticFormKind {
    Sym,
    Ag,
    Kl,
}

fn check_delta(f: &SpectrumGrid, delta: &SignedGrid) -> Result<()> {
    if f.len() != delta.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: delta.len(),
        });
    }
    Ok(())
}

/// Second-order coefficient of `d(f, f + eps*delta)` in `eps`.
///
/// `Sym`: `var(delta/f)`; `Ag`: half of that; `Kl`: `(mean(delta^2/f) - mean(delta)^2) / 2`,
/// which requires `f` to have unit mean.
pub fn quadratic_form(f: &SpectrumGrid, delta: &SignedGrid, kind: QuadraticFormKind) -> Result<f64> {
    check_delta(f, delta)?;
    let n = f.len();
    let rel = || {
        SignedGrid::new(
            delta
                .values()
                .iter()
                .zip(f.values())
                .map(|(d, v)| d / v)
                .collect(),
        )
    };
    match kind {
        QuadraticFormKind::Sym => Ok(rel()?.variance()),
        QuadraticFormKind::Ag => Ok(0.5 * rel()?.variance()),
        QuadraticFormKind::Kl => {
            let m = crate::spectral::mean(f);
            if (m - 1.0).abs() > UNIT_MEAN_TOLERANCE {
                return Err(Error::UnnormalizedDensity { mean: m });
            }
            let sq = average(
                delta.values().iter().zip(f.values()).map(|(d, v)| d * d / v),
                n,
            );
            let lin = delta.mean();
            Ok(0.5 * (sq - lin * lin))
        }
    }
}

/// `|d(f, f + eps*delta) - eps^2 * quadratic_form(f, delta)|` for the matching distance.
pub fn expansion_residual(
    f: &SpectrumGrid,
    delta: &SignedGrid,
    eps: f64,
    kind: QuadraticFormKind,
) -> Result<f64> {
    check_delta(f, delta)?;
    let worst = delta
        .values()
        .iter()
        .zip(f.values())
        .fold(0.0_f64, |acc, (d, v)| acc.max((eps * d / v).abs()));
    if worst >= 1.0 {
        return Err(Error::PerturbationTooLarge(worst));
    }
    let q = quadratic_form(f, delta, kind)?;
    let moved = SpectrumGrid::new(
        f.values()
            .iter()
            .zip(delta.values())
            .map(|(v, d)| v + eps * d)
            .collect(),
    )?;
    // Unclamped values: the residual is far below the distance clamp.
    let d = match kind {
        QuadraticFormKind::Sym => sym_raw(f, &moved),
        QuadraticFormKind::Ag => ag_raw(f, &moved),
        QuadraticFormKind::Kl => kl_raw(f, &moved),
    };
    Ok((d - eps * eps * q).abs())
}

/// Length of the logarithmic interval from `f0` to `f1`: the standard
/// deviation of `log(f1/f0)` over frequency.
pub fn logpath_length(f0: &SpectrumGrid, f1: &SpectrumGrid) -> Result<f64> {
    f0.ensure_same_len(f1)?;
    let diff = f1.ln().sub(&f0.ln())?;
    Ok(diff.variance().sqrt())
}

/// `m` equally spaced parameters from 0 to 1.
pub fn uniform_taus(m: usize) -> Vec<f64> {
    let last = (m.max(2) - 1) as f64;
    (0..m).map(|i| i as f64 / last).collect()
}

/// A sampled path `tau -> f_tau` with `tau` running from 0 to 1.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    taus: Vec<f64>,
    frames: Vec<SpectrumGrid>,
    exact_velocity: Option<SignedGrid>,
}

impl GeodesicPath {
    pub fn new(taus: Vec<f64>, frames: Vec<SpectrumGrid>) -> Result<Self> {
        if taus.len() != frames.len() {
            return Err(Error::InvalidPath(format!(
                "{} parameters for {} frames",
                taus.len(),
                frames.len()
            )));
        }
        if frames.len() < 2 {
            return Err(Error::TooFewFrames(frames.len(), 2));
        }
        if taus[0] != 0.0 || taus[taus.len() - 1] != 1.0 {
            return Err(Error::InvalidPath("parameters must run from 0 to 1".into()));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath("parameters must be strictly increasing".into()));
        }
        let n = frames[0].len();
        if let Some(bad) = frames.iter().find(|f| f.len() != n) {
            return Err(Error::LengthMismatch {
                left: n,
                right: bad.len(),
            });
        }
        Ok(Self {
            taus,
            frames,
            exact_velocity: None,
        })
    }

    /// Evaluates `frame(tau)` at every parameter; frames are built independently.
    pub fn from_fn<F>(taus: Vec<f64>, exec: Execution, frame: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<SpectrumGrid> + Sync + Send,
    {
        let frames = exec.try_map_range(0..taus.len(), |i| frame(taus[i]))?;
        Self::new(taus, frames)
    }

    /// The logarithmic interval from `fa` to `fb` on `m` uniform parameters.
    pub fn logarithmic(fa: &SpectrumGrid, fb: &SpectrumGrid, m: usize, exec: Execution) -> Result<Self> {
        let mut path = Self::from_fn(uniform_taus(m), exec, |t| log_interval(fa, fb, t))?;
        path.exact_velocity = Some(fb.ln().sub(&fa.ln())?);
        Ok(path)
    }

    /// The straight segment `(1-tau) f0 + tau f1`; not a geodesic in general.
    pub fn linear(f0: &SpectrumGrid, f1: &SpectrumGrid, m: usize, exec: Execution) -> Result<Self> {
        f0.ensure_same_len(f1)?;
        Self::from_fn(uniform_taus(m), exec, |t| {
            SpectrumGrid::new(
                f0.values()
                    .iter()
                    .zip(f1.values())
                    .map(|(a, b)| (1.0 - t) * a + t * b)
                    .collect(),
            )
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn frames(&self) -> &[SpectrumGrid] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Analytic `d/dtau log f_tau` for paths built by [`GeodesicPath::logarithmic`].
    pub fn exact_velocity(&self) -> Option<&SignedGrid> {
        self.exact_velocity.as_ref()
    }
}

/// Three-point weights for the derivative at `taus[i]`, second order on any
/// spacing; one-sided at the ends.
fn stencil(taus: &[f64], i: usize) -> ([usize; 3], [f64; 3]) {
    let m = taus.len();
    if i == 0 {
        let (h1, h2) = (taus[1] - taus[0], taus[2] - taus[1]);
        (
            [0, 1, 2],
            [
                -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                (h1 + h2) / (h1 * h2),
                -h1 / (h2 * (h1 + h2)),
            ],
        )
    } else if i == m - 1 {
        let (h1, h2) = (taus[m - 2] - taus[m - 3], taus[m - 1] - taus[m - 2]);
        (
            [m - 3, m - 2, m - 1],
            [
                h2 / (h1 * (h1 + h2)),
                -(h1 + h2) / (h1 * h2),
                (h1 + 2.0 * h2) / (h2 * (h1 + h2)),
            ],
        )
    } else {
        let (h1, h2) = (taus[i] - taus[i - 1], taus[i + 1] - taus[i]);
        (
            [i - 1, i, i + 1],
            [
                -h2 / (h1 * (h1 + h2)),
                (h2 - h1) / (h1 * h2),
                h1 / (h2 * (h1 + h2)),
            ],
        )
    }
}

/// Finite-difference `d/dtau log f_tau` at every frame.
pub fn velocities(path: &GeodesicPath, exec: Execution) -> Result<Vec<SignedGrid>> {
    let m = path.len();
    if m < 3 {
        return Err(Error::TooFewFrames(m, 3));
    }
    let logs = exec.map_slice(path.frames(), |f| f.ln());
    exec.try_map_range(0..m, |i| {
        let (idx, w) = stencil(path.taus(), i);
        let (a, b, c) = (logs[idx[0]].values(), logs[idx[1]].values(), logs[idx[2]].values());
        SignedGrid::new(
            (0..a.len())
                .map(|k| w[0] * a[k] + w[1] * b[k] + w[2] * c[k])
                .collect(),
        )
    })
}

/// Discretized path length: trapezoid rule over `tau` of the per-frame speed
/// `sqrt(var(d/dtau log f_tau))`.
pub fn path_length(path: &GeodesicPath, exec: Execution) -> Result<f64> {
    let speeds: Vec<f64> = velocities(path, exec)?
        .iter()
        .map(|v| v.variance().sqrt())
        .collect();
    let taus = path.taus();
    Ok(crate::spectral::compensated_sum(
        (0..taus.len() - 1).map(|i| 0.5 * (taus[i + 1] - taus[i]) * (speeds[i] + speeds[i + 1])),
    ))
}

/// Largest pointwise spread, across frames, of the normalized velocity
/// `(x' - mean x') / sqrt(var x')`. Zero for a geodesic.
pub fn geodesic_residual(path: &GeodesicPath, exec: Execution) -> Result<f64> {
    let vel = velocities(path, exec)?;
    let mut normalized = Vec::with_capacity(vel.len());
    for (frame, v) in vel.iter().enumerate() {
        let sd = v.variance().sqrt();
        if !(sd >= SPEED_FLOOR) {
            return Err(Error::ZeroSpeed {
                frame,
                tau: path.taus()[frame],
            });
        }
        let m = v.mean();
        normalized.push(v.values().iter().map(|x| (x - m) / sd).collect::<Vec<_>>());
    }
    let n = normalized[0].len();
    let mut worst = 0.0_f64;
    for k in 0..n {
        let (lo, hi) = normalized
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v[k]), hi.max(v[k])));
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RationalPsd;

    fn ma1(n: usize) -> SpectrumGrid {
        RationalPsd::new(vec![1.0, -0.5], vec![1.0])
            .unwrap()
            .sample(n)
            .unwrap()
    }

    #[test]
    fn log_interval_endpoints_and_midpoint() {
        let a = SpectrumGrid::constant(32, 1.0).unwrap();
        let b = SpectrumGrid::constant(32, std::f64::consts::E).unwrap();
        assert_eq!(log_interval(&a, &b, 0.0).unwrap(), a);
        assert_eq!(log_interval(&a, &b, 1.0).unwrap(), b);
        let mid = log_interval(&a, &b, 0.5).unwrap();
        assert!(mid.values().iter().all(|v| (v - 0.5f64.exp()).abs() < 1e-15));
        assert!(matches!(log_interval(&a, &b, 1.5), Err(Error::TauOutOfRange(_))));
    }

    #[test]
    fn quadratic_form_on_cosine() {
        let ones = SpectrumGrid::constant(4096, 1.0).unwrap();
        let cos = SignedGrid::from_fn(4096, f64::cos).unwrap();
        let sym = quadratic_form(&ones, &cos, QuadraticFormKind::Sym).unwrap();
        let ag = quadratic_form(&ones, &cos, QuadraticFormKind::Ag).unwrap();
        let kl = quadratic_form(&ones, &cos, QuadraticFormKind::Kl).unwrap();
        assert!((sym - 0.5).abs() < 1e-14);
        assert!((ag - 0.25).abs() < 1e-14);
        assert!((kl - 0.25).abs() < 1e-14);
    }

    #[test]
    fn kl_form_requires_unit_mean() {
        let f = SpectrumGrid::constant(64, 2.0).unwrap();
        let d = SignedGrid::zeros(64).unwrap();
        assert!(matches!(
            quadratic_form(&f, &d, QuadraticFormKind::Kl),
            Err(Error::UnnormalizedDensity { .. })
        ));
    }

    #[test]
    fn ray_direction_is_null() {
        let f = ma1(512);
        let along = SignedGrid::from(&f.scale(3.0).unwrap());
        assert!(quadratic_form(&f, &along, QuadraticFormKind::Sym).unwrap() < 1e-12 * 9.0);
        assert!(quadratic_form(&f, &along, QuadraticFormKind::Ag).unwrap() < 1e-12 * 9.0);
    }

    #[test]
    fn residual_errors() {
        let f = SpectrumGrid::constant(64, 1.0).unwrap();
        let d = SignedGrid::from_fn(64, f64::cos).unwrap();
        assert!(matches!(
            expansion_residual(&f, &d, 1.0, QuadraticFormKind::Sym),
            Err(Error::PerturbationTooLarge(_))
        ));
        let zero = SignedGrid::zeros(64).unwrap();
        assert_eq!(
            expansion_residual(&f, &zero, 0.1, QuadraticFormKind::Ag).unwrap(),
            0.0
        );
    }

    #[test]
    fn logpath_of_ray_is_zero_and_symmetric() {
        let f = ma1(1024);
        assert!(logpath_length(&f, &f.scale(4.0).unwrap()).unwrap() < 1e-12);
        let g = crate::spectral::builtin::f2().sample(1024).unwrap();
        assert_eq!(
            logpath_length(&f, &g).unwrap(),
            logpath_length(&g, &f).unwrap()
        );
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let taus = vec![0.0, 0.1, 0.35, 0.5, 0.8, 1.0];
        let q = |t: f64| 3.0 * t * t - t + 2.0;
        let dq = |t: f64| 6.0 * t - 1.0;
        for i in 0..taus.len() {
            let (idx, w) = stencil(&taus, i);
            let est: f64 = (0..3).map(|j| w[j] * q(taus[idx[j]])).sum();
            assert!((est - dq(taus[i])).abs() < 1e-12, "i = {i}");
        }
    }

    #[test]
    fn path_validation() {
        let f = SpectrumGrid::constant(16, 1.0).unwrap();
        assert!(matches!(
            GeodesicPath::new(vec![0.0], vec![f.clone()]),
            Err(Error::TooFewFrames(1, 2))
        ));
        assert!(GeodesicPath::new(vec![0.0, 0.5], vec![f.clone(), f.clone()]).is_err());
        let two = GeodesicPath::new(vec![0.0, 1.0], vec![f.clone(), f.clone()]).unwrap();
        assert!(matches!(
            path_length(&two, Execution::Sequential),
            Err(Error::TooFewFrames(2, 3))
        ));
    }

    #[test]
    fn constant_path() {
        let f = ma1(64);
        let p = GeodesicPath::from_fn(uniform_taus(11), Execution::Sequential, |_| Ok(f.clone()))
            .unwrap();
        assert!(path_length(&p, Execution::Sequential).unwrap() < 1e-12);
        assert!(matches!(
            geodesic_residual(&p, Execution::Sequential),
            Err(Error::ZeroSpeed { frame: 0, .. })
        ));
    }

    #[test]
    fn finite_differences_match_exact_velocity() {
        let a = ma1(256);
        let b = crate::spectral::builtin::f2().sample(256).unwrap();
        let p = GeodesicPath::logarithmic(&a, &b, 21, Execution::Sequential).unwrap();
        let exact = p.exact_velocity().unwrap();
        for v in velocities(&p, Execution::Sequential).unwrap() {
            assert!(v.sub(exact).unwrap().sup_norm() < 1e-11);
        }
    }
}
