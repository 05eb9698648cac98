use serde::Serialize;

use super::{json, CliError, SpectrumSpec};
use crate::distances::{delta_ag, delta_kl, delta_sym, distance, DistanceKind};
use crate::error::Error;
use crate::geodesics::{geodesic_residual, log_interval, logpath_length, path_length, GeodesicPath};
use crate::moments::{compute_moments, solve_ag_closest, MomentVector, SolverOptions};
use crate::par::Execution;
use crate::prediction::{prediction_variance, simulate_prediction, SimulationReport};
use crate::spectral::{MeanOrder, SpectrumGrid};

pub const SURFACE_HEADER: &str = "tau,sigma,delta_ag,delta_sym,delta_kl";

/// Parses `ag`, `sym`, `kl`, `smooth` or `rs(r,s)`; `r` and `s` may be `inf` or `-inf`.
pub fn parse_measure(text: &str) -> Result<DistanceKind, CliError> {
    let bad = |msg: String| CliError::parse("--measure", msg);
    match text.trim() {
        "ag" => Ok(DistanceKind::Ag),
        "sym" => Ok(DistanceKind::Sym),
        "kl" => Ok(DistanceKind::Kl),
        "smooth" => Ok(DistanceKind::Smooth),
        other => {
            let inner = other
                .strip_prefix("rs(")
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| bad(format!("unknown measure {other:?}; expected ag, sym, kl, smooth or rs(r,s)")))?;
            let (r, s) = inner
                .split_once(',')
                .ok_or_else(|| bad(format!("{other:?} needs two orders, as in rs(0,1)")))?;
            let order = |t: &str| -> Result<MeanOrder, CliError> {
                let v: f64 = t.trim().parse().map_err(|_| bad(format!("order {t:?} is not a number")))?;
                if v.is_nan() {
                    return Err(bad("order is NaN".into()));
                }
                Ok(MeanOrder::new(v))
            };
            Ok(DistanceKind::Rs {
                r: order(r)?,
                s: order(s)?,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistRecord {
    pub measure: String,
    pub n: usize,
    /// SHA-256 of each input spec.
    pub inputs: [String; 2],
    /// `null` when an underlying power mean overflowed.
    pub value: f64,
}

pub fn cmd_dist(
    spec1: &SpectrumSpec,
    spec2: &SpectrumSpec,
    kind: DistanceKind,
    n: usize,
) -> Result<DistRecord, CliError> {
    let f1 = spec1.resolve(n)?;
    let f2 = spec2.resolve(n)?;
    let value = distance(&f1, &f2, kind).map_err(|e| match e {
        Error::BadOrder { .. } => CliError::parse("--measure", e.to_string()),
        e => CliError::numeric("distance")(e),
    })?;
    Ok(DistRecord {
        measure: kind.to_string(),
        n,
        inputs: [spec1.digest(), spec2.digest()],
        value: value.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub tau: f64,
    pub sigma: f64,
    pub delta_ag: f64,
    pub delta_sym: f64,
    pub delta_kl: f64,
}

/// Distances from `f1` to `f1^(1-tau) (f2^(1-sigma) f3^sigma)^tau` on a
/// `(steps+1) x (steps+1)` grid, `tau`-major.
pub fn cmd_surface(
    specs: [&SpectrumSpec; 3],
    steps: usize,
    n: usize,
    exec: Execution,
) -> Result<Vec<SurfaceRow>, CliError> {
    if steps < 2 {
        return Err(CliError::parse("--steps", format!("{steps} is below 2")));
    }
    let [f1, f2, f3] = [0, 1, 2].map(|i| specs[i].resolve(n));
    let (f1, f2, f3) = (f1?, f2?, f3?);
    let side = steps + 1;
    let at = |i: usize| i as f64 / steps as f64;
    exec.try_map_range(0..side * side, |cell| {
        let (tau, sigma) = (at(cell / side), at(cell % side));
        let edge = log_interval(&f2, &f3, sigma)?;
        let f = log_interval(&f1, &edge, tau)?;
        Ok(SurfaceRow {
            tau,
            sigma,
            delta_ag: delta_ag(&f1, &f)?.value,
            delta_sym: delta_sym(&f1, &f)?.value,
            delta_kl: delta_kl(&f1, &f)?.value,
        })
    })
    .map_err(CliError::numeric("surface"))
}

pub fn surface_csv(rows: &[SurfaceRow]) -> String {
    let mut out = String::with_capacity(96 * (rows.len() + 1));
    out.push_str(SURFACE_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.tau, r.sigma, r.delta_ag, r.delta_sym, r.delta_kl].map(json::float17);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub n: usize,
    pub frames: usize,
    pub logpath_length: f64,
    pub path_length: f64,
    /// Absent when the path has (numerically) zero speed.
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn cmd_geodesic(
    spec1: &SpectrumSpec,
    spec2: &SpectrumSpec,
    frames: usize,
    n: usize,
    exec: Execution,
) -> Result<GeodesicReport, CliError> {
    let f1 = spec1.resolve(n)?;
    let f2 = spec2.resolve(n)?;
    let path = GeodesicPath::logarithmic(&f1, &f2, frames, exec).map_err(|e| match e {
        Error::TooFewFrames(..) => CliError::parse("--frames", e.to_string()),
        e => CliError::numeric("geodesic")(e),
    })?;
    let numeric = CliError::numeric;
    let logpath = logpath_length(&f1, &f2).map_err(numeric("logpath_length"))?;
    let length = path_length(&path, exec).map_err(numeric("path_length"))?;
    let (residual, note) = match geodesic_residual(&path, exec) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::ZeroSpeed { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(numeric("geodesic_residual")(e)),
    };
    Ok(GeodesicReport {
        n,
        frames,
        logpath_length: logpath,
        path_length: length,
        residual,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    #[serde(flatten)]
    pub simulation: SimulationReport,
    pub n: usize,
    /// `exp(delta_ag(f_true, f_model)) * g_true`, the infinite-filter limit.
    pub closed_form_variance: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Passing band for [`cmd_verify`], in standard errors.
pub const VERIFY_BAND: f64 = 4.0;

pub fn cmd_verify(
    spec_true: &SpectrumSpec,
    spec_model: &SpectrumSpec,
    samples: usize,
    filter_len: usize,
    seed: u64,
    n: usize,
    exec: Execution,
) -> Result<VerifyReport, CliError> {
    let f_true = spec_true.resolve(n)?;
    let f_model = spec_model.resolve(n)?;
    let simulation = simulate_prediction(&f_true, &f_model, filter_len, samples, seed, exec).map_err(|e| match e {
        Error::InvalidArgument(_) | Error::TooManyCoefficients { .. } => {
            CliError::parse("--samples/--filter-len", e.to_string())
        }
        e => CliError::numeric("simulation")(e),
    })?;
    let d = delta_ag(&f_true, &f_model).map_err(CliError::numeric("delta_ag"))?;
    let z_score = simulation.z_score();
    Ok(VerifyReport {
        n,
        closed_form_variance: d.value.exp() * prediction_variance(&f_true),
        pass: z_score <= VERIFY_BAND,
        z_score,
        simulation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentSource {
    Spectrum { spec: SpectrumSpec, n_moments: usize },
    Moments(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentsReport {
    pub n: usize,
    pub moments: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub kappa: f64,
    pub residual: f64,
    pub kappa_mismatch: f64,
    pub iterations: usize,
    /// `delta_ag(solution, prior)`.
    pub distance_to_prior: f64,
}

/// Solves the moment problem and returns the report together with the
/// solution density as a reusable samples spec.
pub fn cmd_moments(
    source: &MomentSource,
    prior: Option<&SpectrumSpec>,
    n: usize,
    tol: f64,
) -> Result<(MomentsReport, SpectrumSpec), CliError> {
    let moments = match source {
        MomentSource::Spectrum { spec, n_moments } => {
            let f = spec.resolve(n)?;
            compute_moments(&f, *n_moments).map_err(|e| match e {
                Error::TooManyMoments { .. } => CliError::parse("--n-moments", e.to_string()),
                e => CliError::numeric("moments")(e),
            })?
        }
        MomentSource::Moments(r) => {
            MomentVector::new(r.clone()).map_err(|e| CliError::parse("--moments", e.to_string()))?
        }
    };
    let prior = match prior {
        Some(spec) => spec.resolve(n)?,
        None => SpectrumGrid::constant(n, 1.0).map_err(CliError::numeric("prior"))?,
    };
    let opts = SolverOptions {
        tol,
        ..Default::default()
    };
    let sol = solve_ag_closest(&moments, &prior, opts).map_err(|e| match e {
        Error::NotConverged { .. } | Error::InfeasibleStart(_) => CliError::Solver { source: e },
        Error::InvalidArgument(_) => CliError::parse("--tol", e.to_string()),
        Error::TooManyMoments { .. } => CliError::parse("--moments", e.to_string()),
        e => CliError::numeric("moment solver")(e),
    })?;
    let distance_to_prior = delta_ag(&sol.density, &prior)
        .map_err(CliError::numeric("distance to prior"))?
        .value;
    let report = MomentsReport {
        n,
        moments: moments.values().to_vec(),
        lambdas: sol.lambdas,
        kappa: sol.kappa,
        residual: sol.residual,
        kappa_mismatch: sol.kappa_mismatch,
        iterations: sol.iterations,
        distance_to_prior,
    };
    let density = SpectrumSpec::Samples {
        values: sol.density.into_values(),
    };
    Ok((report, density))
}
