//! Newton solver for the `delta_ag`-closest density under moment constraints.
//!
//! Stationarity of the Lagrangian gives
//!
//! ```text
//! f(theta) = kappa p(theta) / (1 - kappa p(theta) L(theta)),
//! L(theta) = lambda_0 + 2 sum_{k=1}^{n} lambda_k cos(k theta),
//! kappa = mean(f / p),
//! ```
//!
//! for prior `p`. The unknowns `(lambda_0..lambda_n, kappa)` solve the square
//! system formed by the `n + 1` moment equations and the `kappa` equation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{levinson_durbin, CosTable, MomentVector};
use crate::error::{Error, Result};
use crate::spectral::{average, SpectrumGrid};

/// The denominator `1 - kappa p L` must stay above this on every grid point.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;

/// Relative tolerance on `kappa = mean(f/p)`.
const KAPPA_TOL: f64 = 1e-9;

const MAX_HALVINGS: usize = 40;

/// Smallest continuation step before giving up.
const MIN_STEP: f64 = 1.0 / 4096.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest accepted absolute moment mismatch.
    pub tol: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_iter: usize,
    /// Nominal number of homotopy steps from the flat prior to the actual prior.
    pub continuation_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
            continuation_steps: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSolution {
    /// `lambda_0..lambda_n`, with `lambda_{-k} = lambda_k`.
    pub lambdas: Vec<f64>,
    pub kappa: f64,
    #[serde(skip)]
    pub density: SpectrumGrid,
    /// Largest absolute moment mismatch.
    pub residual: f64,
    /// `|mean(density / prior) / kappa - 1|`.
    pub kappa_mismatch: f64,
    /// Total Newton iterations over all continuation stages.
    pub iterations: usize,
}

struct Stage<'a> {
    target: &'a [f64],
    prior: Vec<f64>,
    table: &'a CosTable,
}

struct Eval {
    density: Vec<f64>,
    moment_err: Vec<f64>,
    kappa_err: f64,
}

impl Eval {
    fn residual(&self) -> f64 {
        self.moment_err.iter().fold(0.0_f64, |a, e| a.max(e.abs()))
    }

    fn merit(&self, scale: f64) -> f64 {
        self.moment_err.iter().map(|e| e * e).sum::<f64>() + (scale * self.kappa_err).powi(2)
    }

    fn converged(&self, tol: f64) -> bool {
        self.residual() <= tol && self.kappa_err.abs() <= KAPPA_TOL
    }
}

impl Stage<'_> {
    fn n(&self) -> usize {
        self.prior.len()
    }

    fn multiplier(&self, x: &[f64], j: usize) -> f64 {
        let order = self.table.order();
        x[1..=order]
            .iter()
            .enumerate()
            .fold(x[0], |l, (i, lam)| l + 2.0 * lam * self.table.row(i + 1)[j])
    }

    /// Density and residuals at `x = (lambda, kappa)`, or `None` if the
    /// denominator drops below the floor.
    fn eval(&self, x: &[f64]) -> Option<Eval> {
        let order = self.table.order();
        let kappa = x[order + 1];
        if !(kappa > 0.0) {
            return None;
        }
        let mut density = Vec::with_capacity(self.n());
        for (j, &p) in self.prior.iter().enumerate() {
            let den = 1.0 - kappa * p * self.multiplier(x, j);
            if !(den >= DENOMINATOR_FLOOR) {
                return None;
            }
            density.push(kappa * p / den);
        }
        let moments = self.table.project(&density);
        let moment_err = moments.iter().zip(self.target).map(|(m, r)| m - r).collect();
        let ratio = average(density.iter().zip(&self.prior).map(|(f, p)| f / p), self.n());
        Some(Eval {
            density,
            moment_err,
            kappa_err: ratio / kappa - 1.0,
        })
    }

    /// Analytic Jacobian of `(moment_err, kappa_err)` with respect to `(lambda, kappa)`.
    fn jacobian(&self, x: &[f64], e: &Eval) -> DMatrix<f64> {
        let order = self.table.order();
        let dim = order + 2;
        let n = self.n();
        let kappa = x[order + 1];
        // df/dlambda_i = f^2 w_i (w_0 = 1, w_i = 2 cos(i theta)); df/dkappa = f^2 / (kappa^2 p).
        let sq: Vec<f64> = e.density.iter().map(|f| f * f).collect();
        let basis = |i: usize, j: usize| if i == 0 { 1.0 } else { 2.0 * self.table.row(i)[j] };
        let dfdk: Vec<f64> = sq
            .iter()
            .zip(&self.prior)
            .map(|(s, p)| s / (kappa * kappa * p))
            .collect();
        let mut jac = DMatrix::zeros(dim, dim);
        for k in 0..=order {
            let ck = self.table.row(k);
            for i in 0..=order {
                jac[(k, i)] = average((0..n).map(|j| ck[j] * sq[j] * basis(i, j)), n);
            }
            jac[(k, order + 1)] = average((0..n).map(|j| ck[j] * dfdk[j]), n);
        }
        // kappa_err = mean(f/p)/kappa - 1
        let ratio = e.kappa_err + 1.0;
        for i in 0..=order {
            jac[(order + 1, i)] =
                average((0..n).map(|j| sq[j] * basis(i, j) / self.prior[j]), n) / kappa;
        }
        jac[(order + 1, order + 1)] =
            average((0..n).map(|j| dfdk[j] / self.prior[j]), n) / kappa - ratio / kappa;
        jac
    }

    /// Damped Newton from `x`. Returns the final point, its evaluation, and
    /// the iteration count, or `None` if the stage cannot be solved from `x`.
    fn newton(&self, mut x: Vec<f64>, opts: &SolverOptions, scale: f64) -> (Option<(Vec<f64>, Eval)>, usize, f64) {
        let Some(mut cur) = self.eval(&x) else {
            return (None, 0, f64::INFINITY);
        };
        for iter in 0..opts.max_iter {
            if cur.converged(opts.tol) {
                return (Some((x, cur)), iter, 0.0);
            }
            let jac = self.jacobian(&x, &cur);
            let mut rhs = DVector::from_iterator(
                x.len(),
                cur.moment_err.iter().copied().chain(std::iter::once(cur.kappa_err)),
            );
            rhs.neg_mut();
            let Some(step) = jac.lu().solve(&rhs) else {
                return (None, iter, cur.residual());
            };
            let merit = cur.merit(scale);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
                if let Some(ev) = self.eval(&trial) {
                    if ev.merit(scale) < merit {
                        accepted = Some((trial, ev));
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((nx, ev)) => {
                    x = nx;
                    cur = ev;
                }
                None => return (None, iter + 1, cur.residual()),
            }
        }
        if cur.converged(opts.tol) {
            let r = cur.residual();
            (Some((x, cur)), opts.max_iter, r)
        } else {
            let r = cur.residual();
            (None, opts.max_iter, r)
        }
    }
}

fn finish(x: Vec<f64>, ev: Eval, iterations: usize) -> Result<MomentSolution> {
    let kappa = *x.last().expect("kappa present");
    let residual = ev.residual();
    let kappa_mismatch = ev.kappa_err.abs();
    Ok(MomentSolution {
        lambdas: x[..x.len() - 1].to_vec(),
        kappa,
        density: SpectrumGrid::new(ev.density)?,
        residual,
        kappa_mismatch,
        iterations,
    })
}

fn validate(moments: &MomentVector, prior: &SpectrumGrid, opts: &SolverOptions) -> Result<CosTable> {
    if !(opts.tol >= 1e-12) {
        return Err(Error::InvalidArgument(format!("tolerance {} below 1e-12", opts.tol)));
    }
    let order = moments.order();
    let max = (prior.len() / 4).saturating_sub(1);
    if order > max {
        return Err(Error::TooManyMoments {
            requested: order,
            n: prior.len(),
            max,
        });
    }
    Ok(CosTable::new(prior.len(), order))
}

/// Newton iteration from an explicit starting point `(lambdas, kappa)`,
/// without continuation.
pub fn solve_ag_closest_from(
    moments: &MomentVector,
    prior: &SpectrumGrid,
    lambdas: &[f64],
    kappa: f64,
    opts: SolverOptions,
) -> Result<MomentSolution> {
    let table = validate(moments, prior, &opts)?;
    if lambdas.len() != moments.values().len() {
        return Err(Error::InvalidArgument("one multiplier per moment required".into()));
    }
    let stage = Stage {
        target: moments.values(),
        prior: prior.values().to_vec(),
        table: &table,
    };
    let x: Vec<f64> = lambdas.iter().copied().chain(std::iter::once(kappa)).collect();
    match stage.newton(x, &opts, moments.values()[0]) {
        (Some((x, ev)), iters, _) => finish(x, ev, iters),
        (None, iters, residual) => Err(Error::NotConverged {
            iterations: iters,
            residual,
        }),
    }
}

/// Finds the density matching `moments` that minimizes `delta_ag(f, prior)`
/// over the stationarity family.
///
/// A constant prior starts from the closed-form maximum-entropy solution.
/// Otherwise the target moments are moved from those of the prior itself,
/// where `lambda = 0, kappa = 1` is exact, to `moments` along the straight
/// line between them. Every intermediate sequence is a convex combination of
/// positive definite ones and so stays feasible. The line is walked in
/// `continuation_steps` nominal steps, halving a step whenever Newton fails
/// from the warm start.
pub fn solve_ag_closest(
    moments: &MomentVector,
    prior: &SpectrumGrid,
    opts: SolverOptions,
) -> Result<MomentSolution> {
    let table = validate(moments, prior, &opts)?;
    let r = moments.values();
    let order = moments.order();
    let scale = r[0];
    let p0 = prior.values()[0];

    if prior.values().iter().all(|&p| p == p0) {
        // 1/f = |A|^2/g = 1/(kappa p0) - L, with kappa p0 = R_0.
        let lev = levinson_durbin(r).map_err(|e| Error::InfeasibleStart(e.to_string()))?;
        let auto = |k: usize| -> f64 { (0..=order - k).map(|i| lev.a[i] * lev.a[i + k]).sum() };
        let mut x = vec![0.0; order + 2];
        x[0] = 1.0 / r[0] - auto(0) / lev.error;
        for (k, xk) in x.iter_mut().enumerate().take(order + 1).skip(1) {
            *xk = -auto(k) / lev.error;
        }
        x[order + 1] = r[0] / p0;
        let stage = Stage {
            target: r,
            prior: prior.values().to_vec(),
            table: &table,
        };
        return match stage.newton(x, &opts, scale) {
            (Some((x, ev)), iters, _) => finish(x, ev, iters),
            (None, iters, residual) => Err(Error::NotConverged {
                iterations: iters,
                residual,
            }),
        };
    }

    let start = table.project(prior.values());
    let mut x = vec![0.0; order + 2];
    x[order + 1] = 1.0;
    let mut ev = None;
    let mut iterations = 0;
    let nominal = 1.0 / opts.continuation_steps.max(1) as f64;
    let mut s = 0.0_f64;
    let mut ds = nominal;
    let mut last_residual = f64::INFINITY;
    while s < 1.0 {
        let next = if s + ds >= 1.0 - 1e-12 { 1.0 } else { s + ds };
        let target: Vec<f64> = start
            .iter()
            .zip(r)
            .map(|(a, b)| if next == 1.0 { *b } else { (1.0 - next) * a + next * b })
            .collect();
        let stage = Stage {
            target: &target,
            prior: prior.values().to_vec(),
            table: &table,
        };
        let (sol, it, res) = stage.newton(x.clone(), &opts, scale);
        iterations += it;
        match sol {
            Some((nx, nev)) => {
                x = nx;
                ev = Some(nev);
                s = next;
                ds = (2.0 * ds).min(nominal);
            }
            None => {
                if res.is_finite() {
                    last_residual = res;
                }
                ds *= 0.5;
                if ds < MIN_STEP {
                    return Err(Error::NotConverged {
                        iterations,
                        residual: last_residual,
                    });
                }
            }
        }
    }
    finish(x, ev.expect("final stage solved"), iterations)
}
