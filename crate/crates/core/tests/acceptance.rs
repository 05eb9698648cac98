//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when
//! earlier criteria fail. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_metrics::cli::{cmd_dist, cmd_surface, SpectrumSpec};
use spectral_metrics::distances::{delta_ag, delta_kl, delta_smooth, delta_sym};
use spectral_metrics::geodesics::{
    expansion_residual, geodesic_residual, log_interval, logpath_length, path_length, quadratic_form,
    uniform_taus, GeodesicPath, QuadraticFormKind,
};
use spectral_metrics::moments::{compute_moments, max_entropy_reference, solve_ag_closest, SolverOptions};
use spectral_metrics::prediction::{
    mismatched_prediction_variance, mismatched_smoothing_variance, prediction_variance, simulate_prediction,
    smoothing_variance, VarianceMethod,
};
use spectral_metrics::spectral::{builtin, generalized_mean, mean, MeanOrder};
use spectral_metrics::{distance, DistanceKind, Execution, RationalPsd, SignedGrid, SpectrumGrid};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"))
}

fn ma_half(n: usize) -> SpectrumGrid {
    RationalPsd::new(vec![1.0, -0.5], vec![1.0]).unwrap().sample(n).unwrap()
}

fn paper(n: usize) -> [SpectrumGrid; 3] {
    [builtin::f1(), builtin::f2(), builtin::f3()].map(|f| f.sample(n).unwrap())
}

fn dilog(x: f64) -> f64 {
    (1..200).map(|k| x.powi(k) / (k * k) as f64).sum()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn ar1_closed_forms() -> Outcome {
    let start = Instant::now();
    let n = 8192;
    let ones = SpectrumGrid::constant(n, 1.0).unwrap();
    let ma = ma_half(n);
    let checks = [
        ("delta_ag", delta_ag(&ones, &ma).unwrap().value, (4.0_f64 / 3.0).ln()),
        ("delta_sym", delta_sym(&ones, &ma).unwrap().value, (5.0_f64 / 3.0).ln()),
        ("delta_kl", delta_kl(&ones, &ma).unwrap().value, 1.25_f64.ln()),
        ("delta_smooth", delta_smooth(&ones, &ma).unwrap().value, (5.0_f64 / 3.0).ln()),
        ("logpath_length", logpath_length(&ones, &ma).unwrap(), (2.0 * dilog(0.25)).sqrt()),
    ];
    let mut worst = 0.0_f64;
    for (name, got, want) in checks {
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-9, || format!("{name} = {got:.15}, expected {want:.15}"))?;
    }
    within_time(start, Duration::from_secs(1), "closed forms")?;
    Ok(format!("max abs error {worst:.1e}"))
}

fn filtering_oracle() -> Outcome {
    let start = Instant::now();
    let f = paper(8192);
    let mut worst_pred = 0.0_f64;
    let mut worst_smooth = 0.0_f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let (a, b) = (&f[i], &f[j]);
        let pred = mismatched_prediction_variance(a, b, 2048, VarianceMethod::TruncatedFilter).unwrap()
            / prediction_variance(a);
        let e_pred = rel(pred, delta_ag(a, b).unwrap().value.exp());
        let smooth = mismatched_smoothing_variance(a, b).unwrap() / smoothing_variance(a);
        let e_smooth = rel(smooth, delta_smooth(a, b).unwrap().value.exp());
        ensure(e_pred <= 1e-6, || format!("(f{},f{}) prediction ratio rel. error {e_pred:.2e}", i + 1, j + 1))?;
        ensure(e_smooth <= 1e-8, || format!("(f{},f{}) smoothing ratio rel. error {e_smooth:.2e}", i + 1, j + 1))?;
        worst_pred = worst_pred.max(e_pred);
        worst_smooth = worst_smooth.max(e_smooth);
    }
    within_time(start, Duration::from_secs(5), "oracle pairs")?;
    Ok(format!("prediction {worst_pred:.1e}, smoothing {worst_smooth:.1e}"))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let n = 4096;
    let arma = RationalPsd::new(vec![1.0, 0.4], vec![1.0, -0.6, 0.3]).unwrap().sample(n).unwrap();
    let ar1 = RationalPsd::new(vec![1.0], vec![1.0, -0.5]).unwrap().sample(n).unwrap();
    let ones = SpectrumGrid::constant(n, 1.0).unwrap();
    let cases = [
        ("matched ARMA(2,1)", &arma, &arma, 0.0),
        ("AR(1) process, white model", &ar1, &ones, 4.0 / 3.0),
        ("white process, MA(1) model", &ones, &ma_half(n), 4.0 / 3.0),
    ];
    let mut parts = Vec::new();
    for (name, f_true, f_model, closed) in cases {
        let r = simulate_prediction(f_true, f_model, 256, 1_000_000, 20240601, Execution::Parallel).unwrap();
        ensure(r.z_score() <= 4.0, || {
            format!("{name}: empirical {} vs analytic {} ({:.2} SE)", r.empirical_variance, r.analytic_variance, r.z_score())
        })?;
        if closed > 0.0 {
            ensure(rel(r.analytic_variance, closed) < 1e-10, || format!("{name}: analytic {}", r.analytic_variance))?;
        }
        parts.push(format!("{:.2} SE", r.z_score()));
    }
    within_time(start, Duration::from_secs(30), "simulations")?;
    Ok(parts.join(", "))
}

fn monotone_and_convex() -> Outcome {
    let [f1, f2, f3] = paper(8192);
    let taus = uniform_taus(101);
    for (name, target) in [("f2", &f2), ("f3", &f3)] {
        let d: Vec<f64> = taus
            .iter()
            .map(|&t| delta_ag(&f1, &log_interval(&f1, target, t).unwrap()).unwrap().value)
            .collect();
        for (k, w) in d.windows(2).enumerate() {
            ensure(w[1] >= w[0] - 1e-10, || format!("toward {name}: decrease {:.2e} at step {k}", w[0] - w[1]))?;
        }
    }
    let d: Vec<f64> = taus
        .iter()
        .map(|&t| delta_ag(&f1, &log_interval(&f2, &f3, t).unwrap()).unwrap().value)
        .collect();
    let worst = d.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min);
    ensure(worst >= -1e-8, || format!("second difference {worst:.2e}"))?;
    Ok(format!("min second difference {worst:.2e}"))
}

fn geodesic_suite() -> Outcome {
    let exec = Execution::Parallel;
    let f = paper(4096);
    let mut worst = 0.0_f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let path = GeodesicPath::logarithmic(&f[i], &f[j], 101, exec).unwrap();
        worst = worst.max(geodesic_residual(&path, exec).unwrap());
    }
    ensure(worst <= 1e-9, || format!("log-path residual {worst:.2e}"))?;

    let linear = GeodesicPath::linear(&f[0], &f[1], 101, exec).unwrap();
    let lin_res = geodesic_residual(&linear, exec).unwrap();
    ensure(lin_res > 1e-2, || format!("linear path residual {lin_res:.2e} does not discriminate"))?;

    // Uniform log paths have exactly linear log frames, so differencing is exact.
    let exact = logpath_length(&f[0], &f[1]).unwrap();
    let uniform = path_length(&GeodesicPath::logarithmic(&f[0], &f[1], 251, exec).unwrap(), exec).unwrap();
    ensure((uniform - exact).abs() <= 1e-12 * exact, || format!("uniform log path error {:.2e}", uniform - exact))?;

    // The same geodesic traversed at non-constant speed, phi(tau) = (1 - cos(pi tau)) / 2.
    let errors: Vec<f64> = [251, 501, 1001]
        .iter()
        .map(|&m| {
            let path = GeodesicPath::from_fn(uniform_taus(m), exec, |t| {
                log_interval(&f[0], &f[1], 0.5 * (1.0 - (PI * t).cos()))
            })
            .unwrap();
            (path_length(&path, exec).unwrap() - exact).abs()
        })
        .collect();
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    ensure(ratios.iter().all(|r| *r >= 3.5), || format!("error ratios {ratios:.3?}"))?;
    Ok(format!(
        "log residual {worst:.1e}, linear residual {lin_res:.2}, error ratios {:.3}/{:.3}",
        ratios[0], ratios[1]
    ))
}

fn second_order_expansion() -> Outcome {
    let n = 4096;
    let ones = SpectrumGrid::constant(n, 1.0).unwrap();
    let cos = SignedGrid::from_fn(n, f64::cos).unwrap();
    let q = quadratic_form(&ones, &cos, QuadraticFormKind::Sym).unwrap();
    ensure((q - 0.5).abs() <= 1e-10, || format!("quadratic_form(1, cos, SYM) = {q}"))?;

    let mut report = Vec::new();
    let mut failures = Vec::new();
    for (name, kind) in [
        ("SYM", QuadraticFormKind::Sym),
        ("AG", QuadraticFormKind::Ag),
        ("KL", QuadraticFormKind::Kl),
    ] {
        let cubic: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&eps| expansion_residual(&ones, &cos, eps, kind).unwrap() / (eps * eps * eps))
            .collect();
        let spread = cubic.iter().cloned().fold(f64::MIN, f64::max) / cubic.iter().cloned().fold(f64::MAX, f64::min);
        let shown: Vec<String> = cubic.iter().map(|c| format!("{c:.2e}")).collect();
        report.push(format!("{name} residual/eps^3 = [{}]", shown.join(", ")));
        if !(spread < 2.0) {
            failures.push(format!("{name} spread x{spread:.3e}"));
        }
    }
    if failures.is_empty() {
        Ok(report.join("; "))
    } else {
        Err(format!(
            "{} [{}]; the cos perturbation is odd under theta -> theta + pi, so the cubic term vanishes and the residual is O(eps^4)",
            failures.join(", "),
            report.join("; ")
        ))
    }
}

fn moment_solver() -> Outcome {
    let n = 4096;
    let flat = SpectrumGrid::constant(n, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_sup = 0.0_f64;
    let mut slowest = Duration::ZERO;
    for trial in 0..20 {
        let order = 1 + trial % 6;
        // Moments of a random smooth positive density are positive definite.
        let coeffs: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(-0.4..0.4), rng.random_range(-PI..PI))).collect();
        let f = SpectrumGrid::from_fn(n, |t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * ((k + 1) as f64 * t + ph).cos())
                .sum::<f64>()
                .exp()
        })
        .unwrap();
        let r = compute_moments(&f, order).unwrap();
        let start = Instant::now();
        let sol = solve_ag_closest(&r, &flat, SolverOptions::default())
            .map_err(|e| format!("trial {trial} (order {order}): {e}"))?;
        slowest = slowest.max(start.elapsed());
        let me = max_entropy_reference(&r, n).unwrap();
        let sup = sol.density.values().iter().zip(me.values()).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        worst_sup = worst_sup.max(sup);
        ensure(sup <= 1e-6, || format!("trial {trial}: sup-norm {sup:.2e} from maximum entropy"))?;
        ensure(sol.residual <= 1e-9, || format!("trial {trial}: residual {:.2e}", sol.residual))?;
        let kappa = mean(&sol.density.ratio(&flat).unwrap());
        ensure(rel(kappa, sol.kappa) <= 1e-8, || format!("trial {trial}: kappa {} vs mean {kappa}", sol.kappa))?;
    }
    ensure(slowest < Duration::from_secs(2), || format!("slowest solve {slowest:.2?}"))?;
    Ok(format!("max sup-norm {worst_sup:.1e}, slowest solve {slowest:.2?}"))
}

fn random_grid(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> SpectrumGrid {
    SpectrumGrid::new((0..n).map(|_| rng.random_range(-spread..spread).exp()).collect()).unwrap()
}

fn scale_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let kinds = [
        DistanceKind::Ag,
        DistanceKind::Sym,
        DistanceKind::Kl,
        DistanceKind::Smooth,
        DistanceKind::Rs {
            r: MeanOrder::new(-1.0),
            s: MeanOrder::new(2.0),
        },
        DistanceKind::Rs {
            r: MeanOrder::NegInfinity,
            s: MeanOrder::PosInfinity,
        },
    ];
    let mut worst_scale = 0.0_f64;
    let mut worst_ray = 0.0_f64;
    for pair in 0..100 {
        let f1 = random_grid(&mut rng, 256, 3.0);
        let f2 = random_grid(&mut rng, 256, 3.0);
        let (c1, c2, c3) = (
            rng.random_range(-7.0..7.0_f64).exp(),
            rng.random_range(-7.0..7.0_f64).exp(),
            rng.random_range(-7.0..7.0_f64).exp(),
        );
        let (s1, s2) = (f1.scale(c1).unwrap(), f2.scale(c2).unwrap());
        for kind in kinds {
            let base = distance(&f1, &f2, kind).unwrap().value;
            for moved in [distance(&s1, &f2, kind), distance(&f1, &s2, kind), distance(&s1, &s2, kind)] {
                let e = rel(moved.unwrap().value, base);
                worst_scale = worst_scale.max(e);
                ensure(e <= 1e-11, || format!("pair {pair}, {kind}: relative change {e:.2e}"))?;
            }
            let ray = distance(&f1, &f1.scale(c3).unwrap(), kind).unwrap().value;
            worst_ray = worst_ray.max(ray);
            ensure(ray <= 1e-10, || format!("pair {pair}, {kind}: ray distance {ray:.2e}"))?;
        }
    }
    Ok(format!("max relative change {worst_scale:.1e}, max ray distance {worst_ray:.1e}"))
}

fn surface_regeneration() -> Outcome {
    let start = Instant::now();
    let specs = ["paper_f1", "paper_f2", "paper_f3"].map(|s| SpectrumSpec::builtin(s).unwrap());
    let n = 4096;
    let rows = cmd_surface([&specs[0], &specs[1], &specs[2]], 40, n, Execution::Parallel).map_err(|e| e.to_string())?;
    within_time(start, Duration::from_secs(60), "surface")?;
    ensure(rows.len() == 41 * 41, || format!("{} rows", rows.len()))?;
    for r in &rows {
        let v = [r.delta_ag, r.delta_sym, r.delta_kl];
        ensure(v.iter().all(|x| *x >= 0.0), || format!("negative value at ({}, {})", r.tau, r.sigma))?;
        if r.tau == 0.0 {
            ensure(v.iter().all(|x| *x == 0.0), || format!("nonzero on the tau = 0 edge at sigma = {}", r.sigma))?;
        }
    }
    let corner = |tau: f64, sigma: f64| rows.iter().find(|r| r.tau == tau && r.sigma == sigma).copied().unwrap();
    let mut worst = 0.0_f64;
    for (row, other) in [(corner(1.0, 0.0), &specs[1]), (corner(1.0, 1.0), &specs[2])] {
        for (kind, got) in [(DistanceKind::Ag, row.delta_ag), (DistanceKind::Sym, row.delta_sym), (DistanceKind::Kl, row.delta_kl)] {
            let want = cmd_dist(&specs[0], other, kind, n).map_err(|e| e.to_string())?.value;
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 1e-12, || format!("corner ({}, {}) {kind}: {got} vs {want}", row.tau, row.sigma))?;
        }
    }
    Ok(format!("{} rows in {:.2?}, corner error {worst:.1e}", rows.len(), start.elapsed()))
}

fn power_mean_ordering() -> Outcome {
    let orders = [f64::NEG_INFINITY, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0, f64::INFINITY].map(MeanOrder::new);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..100 {
        let f = random_grid(&mut rng, 256, 5.0);
        let m: Vec<f64> = orders.iter().map(|&r| generalized_mean(&f, r).unwrap()).collect();
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                ensure(m[i] <= m[j] + 1e-12 * m[j], || {
                    format!("trial {trial}: M_{} = {} > M_{} = {}", orders[i], m[i], orders[j], m[j])
                })?;
            }
        }
    }
    Ok("100 grids, 28 ordered pairs each".into())
}

const CRITERIA: [(&str, fn() -> Outcome); 10] = [
    ("AR(1) closed forms", ar1_closed_forms),
    ("filtering-oracle equivalence", filtering_oracle),
    ("Monte Carlo validation", monte_carlo),
    ("monotonicity and convexity along log intervals", monotone_and_convex),
    ("geodesic suite", geodesic_suite),
    ("second-order expansions", second_order_expansion),
    ("moment solver vs maximum entropy", moment_solver),
    ("scale and ray invariance", scale_invariance),
    ("surface regeneration", surface_regeneration),
    ("power-mean ordering", power_mean_ordering),
];

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for i in 0..CRITERIA.len() {
            println!("criterion_{:02}: test", i + 1);
        }
        return ExitCode::SUCCESS;
    }
    let filter = args.iter().find(|a| !a.starts_with('-'));
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in CRITERIA.iter().enumerate() {
        let id = format!("{:02}", i + 1);
        if let Some(f) = filter {
            if !name.contains(f.as_str()) && !id.contains(f.as_str()) {
                continue;
            }
        }
        ran += 1;
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name}: {detail} ({took:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id}] {name}: {detail} ({took:.2?})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
