use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use super::commands::{cmd_dist, cmd_geodesic, cmd_moments, cmd_surface, cmd_verify, parse_measure, surface_csv};
use super::{json, CliError, MomentSource, SpectrumSpec};
use crate::par::Execution;
use crate::spectral::{builtin, DEFAULT_GRID_LEN, MIN_GRID_LEN};

/// Caps the number of worker threads; `0` or unset means one per core.
pub const THREADS_ENV: &str = "SPECTRAL_METRICS_THREADS";

const SPEC_HELP: &str = "Spectra are JSON files ({\"type\":\"rational\",\"num\":[..],\"den\":[..]}, \
{\"type\":\"samples\",\"values\":[..]}, {\"type\":\"expression\",\"builtin\":\"paper_f1\"}) given as \
positional paths, or builtins given inline with --builtin. Both kinds are taken in command-line order.";

#[derive(Debug, Parser)]
#[command(name = "spectral-metrics", version, about = "Distances, geodesics and moment problems for power spectral densities")]
#[command(after_help = SPEC_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Spectrum spec files.
    #[arg(value_name = "SPEC")]
    specs: Vec<PathBuf>,
    /// Builtin spectrum, usable in place of a spec file.
    #[arg(long = "builtin", value_name = "NAME", long_help = builtin_help())]
    builtin: Vec<String>,
    /// Grid size; a power of two >= 16. Defaults to the length of any samples spec, else 4096.
    #[arg(long)]
    n: Option<usize>,
}

fn builtin_help() -> String {
    format!(
        "Builtin spectrum, usable in place of a spec file. Definitions (|.|^2 at z = e^(j theta)): {}",
        builtin::DEFINITIONS
    )
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance between two spectra.
    Dist {
        #[command(flatten)]
        inputs: Inputs,
        /// ag, sym, kl, smooth, or rs(r,s) with r < s (orders may be inf or -inf).
        #[arg(long, default_value = "ag")]
        measure: String,
        /// Also write the JSON record here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distances from f1 over the family f1^(1-tau) (f2^(1-sigma) f3^sigma)^tau, as CSV.
    Surface {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// Output CSV path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length and geodesic residual of the logarithmic path between two spectra.
    Geodesic {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1001)]
        frames: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check of the mismatched predictor's error variance.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 256)]
        filter_len: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density matching given moments that is closest to a prior.
    Moments {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated R_0,...,R_n, used instead of a source spectrum.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        moments: Option<Vec<f64>>,
        /// Number of lags taken from a source spectrum.
        #[arg(long, default_value_t = 4)]
        n_moments: usize,
        /// Prior spec file; flat if neither this nor --prior-builtin is given.
        #[arg(long, conflicts_with = "prior_builtin")]
        prior: Option<PathBuf>,
        #[arg(long, value_name = "NAME")]
        prior_builtin: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the solution density here as a samples spec.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Spec inputs of a subcommand in command-line order.
fn ordered_specs(matches: &ArgMatches, inputs: &Inputs) -> Result<Vec<SpectrumSpec>, CliError> {
    let indices = |id: &str| -> Vec<usize> { matches.indices_of(id).map(|i| i.collect()).unwrap_or_default() };
    let mut tagged = Vec::new();
    for (idx, path) in indices("specs").into_iter().zip(&inputs.specs) {
        tagged.push((idx, SpectrumSpec::load(path)?));
    }
    for (idx, name) in indices("builtin").into_iter().zip(&inputs.builtin) {
        tagged.push((idx, SpectrumSpec::builtin(name)?));
    }
    tagged.sort_by_key(|(idx, _)| *idx);
    Ok(tagged.into_iter().map(|(_, s)| s).collect())
}

fn exactly<const K: usize>(specs: Vec<SpectrumSpec>) -> Result<[SpectrumSpec; K], CliError> {
    let got = specs.len();
    specs
        .try_into()
        .map_err(|_| CliError::parse("SPEC", format!("expected {K} spectra, got {got}")))
}

/// Grid size from `--n` and any samples specs, which must all agree.
fn grid_len(requested: Option<usize>, specs: &[&SpectrumSpec]) -> Result<usize, CliError> {
    let mut n = requested;
    for len in specs.iter().filter_map(|s| s.native_len()) {
        match n {
            Some(m) if m != len => {
                return Err(CliError::parse(
                    "--n",
                    format!("grid size {m} conflicts with a samples spec of length {len}"),
                ))
            }
            _ => n = Some(len),
        }
    }
    let n = n.unwrap_or(DEFAULT_GRID_LEN);
    if n < MIN_GRID_LEN || !n.is_power_of_two() {
        return Err(CliError::parse("--n", format!("{n} is not a power of two >= {MIN_GRID_LEN}")));
    }
    Ok(n)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::parse(THREADS_ENV, format!("{raw:?} is not a thread count")))?;
    #[cfg(feature = "parallel")]
    if threads > 0 {
        // Only the first configuration in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command, writing
/// its primary output to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = Cli::command().try_get_matches_from(args)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let (_, sub) = matches.subcommand().expect("subcommand is required");
    configure_threads()?;
    let exec = Execution::default();

    match cli.command {
        Command::Dist { inputs, measure, out } => {
            let kind = parse_measure(&measure)?;
            let [a, b] = exactly::<2>(ordered_specs(sub, &inputs)?)?;
            let n = grid_len(inputs.n, &[&a, &b])?;
            let record = cmd_dist(&a, &b, kind, n)?;
            let text = json::to_pretty_string(&record);
            emit(stdout, &format!("{}\n", json::significant(record.value, 12)))?;
            match out {
                Some(path) => write_file(&path, &text)?,
                None => emit(stdout, &text)?,
            }
        }
        Command::Surface { inputs, steps, out } => {
            let [a, b, c] = exactly::<3>(ordered_specs(sub, &inputs)?)?;
            let n = grid_len(inputs.n, &[&a, &b, &c])?;
            let rows = cmd_surface([&a, &b, &c], steps, n, exec)?;
            let csv = surface_csv(&rows);
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => emit(stdout, &csv)?,
            }
        }
        Command::Geodesic { inputs, frames, out } => {
            let [a, b] = exactly::<2>(ordered_specs(sub, &inputs)?)?;
            let n = grid_len(inputs.n, &[&a, &b])?;
            let report = cmd_geodesic(&a, &b, frames, n, exec)?;
            let text = json::to_pretty_string(&report);
            match out {
                Some(path) => write_file(&path, &text)?,
                None => emit(stdout, &text)?,
            }
        }
        Command::Verify {
            inputs,
            samples,
            filter_len,
            seed,
            out,
        } => {
            let [a, b] = exactly::<2>(ordered_specs(sub, &inputs)?)?;
            let n = grid_len(inputs.n, &[&a, &b])?;
            let report = cmd_verify(&a, &b, samples, filter_len, seed, n, exec)?;
            let text = json::to_pretty_string(&report);
            if let Some(path) = &out {
                write_file(path, &text)?;
            }
            emit(stdout, &text)?;
            emit(stdout, if report.pass { "PASS\n" } else { "FAIL\n" })?;
            if !report.pass {
                return Err(CliError::VerifyFailed { z: report.z_score });
            }
        }
        Command::Moments {
            inputs,
            moments,
            n_moments,
            prior,
            prior_builtin,
            tol,
            out,
        } => {
            let specs = ordered_specs(sub, &inputs)?;
            let source = match (moments, specs.len()) {
                (Some(r), 0) => MomentSource::Moments(r),
                (None, 1) => MomentSource::Spectrum {
                    spec: specs.into_iter().next().expect("one spec"),
                    n_moments,
                },
                (Some(_), _) => {
                    return Err(CliError::parse("--moments", "give either --moments or a source spectrum, not both"))
                }
                (None, k) => return Err(CliError::parse("SPEC", format!("expected 1 source spectrum, got {k}"))),
            };
            let prior = match (prior, prior_builtin) {
                (Some(path), _) => Some(SpectrumSpec::load(&path)?),
                (None, Some(name)) => Some(SpectrumSpec::builtin(&name)?),
                (None, None) => None,
            };
            let mut grid_specs: Vec<&SpectrumSpec> = prior.iter().collect();
            if let MomentSource::Spectrum { spec, .. } = &source {
                grid_specs.push(spec);
            }
            let n = grid_len(inputs.n, &grid_specs)?;
            let (report, density) = cmd_moments(&source, prior.as_ref(), n, tol)?;
            emit(stdout, &json::to_pretty_string(&report))?;
            if let Some(path) = out {
                write_file(&path, &json::to_pretty_string(&density))?;
            }
        }
    }
    Ok(())
}
