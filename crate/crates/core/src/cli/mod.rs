//! Command-line front end.
//!
//! Every command resolves its spectra on a common grid, calls into the
//! library, and serializes the result. No arithmetic happens here beyond
//! what the library returns, so printed JSON values are the library's
//! values bit for bit.

mod args;
mod commands;
pub mod json;
mod spec;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use args::{run, THREADS_ENV};
pub use commands::{
    cmd_dist, cmd_geodesic, cmd_moments, cmd_surface, cmd_verify, parse_measure, surface_csv, DistRecord,
    GeodesicReport, MomentSource, MomentsReport, SurfaceRow, VerifyReport, SURFACE_HEADER,
};
pub use spec::SpectrumSpec;

pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
    pub const VERIFY_FAILED: i32 = 5;
    pub const SOLVER: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("invalid {field}: {message}")]
    Parse { field: String, message: String },
    #[error("numeric error ({context}): {source}")]
    Numeric {
        context: String,
        #[source]
        source: crate::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("verification failed: empirical variance is {z:.2} standard errors from the analytic value")]
    VerifyFailed { z: f64 },
    #[error("moment solver failed: {source}")]
    Solver {
        #[source]
        source: crate::Error,
    },
}

impl CliError {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numeric(context: impl Into<String>) -> impl FnOnce(crate::Error) -> Self {
        let context = context.into();
        move |source| CliError::Numeric { context, source }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Parse { .. } => exit::PARSE,
            CliError::Numeric { .. } => exit::NUMERIC,
            CliError::Io { .. } => exit::IO,
            CliError::VerifyFailed { .. } => exit::VERIFY_FAILED,
            CliError::Solver { .. } => exit::SOLVER,
        }
    }
}
