//! Prediction-theoretic distances between power spectral densities.
//!
//! Spectra are sampled on a uniform grid over `[-pi, pi)` ([`SpectrumGrid`]).
//! The distances in [`distances`] measure how far the ratio `f1 / f2` is from
//! a constant, and each has a filtering interpretation checked in
//! [`prediction`]: applying the predictor (or smoother) designed for one
//! spectrum to a process with the other inflates the error variance by
//! exactly `exp(delta)`. [`geodesics`] covers the induced path geometry and
//! [`moments`] the moment-constrained approximation problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distances;
pub mod error;
pub mod geodesics;
pub mod moments;
pub mod par;
pub mod prediction;
pub mod spectral;

pub use distances::{distance, DistanceKind, DistanceValue};
pub use error::{Error, Result};
pub use par::Execution;
pub use spectral::{MeanOrder, RationalPsd, SignedGrid, SpectrumGrid};
