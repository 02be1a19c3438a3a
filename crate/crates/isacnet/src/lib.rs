//! Network-level analysis and planning of dual-functional radar-communication
//! (DFRC / ISAC) cellular deployments.
//!
//! Base stations, users, and sensing targets are modeled as independent
//! Poisson point processes. The crate provides three engines that share one
//! configuration:
//!
//! * [`analytic`] — closed-form potential spectral efficiencies (PSE) of the
//!   communication and radar subsystems, their energy efficiency, and the
//!   interference-distribution machinery (MGF, Euler-series and Gil-Pelaez
//!   CDF inversion) used to validate them.
//! * [`montecarlo`] — a snapshot simulator of the full downlink signal model
//!   (ZF precoding, MVDR receive filtering, PPP interference) that serves as
//!   ground truth for every closed form.
//! * [`optimizer`] — solvers for the EE-maximizing base-station density:
//!   safeguarded Newton on the joint objective, the communications-only
//!   closed form, the radar-only cubic reductions, and a grid-search oracle.
//!
//! [`numerics`] holds the shared special-function and quadrature primitives,
//! [`model`] the domain configuration and power model, and [`cli`] the batch
//! front-end behind the `isacnet` binary.

pub mod analytic;
pub mod cli;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;

use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A result could not be produced at the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// A numerical procedure failed (singular system, indefinite matrix, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// An iterative solver exhausted its iteration budget.
    #[error("did not converge: {0}")]
    NonConvergence(String),
    /// No admissible solution exists for the given inputs.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// A configuration file could not be parsed.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
