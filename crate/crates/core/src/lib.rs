//! Event-driven simulation and verification toolkit for the adjacent walk on
//! the simplex.
//!
//! The model: `N - 1` ordered particles `0 <= x_1 <= ... <= x_{N-1} <= N` on
//! the interval `[0, N]`. Independently at rate one, particle `i` is resampled
//! inside the interval `[x_{i-1}, x_{i+1}]` formed by its neighbours, with a
//! symmetric Beta(α) draw (α = 1 is the uniform heat-bath update). The chain
//! is reversible with respect to the law of `N` i.i.d. Gamma(α) increments
//! conditioned to sum to `N`, and its spectral gap is `1 - cos(π/N)`.
//!
//! The crate provides:
//!
//! * [`simplex`] — configurations, increments, partial orders, and exact
//!   samplers for the equilibrium and related conditioned laws;
//! * [`beta`] — interval Beta densities, samplers, and certified
//!   total-variation computations;
//! * [`dynamics`] — the event-driven chain, the order-preserving grand
//!   coupling, censoring schemes, and the mean-field exchange process;
//! * [`spectral`] — closed-form eigenstructure, exact heat curves, and decay
//!   rate fitting;
//! * [`coupling`] — the maximal-sticking pairwise coupling, the area process,
//!   and coalescence times;
//! * [`estimators`] — Monte Carlo brackets for the total-variation distance
//!   and the empirical checks built on them;
//! * [`stream`] — reproducible counter-based random streams for replica
//!   parallelism.
//!
//! The accompanying book (`book/` in the repository) walks through the model
//! and every estimator with runnable snippets; those snippets are compiled
//! and executed as doctests of this crate.

#![forbid(unsafe_code)]

pub mod beta;
pub mod coupling;
pub mod dynamics;
pub mod estimators;
pub mod simplex;
pub mod spectral;
pub mod stream;

#[cfg(doctest)]
mod book;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("negative increment at index {index}: {value}")]
    NegativeIncrement { index: usize, value: f64 },
    #[error("increments of a pinned configuration must sum to n: got {sum} for n = {n}")]
    BadIncrementSum { sum: f64, n: usize },
    #[error("site {site} out of range 1..={max}")]
    SiteOutOfRange { site: usize, max: usize },
    #[error("mode index {j} out of range 1..={max}")]
    ModeOutOfRange { j: usize, max: usize },
    #[error("gamma normalization failed: zero sum after {retries} retries")]
    ZeroGammaSum { retries: usize },
    #[error("degenerate interval [{lo}, {hi}] carries no density")]
    DegenerateInterval { lo: f64, hi: f64 },
    #[error("quadrature budget exhausted: {panels} panels, requested tol {tol:.3e}")]
    QuadratureBudget { panels: u64, tol: f64 },
    #[error("rejection budget exhausted after {proposals} proposals ({context})")]
    RejectionBudget { proposals: u64, context: String },
    #[error("invalid censor schedule: {0}")]
    InvalidCensorSchedule(String),
    #[error("unknown statistic name: {0:?}")]
    UnknownStatistic(String),
    #[error("decay-fit window is empty after truncation")]
    EmptyFitWindow,
}

pub type Result<T> = std::result::Result<T, Error>;
