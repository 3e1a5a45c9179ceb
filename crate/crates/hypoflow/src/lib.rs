//! # `hypoflow`
//!
//! A desk-scale spectral laboratory for linear kinetic equations of the form
//! `∂_t u + T u = L u`, where `T` is a (possibly confined) transport operator
//! and `L` is one of three degenerately dissipative collision operators:
//! relaxation (BGK-type), Fokker-Planck, and a structure-exact surrogate of
//! the linearized Boltzmann operator.
//!
//! Velocity space is discretized with a Gaussian-weighted tensor Hermite
//! basis, on which the relevant differential operators act as exact ladder
//! (creation/annihilation) matrices. On top of that core the crate provides:
//!
//! - [`mode`]: per-wavenumber Fourier symbol dynamics, temporal energy
//!   functionals with Kawashima-type compensation cross terms, and numeric
//!   certification of exponential (torus) and algebraic (whole space) decay;
//! - [`confined`]: harmonic-potential phase-space dynamics, `H¹`-type
//!   Lyapunov functionals, conserved-moment oscillation laws, and fluid-type
//!   moment system residuals;
//! - [`inequalities`]: eigenvalue certification of the Poincaré and
//!   Korn-type inequalities for Gaussian probability measures;
//! - [`numerics`]: the self-contained dense linear algebra, eigensolver, and
//!   time integrators used by all certification paths;
//! - [`runner`]: a deterministic experiment registry with CSV/JSON/gnuplot
//!   artifact emission.
//!
//! Everything in the certification path is implemented in-repo so a run is
//! auditable end to end; see `README.md` for the CLI.

pub mod collision;
pub mod confined;
pub mod hermite;
pub mod inequalities;
pub mod mode;
pub mod numerics;
pub mod rng;
pub mod runner;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix numerically singular at pivot {pivot} (|pivot| = {value:.3e})")]
    Singular { pivot: usize, value: f64 },
    #[error("matrix not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("inadmissible data: {0}")]
    Inadmissible(String),
    #[error("equivalence guard violated: {0}")]
    GuardViolation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
