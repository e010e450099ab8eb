use thiserror::Error;

use crate::fockspace::Truncation;

/// Errors raised by model construction, solvers and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("rotating frame requires a coherent drive, but `{0}` is unset")]
    MissingDrive(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tridiagonal eigensolver did not converge for manifold N = {block}")]
    EigenConvergence { block: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "grid [{grid_lo}, {grid_hi}] does not cover transitions in [{need_lo}, {need_hi}]; \
         the spectrum would be clipped"
    )]
    GridCoverage {
        grid_lo: f64,
        grid_hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("steady state is singular or not unique (residual {residual:e})")]
    SingularSteadyState { residual: f64 },

    #[error("photon statistics unmeasurable: n_cav = {n_cav:e}")]
    Unmeasurable { n_cav: f64 },

    #[error(
        "step control failed at tau = {tau}: step fell below {h_min:e} \
         (largest |L| eigenvalue scale ~ {scale_hint:e})"
    )]
    StepControl { tau: f64, h_min: f64, scale_hint: f64 },

    #[error(
        "truncation {current} too small: edge populations photon {photon:e}, trion {trion:e}; \
         recommended {recommended}"
    )]
    Truncation {
        current: Truncation,
        photon: f64,
        trion: f64,
        recommended: Truncation,
    },

    #[error("no blockade: g2(0) landscape is flat (spread {spread:e})")]
    NoBlockade { spread: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
