use thiserror::Error;

/// Errors raised by the physics and numerics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}` (expected case-a or case-b)")]
    UnknownPreset(String),

    #[error("selection rule violated: |j3 - j2| = {0} > 1")]
    SelectionRule(i64),

    #[error("unsupported polarization: {0}")]
    UnsupportedPolarization(String),

    #[error("no unique steady state: transit rate must be positive for an open system")]
    SingularSystem,

    #[error("steady-state solve failed (pivot ratio {condition:.3e})")]
    SolverFailure { condition: f64 },

    #[error("Faddeeva function argument outside supported domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimated error {error:.3e} after {intervals} intervals")]
    NonConvergence { error: f64, intervals: usize },

    #[error("degenerate cascade denominator: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite result at delta1 = {0} MHz")]
    NonFinite(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
