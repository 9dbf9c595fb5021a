//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong inside the library proper.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument violates its contract (bad grid size, negative
    /// width, degenerate range, ...). The message names the offending field.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two runtime objects do not fit together (shape mismatch, boundary
    /// outside the grid, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested method cannot handle the given inputs.
    #[error("unsupported: {what} ({hint})")]
    Unsupported { what: String, hint: String },

    /// A spectral shift larger than half the periodic domain would wrap.
    #[error("shift {xi} exceeds half the domain length {half_length}")]
    DomainWrap { xi: f64, half_length: f64 },

    /// Time integration produced a non-finite value.
    #[error("numerical divergence at step {step} (last good snapshot {last_snapshot})")]
    Divergence { step: usize, last_snapshot: usize },

    /// Split-operator propagation produced a non-finite value.
    #[error("wavefunction divergence at step {step}")]
    WaveDivergence { step: usize },

    /// Too many ensemble samples fell outside the histogram grid.
    #[error("coverage error: {off_grid} of {total} samples off-grid (limit {limit_fraction})")]
    Coverage {
        off_grid: usize,
        total: usize,
        limit_fraction: f64,
    },

    /// A projective outcome with (numerically) zero probability was forced.
    #[error("impossible outcome: cell {cell} carries mass {mass} < 1e-12, cannot renormalize")]
    ImpossibleOutcome { cell: String, mass: f64 },

    /// A documented precondition was violated at runtime.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
