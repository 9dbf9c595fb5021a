//! moyal-lab: a numerical laboratory for quantum dynamics in phase space.
//!
//! The crate evolves Wigner functions w(x, p, t) under four interchangeable
//! laws — the classical Liouville flow, the full Moyal (sine-operator)
//! evolution evaluated spectrally, its truncated series, and the
//! sinh-signed series variant — and cross-checks them against an independent
//! split-operator Schrödinger solver through the Wigner transform. On top of
//! the dynamics sit a stochastic phase-space smearing construction with the
//! dispersion constraint ⟨ξ²⟩⟨η²⟩ = ℏ²/4 and a projective-measurement toy
//! with √N device averaging.
//!
//! Everything is a pure function of its inputs; grids are periodic, uniform
//! and power-of-two sized so the pseudo-differential operators reduce to
//! exact FFT multipliers.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod measurement;
pub mod schrodinger;
pub mod smearing;
pub mod state;

pub use error::{Error, Result};
pub use evolution::{
    check_sin_sinh_substitution, evaluate_rhs, evolve, evolve_with, liouville_rhs,
    moyal_rhs_spectral, moyal_rhs_truncated, nonlocal_derivative, series_term, sinh_rhs,
    stability_bound, step, EvolutionConfig, Method, RhsField, ShiftVariant, SubstitutionReport,
    Trajectory,
};
pub use grid::{make_grid, natural_momentum_range, PhaseSpaceGrid};
pub use hamiltonian::{Hamiltonian, Potential};
pub use measurement::{
    cell_probabilities, debroglie_run, project_collapse, tau_macro, two_cell_superposition,
    CellOutcome, CellPartition, DebroglieReport, MeasurementModel,
};
pub use schrodinger::{
    evolve_oracle, evolve_wavefunction, gaussian_packet, split_step, wigner_transform,
    OracleTrajectory, TransformDiagnostics, WaveFunction,
};
pub use smearing::{
    check_operator_relations, make_distribution, sample, smeared_density, OperatorRelationReport,
    SmearingDistribution, SmearingEnsemble,
};
pub use state::{
    gaussian_wigner, observable_from_fn, random_band_limited, DensityProfile, MarginalAxis,
    Warning, WignerState,
};
