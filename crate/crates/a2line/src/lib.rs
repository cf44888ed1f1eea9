//! Numerical engine for the diamagnetic (A²) renormalization of the Ohmic
//! spectral function of a qubit coupled to a one-dimensional waveguide.
//!
//! The waveguide is modeled as a periodic chain of `M` coupled LC oscillators
//! with dimensionless Hamiltonian (qubit gap ω₀ = 1, photon speed v = 1, ℏ = 1)
//!
//! ```text
//!   H = ½ qᵀA q + ½ φᵀB φ + d σˣ F,        F = wᵀq  or  F = wᵀφ,
//! ```
//!
//! where the diamagnetic term (Δ/2)F² is folded into `A` (capacitive coupling,
//! F ∝ charge at the qubit site) or `B` (inductive coupling, F ∝ flux
//! difference across the qubit bond). The crate
//!
//! 1. builds the quadratic model ([`lattice`]),
//! 2. diagonalizes it canonically into normal modes `{ν_n(Δ), f_n(Δ)}`
//!    ([`modes`]),
//! 3. extracts the spectral function J(ν; Δ) = 2πα(Δ) d² ν through cumulative
//!    staircase fits, extrapolates α to the continuum δx → 0, and fits the
//!    decoupling law 2πα(Δ) = (1 + aΔ)⁻ᵇ ([`spectral`]),
//! 4. maps physical transmon-over-line circuit parameters onto (d, Δ, κ) and
//!    evaluates spontaneous-emission ratio curves with and without the A²
//!    renormalization ([`circuit`]).
//!
//! Spin dynamics are never simulated: emission rates enter only through
//! ratios of J at the qubit frequency.

pub mod circuit;
pub mod lattice;
pub mod modes;
pub mod spectral;

use thiserror::Error;

/// Errors produced by model construction, diagonalization and fitting.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid lattice or run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The charge quadratic form is not positive definite (corrupted model
    /// or negative diamagnetic weight).
    #[error("charge form not positive definite: {0}")]
    Stability(String),
    /// The mode spectrum has a genuinely negative eigenvalue; the quadratic
    /// model is unstable. Must never occur for Δ ≥ 0.
    #[error("unstable mode spectrum: {0}")]
    Instability(String),
    /// A power-law or decoupling-law fit could not be performed.
    #[error("fit failed: {0}")]
    Fit(String),
    /// Continuum extrapolation could not be performed.
    #[error("continuum extrapolation failed: {0}")]
    Extrapolation(String),
    /// Invalid physical circuit parameters.
    #[error("invalid circuit parameters: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use circuit::{
    emission_curve, emission_ratio, emission_ratio_no_a2, end_to_end_ratio, find_emission_maximum,
    map_circuit, CircuitMap, CircuitParams, EmissionCurve, EndToEndRatio, PAPER_LAW_COEFFICIENT,
    PAPER_LAW_EXPONENT,
};
pub use lattice::{build_chain, CouplingKind, LatticeConfig, QuadraticModel};
pub use modes::{normal_modes, reconstruct_hamiltonian, CanonicalTransform, ModeSet};
pub use spectral::{
    cumulative_coupling, extrapolate_continuum, fit_decoupling_law, fit_ohmic_prefactor,
    fit_power_law, interpolation_samples, sweep_delta, AlphaEntry, AlphaSweep, CumulativeCurve,
    DecouplingLaw, SpectralFit, DEFAULT_FIT_WINDOW,
};
