//! Discretized waveguide Hamiltonian with optional diamagnetic term.
//!
//! The line of length L̃ (in units of v/ω₀) is cut into `M` sites of spacing
//! δx = L̃/M with periodic boundary conditions, giving the quadratic forms
//!
//! ```text
//!   H₀ = ½ Σᵢ [ qᵢ² + ν_c² (φᵢ − φᵢ₊₁)² ],        ν_c = 1/δx,
//! ```
//!
//! i.e. A = 1 and B = ν_c² × (periodic second difference). The qubit couples
//! through one of two field operators at site 0,
//!
//! ```text
//!   F = δx^(−1/2) q₀                (capacitive),
//!   F = δx^(−3/2) (φ₁ − φ₀)         (inductive),
//! ```
//!
//! normalized so that the Δ=0 continuum spectral function is J(ν) = d²ν.
//! The diamagnetic term (Δ/2)F² adds Δ/δx to A₀₀ (capacitive) or the rank-one
//! form Δ/δx³ (e₁−e₀)(e₁−e₀)ᵀ to B (inductive).

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Which field operator the qubit couples to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// F ∝ local charge (voltage) at the qubit site; transmon / charge qubit.
    Capacitive,
    /// F ∝ flux difference (current) across the qubit bond; flux qubit.
    Inductive,
}

impl CouplingKind {
    pub fn label(&self) -> &'static str {
        match self {
            CouplingKind::Capacitive => "cq",
            CouplingKind::Inductive => "fq",
        }
    }
}

impl std::str::FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cq" | "capacitive" => Ok(CouplingKind::Capacitive),
            "fq" | "inductive" => Ok(CouplingKind::Inductive),
            other => Err(Error::Config(format!(
                "unknown coupling kind '{other}' (expected cq or fq)"
            ))),
        }
    }
}

/// Discretization and coupling parameters of the waveguide model.
#[derive(Debug, Clone, Copy)]
pub struct LatticeConfig {
    /// Number of lattice sites M (= number of modes before zero-mode removal).
    pub sites: usize,
    /// Dimensionless waveguide length L̃ = Lω₀/v. Default 20π (L = 10λ₀).
    pub length: f64,
    /// Field operator the qubit couples to.
    pub coupling: CouplingKind,
    /// Diamagnetic weight Δ ≥ 0.
    pub delta: f64,
    /// Dimensionless dipole moment d ≥ 0.
    pub dipole: f64,
}

/// Default dimensionless length: ten qubit wavelengths, L̃ = 20π.
pub const DEFAULT_LENGTH: f64 = 20.0 * std::f64::consts::PI;

impl LatticeConfig {
    pub fn new(sites: usize, coupling: CouplingKind, delta: f64) -> Result<Self> {
        let config = LatticeConfig {
            sites,
            length: DEFAULT_LENGTH,
            coupling,
            delta,
            dipole: 1.0,
        };
        config.validate()?;
        Ok(config)
    }

    /// Lattice spacing δx = L̃/M.
    pub fn spacing(&self) -> f64 {
        self.length / self.sites as f64
    }

    /// Cutoff frequency ν_c = 1/δx.
    pub fn cutoff(&self) -> f64 {
        1.0 / self.spacing()
    }

    /// True when ν_c < 10, i.e. the discretization is too coarse for the
    /// cutoff to be considered large.
    pub fn cutoff_is_coarse(&self) -> bool {
        self.cutoff() < 10.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 4 || !self.sites.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "site count M = {} must be even and at least 4",
                self.sites
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Config(format!(
                "length {} must be finite and positive",
                self.length
            )));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::Config(format!(
                "diamagnetic weight delta = {} must be finite and nonnegative",
                self.delta
            )));
        }
        if !(self.dipole.is_finite() && self.dipole >= 0.0) {
            return Err(Error::Config(format!(
                "dipole d = {} must be finite and nonnegative",
                self.dipole
            )));
        }
        Ok(())
    }
}

/// The discretized Hamiltonian H = ½qᵀAq + ½φᵀBφ plus the linear form of F.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    /// Quadratic form A in the charges q (symmetric, positive definite).
    pub charge_matrix: DMatrix<f64>,
    /// Quadratic form B in the fluxes φ (symmetric, positive semidefinite
    /// with exactly one zero eigenvalue: the uniform-flux mode).
    pub flux_matrix: DMatrix<f64>,
    /// Coupling vector w with F = wᵀq (capacitive) or F = wᵀφ (inductive).
    pub coupling_vector: DVector<f64>,
    pub config: LatticeConfig,
}

/// Build the periodic-chain model with the diamagnetic term folded in.
pub fn build_chain(config: &LatticeConfig) -> Result<QuadraticModel> {
    config.validate()?;
    let m = config.sites;
    let dx = config.spacing();
    let nu_c2 = 1.0 / (dx * dx);

    let mut charge = DMatrix::<f64>::identity(m, m);
    let mut flux = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let next = (i + 1) % m;
        flux[(i, i)] += 2.0 * nu_c2;
        flux[(i, next)] -= nu_c2;
        flux[(next, i)] -= nu_c2;
    }

    let mut coupling = DVector::<f64>::zeros(m);
    match config.coupling {
        CouplingKind::Capacitive => {
            coupling[0] = dx.powf(-0.5);
            // (Δ/2) F² = (Δ/2δx) q₀², so A₀₀ gains Δ/δx under the ½ convention.
            charge[(0, 0)] += config.delta / dx;
        }
        CouplingKind::Inductive => {
            let scale = dx.powf(-1.5);
            coupling[0] = -scale;
            coupling[1] = scale;
            let weight = config.delta / (dx * dx * dx);
            flux[(0, 0)] += weight;
            flux[(1, 1)] += weight;
            flux[(0, 1)] -= weight;
            flux[(1, 0)] -= weight;
        }
    }

    Ok(QuadraticModel {
        charge_matrix: charge,
        flux_matrix: flux,
        coupling_vector: coupling,
        config: *config,
    })
}

impl QuadraticModel {
    /// Structured-text dump: config echo, dimensions and nonzero entries.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        out.push_str(&format!(
            "sites={}\nlength={:.17e}\ncoupling={}\ndelta={:.17e}\ndipole={:.17e}\nspacing={:.17e}\ncutoff={:.17e}\n",
            c.sites,
            c.length,
            c.coupling.label(),
            c.delta,
            c.dipole,
            c.spacing(),
            c.cutoff()
        ));
        for (name, mat) in [("charge_matrix", &self.charge_matrix), ("flux_matrix", &self.flux_matrix)] {
            out.push_str(&format!("{name} {}x{}\n", mat.nrows(), mat.ncols()));
            for i in 0..mat.nrows() {
                for j in 0..mat.ncols() {
                    if mat[(i, j)] != 0.0 {
                        out.push_str(&format!("{i} {j} {:.17e}\n", mat[(i, j)]));
                    }
                }
            }
        }
        out.push_str(&format!("coupling_vector {}\n", self.coupling_vector.len()));
        for (i, v) in self.coupling_vector.iter().enumerate() {
            if *v != 0.0 {
                out.push_str(&format!("{i} {v:.17e}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(m: usize, coupling: CouplingKind, delta: f64, length: f64) -> LatticeConfig {
        LatticeConfig {
            sites: m,
            length,
            coupling,
            delta,
            dipole: 1.0,
        }
    }

    #[test]
    fn delta_zero_capacitive_matches_periodic_chain() {
        // M = 4, δx = 1 so that ν_c² = 1 and B is the bare second difference.
        let cfg = config(4, CouplingKind::Capacitive, 0.0, 4.0);
        let model = build_chain(&cfg).unwrap();
        assert_eq!(model.charge_matrix, DMatrix::identity(4, 4));
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, -1.0, 0.0, -1.0, //
                -1.0, 2.0, -1.0, 0.0, //
                0.0, -1.0, 2.0, -1.0, //
                -1.0, 0.0, -1.0, 2.0,
            ],
        );
        assert_eq!(model.flux_matrix, expected);
        assert_eq!(model.coupling_vector[0], 1.0);
    }

    #[test]
    fn capacitive_delta_term_hits_single_diagonal_entry() {
        // δx = 0.1: A₀₀ = 1 + 0.5/0.1 = 6, everything else untouched.
        let cfg = config(4, CouplingKind::Capacitive, 0.5, 0.4);
        let model = build_chain(&cfg).unwrap();
        let base = build_chain(&config(4, CouplingKind::Capacitive, 0.0, 0.4)).unwrap();
        assert_eq!(model.flux_matrix, base.flux_matrix);
        let diff = &model.charge_matrix - &base.charge_matrix;
        assert!((diff[(0, 0)] - 5.0).abs() < 1e-12, "A00 shift = {}", diff[(0, 0)]);
        assert!((model.charge_matrix[(0, 0)] - 6.0).abs() < 1e-12);
        let off = diff
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 0)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        assert_eq!(off, 0.0, "capacitive delta term must touch only A00");
    }

    #[test]
    fn inductive_delta_term_hits_two_by_two_flux_block() {
        // δx = 0.1: the (φ₁−φ₀)² form gains 0.5/0.001 = 500.
        let cfg = config(4, CouplingKind::Inductive, 0.5, 0.4);
        let model = build_chain(&cfg).unwrap();
        let base = build_chain(&config(4, CouplingKind::Inductive, 0.0, 0.4)).unwrap();
        assert_eq!(model.charge_matrix, base.charge_matrix);
        assert_eq!(model.charge_matrix, DMatrix::identity(4, 4));
        let diff = &model.flux_matrix - &base.flux_matrix;
        for (i, j, want) in [(0, 0, 500.0), (1, 1, 500.0), (0, 1, -500.0), (1, 0, -500.0)] {
            assert!(
                (diff[(i, j)] - want).abs() < 1e-9,
                "block entry ({i},{j}) = {}, want {want}",
                diff[(i, j)]
            );
        }
        for i in 0..4 {
            for j in 0..4 {
                if i > 1 || j > 1 {
                    assert_eq!(diff[(i, j)], 0.0, "entry ({i},{j}) outside the 2x2 block moved");
                }
            }
        }
    }

    #[test]
    fn matrices_symmetric_and_uniform_flux_annihilated() {
        for kind in [CouplingKind::Capacitive, CouplingKind::Inductive] {
            for delta in [0.0, 0.3, 2.0] {
                let cfg = config(8, kind, delta, DEFAULT_LENGTH);
                let model = build_chain(&cfg).unwrap();
                let asym_a = (&model.charge_matrix - model.charge_matrix.transpose()).norm();
                let asym_b = (&model.flux_matrix - model.flux_matrix.transpose()).norm();
                assert_eq!(asym_a, 0.0);
                assert_eq!(asym_b, 0.0);
                let ones = DVector::from_element(8, 1.0);
                let residual = (&model.flux_matrix * ones).norm();
                let scale = model.flux_matrix.norm();
                assert!(
                    residual <= 1e-12 * scale,
                    "B*1 = {residual:e} for {kind:?}, delta={delta}"
                );
            }
        }
    }

    #[test]
    fn config_validation_edge_cases() {
        assert!(build_chain(&config(3, CouplingKind::Capacitive, 0.0, 1.0)).is_err());
        assert!(config(2, CouplingKind::Capacitive, 0.0, 1.0).validate().is_err());
        assert!(config(5, CouplingKind::Capacitive, 0.0, 1.0).validate().is_err());
        assert!(config(8, CouplingKind::Capacitive, -0.1, 1.0).validate().is_err());
        assert!(config(8, CouplingKind::Capacitive, 0.0, 0.0).validate().is_err());
        assert!(config(8, CouplingKind::Capacitive, f64::NAN, 1.0).validate().is_err());
        assert!(config(8, CouplingKind::Capacitive, 0.0, 1.0).validate().is_ok());
    }

    #[test]
    fn coarse_cutoff_detection() {
        // M = 320 at L̃ = 20π has ν_c ≈ 5.09 < 10.
        let cfg = config(320, CouplingKind::Capacitive, 0.0, DEFAULT_LENGTH);
        assert!(cfg.cutoff_is_coarse());
        let fine = config(1024, CouplingKind::Capacitive, 0.0, DEFAULT_LENGTH);
        assert!(!fine.cutoff_is_coarse());
    }
}
