//! Mapping of physical transmon-over-line circuit parameters onto the
//! dimensionless model, and spontaneous-emission ratio curves.
//!
//! For a transmon of capacitance C_J coupled through C_c to a line of
//! impedance Z₀ at qubit frequency ω₀ (C_Σ = C_c + C_J):
//!
//! ```text
//!   Δ = (C_c²/C_Σ)·Z₀·ω₀            (dimensionless: F·Ω·s⁻¹ = 1)
//!   d = (C_c/C_Σ)·2e·n̄·√(Z₀/ℏ)
//!   κ = a·C_J·Z₀·ω₀                 (a = decoupling-law coefficient)
//! ```
//!
//! With the relative capacitance c = C_c/C_J the emission-rate ratio becomes
//!
//! ```text
//!   γ(c)/γ(1) = 4c²/(1+c)² · [(1 + κ/2)/(1 + κc²/(1+c))]^b
//! ```
//!
//! and 4c²/(1+c)² alone without the A² renormalization. The with-A² curve is
//! non-monotonic in c: the dipole gain d² ∝ c²/(1+c)² saturates while α(Δ(c))
//! keeps falling.

use crate::spectral::AlphaSweep;
use crate::{Error, Result};

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Reduced Planck constant (J·s).
pub const REDUCED_PLANCK: f64 = 1.054571817e-34;

/// Decoupling-law coefficient quoted for the capacitive coupling.
pub const PAPER_LAW_COEFFICIENT: f64 = 6.77;
/// Decoupling-law exponent quoted for the capacitive coupling.
pub const PAPER_LAW_EXPONENT: f64 = 2.57;

/// Physical parameters of the suspended transmon and line.
#[derive(Debug, Clone, Copy)]
pub struct CircuitParams {
    /// Coupling capacitance C_c (F).
    pub coupling_capacitance: f64,
    /// Qubit capacitance C_J (F).
    pub qubit_capacitance: f64,
    /// Line impedance Z₀ (Ω).
    pub line_impedance: f64,
    /// Qubit angular frequency ω₀ (rad/s).
    pub qubit_frequency: f64,
    /// Number-operator matrix element n̄ = |⟨1|q_J|0⟩|/2e (dimensionless).
    pub matrix_element: f64,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupling capacitance", self.coupling_capacitance),
            ("qubit capacitance", self.qubit_capacitance),
            ("line impedance", self.line_impedance),
            ("qubit frequency", self.qubit_frequency),
            ("matrix element", self.matrix_element),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// C_Σ = C_c + C_J.
    pub fn total_capacitance(&self) -> f64 {
        self.coupling_capacitance + self.qubit_capacitance
    }

    /// Relative capacitance c = C_c/C_J.
    pub fn relative_capacitance(&self) -> f64 {
        self.coupling_capacitance / self.qubit_capacitance
    }

    /// Same line and qubit, coupling capacitance set to c·C_J.
    pub fn with_relative_capacitance(&self, c: f64) -> Self {
        CircuitParams {
            coupling_capacitance: c * self.qubit_capacitance,
            ..*self
        }
    }

    /// Fig.-4 style reference: C_J = 25 fF, Z₀ = 50 Ω, ω₀ = 2π·7.5 GHz,
    /// n̄ = 0.5, C_c = C_J.
    pub fn suspended_transmon_reference() -> Self {
        CircuitParams {
            coupling_capacitance: 25e-15,
            qubit_capacitance: 25e-15,
            line_impedance: 50.0,
            qubit_frequency: 2.0 * std::f64::consts::PI * 7.5e9,
            matrix_element: 0.5,
        }
    }
}

/// Dimensionless model parameters derived from a circuit.
#[derive(Debug, Clone, Copy)]
pub struct CircuitMap {
    /// Dipole moment d.
    pub dipole: f64,
    /// Diamagnetic weight Δ.
    pub delta: f64,
    /// κ = a·C_J·Z₀·ω₀ for the law coefficient used.
    pub kappa: f64,
}

/// Map circuit parameters to (d, Δ, κ); `law_coefficient` is the a in κ.
pub fn map_circuit(params: &CircuitParams, law_coefficient: f64) -> Result<CircuitMap> {
    params.validate()?;
    let c_sigma = params.total_capacitance();
    let delta = params.coupling_capacitance * params.coupling_capacitance / c_sigma
        * params.line_impedance
        * params.qubit_frequency;
    let dipole = params.coupling_capacitance / c_sigma
        * 2.0
        * ELEMENTARY_CHARGE
        * params.matrix_element
        * (params.line_impedance / REDUCED_PLANCK).sqrt();
    let kappa = law_coefficient
        * params.qubit_capacitance
        * params.line_impedance
        * params.qubit_frequency;
    Ok(CircuitMap {
        dipole,
        delta,
        kappa,
    })
}

/// γ(c)/γ(1) with the A² renormalization.
pub fn emission_ratio(c: f64, kappa: f64, exponent: f64) -> f64 {
    let bare = 4.0 * c * c / ((1.0 + c) * (1.0 + c));
    let suppression = (1.0 + kappa / 2.0) / (1.0 + kappa * c * c / (1.0 + c));
    bare * suppression.powf(exponent)
}

/// γ(c)/γ(1) without the A² term: 4c²/(1+c)².
pub fn emission_ratio_no_a2(c: f64) -> f64 {
    4.0 * c * c / ((1.0 + c) * (1.0 + c))
}

/// Emission-ratio curves over a grid of relative capacitances.
#[derive(Debug, Clone)]
pub struct EmissionCurve {
    pub c_grid: Vec<f64>,
    /// γ(c)/γ(1) with the A² renormalization.
    pub with_a2: Vec<f64>,
    /// γ(c)/γ(1) without it.
    pub without_a2: Vec<f64>,
    pub kappa: f64,
    pub law_coefficient: f64,
    pub law_exponent: f64,
}

/// Evaluate both ratio curves over `c_grid` using κ from [`map_circuit`].
pub fn emission_curve(
    params: &CircuitParams,
    c_grid: &[f64],
    law: (f64, f64),
) -> Result<EmissionCurve> {
    if c_grid.is_empty() {
        return Err(Error::Parameter("empty capacitance grid".into()));
    }
    if c_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::Parameter("capacitance grid must be positive".into()));
    }
    let (a, b) = law;
    let kappa = map_circuit(params, a)?.kappa;
    let with_a2 = c_grid.iter().map(|&c| emission_ratio(c, kappa, b)).collect();
    let without_a2 = c_grid.iter().map(|&c| emission_ratio_no_a2(c)).collect();
    Ok(EmissionCurve {
        c_grid: c_grid.to_vec(),
        with_a2,
        without_a2,
        kappa,
        law_coefficient: a,
        law_exponent: b,
    })
}

/// Locate the interior maximum of the with-A² ratio on [c_lo, c_hi] by a
/// dense grid scan refined with golden-section search.
pub fn find_emission_maximum(kappa: f64, exponent: f64, c_lo: f64, c_hi: f64) -> f64 {
    let n = 4096;
    let step = (c_hi - c_lo) / n as f64;
    let mut best = c_lo;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=n {
        let c = c_lo + step * i as f64;
        let v = emission_ratio(c, kappa, exponent);
        if v > best_val {
            best_val = v;
            best = c;
        }
    }
    let mut lo = (best - step).max(c_lo);
    let mut hi = (best + step).min(c_hi);
    let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c1 = hi - golden * (hi - lo);
    let mut c2 = lo + golden * (hi - lo);
    for _ in 0..120 {
        if emission_ratio(c1, kappa, exponent) > emission_ratio(c2, kappa, exponent) {
            hi = c2;
            c2 = c1;
            c1 = hi - golden * (hi - lo);
        } else {
            lo = c1;
            c1 = c2;
            c2 = lo + golden * (hi - lo);
        }
    }
    0.5 * (lo + hi)
}

/// First-principles emission ratio d²(c)·α(Δ(c)) / d²(1)·α(Δ(1)).
#[derive(Debug, Clone, Copy)]
pub struct EndToEndRatio {
    pub value: f64,
    /// Δ(c) exceeded the sweep's largest fitted Δ: the law was extrapolated.
    pub extrapolated: bool,
}

/// Compute γ(c)/γ(1) from first principles, bypassing the closed form: the
/// dipoles and Δ's come from [`map_circuit`] and α(Δ) from the sweep's
/// fitted decoupling law.
pub fn end_to_end_ratio(
    params_at_c: &CircuitParams,
    params_at_unit: &CircuitParams,
    sweep: &AlphaSweep,
) -> Result<EndToEndRatio> {
    for (name, a, b) in [
        ("qubit capacitance", params_at_c.qubit_capacitance, params_at_unit.qubit_capacitance),
        ("line impedance", params_at_c.line_impedance, params_at_unit.line_impedance),
        ("qubit frequency", params_at_c.qubit_frequency, params_at_unit.qubit_frequency),
        ("matrix element", params_at_c.matrix_element, params_at_unit.matrix_element),
    ] {
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
            return Err(Error::Parameter(format!(
                "{name} differs between the two parameter sets ({a} vs {b})"
            )));
        }
    }
    let a = sweep.law.coefficient;
    let at_c = map_circuit(params_at_c, a)?;
    let at_unit = map_circuit(params_at_unit, a)?;
    let value = (at_c.dipole * at_c.dipole * sweep.alpha_at(at_c.delta))
        / (at_unit.dipole * at_unit.dipole * sweep.alpha_at(at_unit.delta));
    let max_delta = sweep.max_delta();
    Ok(EndToEndRatio {
        value,
        extrapolated: at_c.delta > max_delta || at_unit.delta > max_delta,
    })
}
