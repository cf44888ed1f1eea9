//! Canonical diagonalization of the quadratic waveguide model.
//!
//! With A = SSᵀ (Cholesky) the point transformation P = UᵀSᵀq, X = UᵀS⁻¹φ is
//! canonical for any orthogonal U; choosing U to diagonalize SᵀBS = UΩ²Uᵀ
//! brings the Hamiltonian to Σₙ ½(Pₙ² + νₙ²Xₙ²) = Σₙ νₙ aₙ†aₙ + const.
//! The uniform-flux zero mode of the periodic chain (exactly one eigenvalue
//! of SᵀBS at zero) is projected out; the coupling operator re-expands as
//! F = Σₙ fₙ(aₙ + aₙ†) with fₙ ≥ 0.

use nalgebra::{DMatrix, DVector};

use crate::lattice::{CouplingKind, LatticeConfig, QuadraticModel};
use crate::{Error, Result};

/// Eigenvalues within this relative tolerance of zero are treated as the
/// projected zero mode; anything below the negative of it is an instability.
const ZERO_MODE_TOL: f64 = 1e-10;

/// Rows of the canonical point transformation, zero mode split off.
///
/// `momentum * q` gives the retained mode momenta P and `position * φ` the
/// retained mode positions X; `position * momentumᵀ = I` on the retained
/// subspace is the symplectic condition.
#[derive(Debug, Clone)]
pub struct CanonicalTransform {
    /// (M−1)×M rows mapping charges to mode momenta.
    pub momentum: DMatrix<f64>,
    /// (M−1)×M rows mapping fluxes to mode positions.
    pub position: DMatrix<f64>,
    /// Projected-out zero mode: its momentum row (= S u₀).
    pub zero_momentum: DVector<f64>,
    /// Projected-out zero mode: its position row (= S⁻ᵀ u₀).
    pub zero_position: DVector<f64>,
}

/// Normal modes {νₙ, fₙ} of a [`QuadraticModel`], zero mode excluded.
#[derive(Debug, Clone)]
pub struct ModeSet {
    /// Mode frequencies, strictly positive, ascending; length M−1.
    pub frequencies: DVector<f64>,
    /// Couplings fₙ ≥ 0 in F = Σ fₙ(aₙ + aₙ†); same length as `frequencies`.
    pub couplings: DVector<f64>,
    pub transform: CanonicalTransform,
    pub config: LatticeConfig,
}

/// Diagonalize the model into decoupled modes and re-express F in them.
pub fn normal_modes(model: &QuadraticModel) -> Result<ModeSet> {
    let m = model.config.sites;

    let chol = nalgebra::Cholesky::new(model.charge_matrix.clone()).ok_or_else(|| {
        Error::Stability("Cholesky factorization of the charge form failed".into())
    })?;
    let s = chol.l();

    // K = SᵀBS, symmetrized against roundoff before the eigensolve.
    let mut k = s.transpose() * &model.flux_matrix * &s;
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = 0.5 * (k[(i, j)] + k[(j, i)]);
            k[(i, j)] = avg;
            k[(j, i)] = avg;
        }
    }

    let eig = nalgebra::SymmetricEigen::new(k);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let max_eig = eig.eigenvalues[order[m - 1]];
    if max_eig <= 0.0 {
        return Err(Error::Instability("entire spectrum nonpositive".into()));
    }
    let tol = ZERO_MODE_TOL * max_eig;
    if eig.eigenvalues[order[0]] < -tol {
        return Err(Error::Instability(format!(
            "negative eigenvalue {:.3e} (scale {:.3e})",
            eig.eigenvalues[order[0]],
            max_eig
        )));
    }
    let zero_count = order.iter().filter(|&&i| eig.eigenvalues[i] < tol).count();
    if zero_count != 1 {
        return Err(Error::Config(format!(
            "expected exactly one zero mode, found {zero_count}"
        )));
    }

    // Sorted eigenvector matrix; column 0 is the zero mode.
    let mut u = DMatrix::<f64>::zeros(m, m);
    for (col, &idx) in order.iter().enumerate() {
        u.set_column(col, &eig.eigenvectors.column(idx));
    }

    // momentum rows = (UᵀSᵀ) = (SU)ᵀ;  position rows = UᵀS⁻¹ = (S⁻ᵀU)ᵀ.
    let momentum_full = (&s * &u).transpose();
    let position_full = s
        .transpose()
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::Stability("triangular solve for S⁻ᵀ failed".into()))?
        .transpose();

    let mut frequencies = DVector::<f64>::zeros(m - 1);
    let mut couplings = DVector::<f64>::zeros(m - 1);
    let mut momentum = DMatrix::<f64>::zeros(m - 1, m);
    let mut position = DMatrix::<f64>::zeros(m - 1, m);

    let w = &model.coupling_vector;
    for n in 0..(m - 1) {
        let nu = eig.eigenvalues[order[n + 1]].max(0.0).sqrt();
        frequencies[n] = nu;
        let mut mom_row = momentum_full.row(n + 1).clone_owned();
        let mut pos_row = position_full.row(n + 1).clone_owned();
        // Phase convention fₙ ≥ 0: flip the whole mode if the raw coupling
        // coefficient is negative (a canonical sign change).
        let coef = match model.config.coupling {
            CouplingKind::Capacitive => (&pos_row * w)[0],
            CouplingKind::Inductive => (&mom_row * w)[0],
        };
        if coef < 0.0 {
            mom_row.neg_mut();
            pos_row.neg_mut();
        }
        couplings[n] = match model.config.coupling {
            CouplingKind::Capacitive => (nu / 2.0).sqrt() * coef.abs(),
            CouplingKind::Inductive => coef.abs() / (2.0 * nu).sqrt(),
        };
        momentum.set_row(n, &mom_row);
        position.set_row(n, &pos_row);
    }

    Ok(ModeSet {
        frequencies,
        couplings,
        transform: CanonicalTransform {
            momentum,
            position,
            zero_momentum: momentum_full.row(0).transpose(),
            zero_position: position_full.row(0).transpose(),
        },
        config: model.config,
    })
}

/// Rebuild the quadratic forms from the mode decomposition (round-trip check).
///
/// A = momᵀ·mom + m₀m₀ᵀ and B = posᵀ·diag(ν²)·pos are exact; the coupling
/// vector is rebuilt up to its zero-mode component, which the mode set does
/// not retain (exact for the inductive difference form).
pub fn reconstruct_hamiltonian(modes: &ModeSet) -> QuadraticModel {
    let t = &modes.transform;
    let charge = t.momentum.transpose() * &t.momentum
        + &t.zero_momentum * t.zero_momentum.transpose();
    let nu2 = DMatrix::from_diagonal(&modes.frequencies.map(|v| v * v));
    let flux = t.position.transpose() * nu2 * &t.position;

    let n = modes.frequencies.len();
    let mut coeffs = DVector::<f64>::zeros(n);
    for i in 0..n {
        let nu = modes.frequencies[i];
        coeffs[i] = match modes.config.coupling {
            CouplingKind::Capacitive => modes.couplings[i] / (nu / 2.0).sqrt(),
            CouplingKind::Inductive => modes.couplings[i] * (2.0 * nu).sqrt(),
        };
    }
    let coupling = match modes.config.coupling {
        // F = cᵀP with c = pos·w  ⇒  w = momᵀc (+ zero-mode part, dropped).
        CouplingKind::Capacitive => t.momentum.transpose() * coeffs,
        // F = cᵀX with c = mom·w  ⇒  w = posᵀc (zero-mode part vanishes).
        CouplingKind::Inductive => t.position.transpose() * coeffs,
    };

    QuadraticModel {
        charge_matrix: charge,
        flux_matrix: flux,
        coupling_vector: coupling,
        config: modes.config,
    }
}

impl ModeSet {
    /// Largest entry of |position·momentumᵀ − I| on the retained subspace.
    pub fn symplectic_residual(&self) -> f64 {
        let n = self.frequencies.len();
        let mut prod = &self.transform.position * self.transform.momentum.transpose();
        for i in 0..n {
            prod[(i, i)] -= 1.0;
        }
        prod.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Σₙ νₙ², which must equal tr(A·B) (the zero mode contributes nothing).
    pub fn spectral_sum(&self) -> f64 {
        self.frequencies.iter().map(|nu| nu * nu).sum()
    }

    /// CSV body with header `n,nu_n,f_n`, full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,nu_n,f_n\n");
        for i in 0..self.frequencies.len() {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                i + 1,
                self.frequencies[i],
                self.couplings[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, DEFAULT_LENGTH};

    fn config(m: usize, coupling: CouplingKind, delta: f64) -> LatticeConfig {
        LatticeConfig {
            sites: m,
            length: DEFAULT_LENGTH,
            coupling,
            delta,
            dipole: 1.0,
        }
    }

    fn modes_for(m: usize, coupling: CouplingKind, delta: f64) -> ModeSet {
        normal_modes(&build_chain(&config(m, coupling, delta)).unwrap()).unwrap()
    }

    /// Analytic dispersion of the periodic chain: ν = 2ν_c |sin(kδx/2)| at
    /// k = 2πn/L̃, each nonzero frequency below the band edge doubly
    /// degenerate.
    fn analytic_frequencies(m: usize, length: f64) -> Vec<f64> {
        let dx = length / m as f64;
        let nu_c = 1.0 / dx;
        let mut out = Vec::new();
        for n in 1..=(m / 2) {
            let k = 2.0 * std::f64::consts::PI * n as f64 / length;
            let nu = 2.0 * nu_c * (k * dx / 2.0).sin().abs();
            out.push(nu);
            if n < m / 2 {
                out.push(nu); // the -k partner
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn delta_zero_dispersion_matches_analytic() {
        let set = modes_for(64, CouplingKind::Capacitive, 0.0);
        let expected = analytic_frequencies(64, DEFAULT_LENGTH);
        assert_eq!(set.frequencies.len(), 63);
        for (got, want) in set.frequencies.iter().zip(expected.iter()) {
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1.0),
                "frequency {got} vs analytic {want}"
            );
        }
        let lowest = set.frequencies[0];
        assert!(
            (lowest - 0.1).abs() < 1e-3,
            "lowest frequency {lowest} should be near 2π/L̃ = 0.1"
        );
    }

    #[test]
    fn delta_zero_pair_couplings_sum_to_nu_over_length() {
        for kind in [CouplingKind::Capacitive, CouplingKind::Inductive] {
            let set = modes_for(64, kind, 0.0);
            // Group degenerate frequencies: each ±k pair carries Σf² = ν/L̃;
            // the non-degenerate band-edge mode carries ν/2L̃.
            let mut i = 0;
            while i < set.frequencies.len() {
                let nu = set.frequencies[i];
                let mut f2 = 0.0;
                let mut j = i;
                while j < set.frequencies.len()
                    && (set.frequencies[j] - nu).abs() <= 1e-9 * nu.max(1.0)
                {
                    f2 += set.couplings[j] * set.couplings[j];
                    j += 1;
                }
                let pair = j - i;
                let want = pair as f64 * nu / (2.0 * DEFAULT_LENGTH);
                assert!(
                    pair == 2 || j == set.frequencies.len(),
                    "{kind:?}: singleton frequency {nu} away from the band edge"
                );
                assert!(
                    (f2 - want).abs() <= 1e-10 * want,
                    "{kind:?}: aggregate f² = {f2:e} vs expected {want:e} at ν = {nu}"
                );
                i = j;
            }
        }
    }

    #[test]
    fn symplectic_condition_holds() {
        for kind in [CouplingKind::Capacitive, CouplingKind::Inductive] {
            for delta in [0.0, 1.0] {
                let set = modes_for(32, kind, delta);
                let residual = set.symplectic_residual();
                assert!(
                    residual <= 1e-10,
                    "symplectic residual {residual:e} for {kind:?}, delta={delta}"
                );
            }
        }
    }

    #[test]
    fn frequencies_positive_sorted_and_complete() {
        let set = modes_for(16, CouplingKind::Inductive, 0.7);
        assert_eq!(set.frequencies.len(), 15);
        assert_eq!(set.couplings.len(), 15);
        assert!(set.frequencies[0] > 0.0);
        for w in set.frequencies.as_slice().windows(2) {
            assert!(w[0] <= w[1], "frequencies not ascending");
        }
        assert!(set.couplings.iter().all(|f| *f >= 0.0));
    }

    #[test]
    fn round_trip_reconstruction() {
        for (kind, delta) in [
            (CouplingKind::Capacitive, 0.0),
            (CouplingKind::Capacitive, 1.0),
            (CouplingKind::Inductive, 1.0),
        ] {
            let model = build_chain(&config(8, kind, delta)).unwrap();
            let set = normal_modes(&model).unwrap();
            let rebuilt = reconstruct_hamiltonian(&set);
            let a_res = (&rebuilt.charge_matrix - &model.charge_matrix).norm()
                / model.charge_matrix.norm();
            let b_res =
                (&rebuilt.flux_matrix - &model.flux_matrix).norm() / model.flux_matrix.norm();
            assert!(a_res <= 1e-8, "A round-trip residual {a_res:e} ({kind:?}, {delta})");
            assert!(b_res <= 1e-8, "B round-trip residual {b_res:e} ({kind:?}, {delta})");
        }
        // The inductive coupling vector rebuilds exactly (no zero-mode part).
        let model = build_chain(&config(8, CouplingKind::Inductive, 0.5)).unwrap();
        let rebuilt = reconstruct_hamiltonian(&normal_modes(&model).unwrap());
        let w_res = (&rebuilt.coupling_vector - &model.coupling_vector).norm()
            / model.coupling_vector.norm();
        assert!(w_res <= 1e-8, "inductive w round-trip residual {w_res:e}");
    }

    #[test]
    fn spectral_sum_matches_trace_of_product() {
        for kind in [CouplingKind::Capacitive, CouplingKind::Inductive] {
            let model = build_chain(&config(24, kind, 0.8)).unwrap();
            let set = normal_modes(&model).unwrap();
            let trace = (&model.charge_matrix * &model.flux_matrix).trace();
            let sum = set.spectral_sum();
            assert!(
                (sum - trace).abs() <= 1e-10 * trace,
                "{kind:?}: Σν² = {sum:.12e} vs tr(AB) = {trace:.12e}"
            );
        }
    }

    #[test]
    fn capacitive_frequencies_monotone_in_delta() {
        let base = modes_for(16, CouplingKind::Capacitive, 0.0);
        let bumped = modes_for(16, CouplingKind::Capacitive, 0.4);
        for (n, (a, b)) in base
            .frequencies
            .iter()
            .zip(bumped.frequencies.iter())
            .enumerate()
        {
            assert!(
                b + 1e-12 * b.max(1.0) >= *a,
                "mode {n}: ν(Δ=0.4) = {b} < ν(0) = {a}"
            );
        }
    }

    #[test]
    fn indefinite_flux_form_reports_instability() {
        let mut model = build_chain(&config(8, CouplingKind::Capacitive, 0.0)).unwrap();
        model.flux_matrix[(3, 3)] = -50.0;
        match normal_modes(&model) {
            Err(Error::Instability(_)) => {}
            other => panic!("expected instability error, got {other:?}"),
        }
    }

    #[test]
    fn non_positive_definite_charge_form_reports_stability_error() {
        let mut model = build_chain(&config(8, CouplingKind::Capacitive, 0.0)).unwrap();
        model.charge_matrix[(2, 2)] = -1.0;
        match normal_modes(&model) {
            Err(Error::Stability(_)) => {}
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn extra_zero_mode_is_rejected() {
        // Two decoupled uniform sectors: zero out one bond pair so the chain
        // splits, giving a second zero mode.
        let mut model = build_chain(&config(8, CouplingKind::Capacitive, 0.0)).unwrap();
        let nu_c2 = model.config.cutoff() * model.config.cutoff();
        for (i, j) in [(3usize, 4usize), (7, 0)] {
            model.flux_matrix[(i, j)] = 0.0;
            model.flux_matrix[(j, i)] = 0.0;
            model.flux_matrix[(i, i)] -= nu_c2;
            model.flux_matrix[(j, j)] -= nu_c2;
        }
        match normal_modes(&model) {
            Err(Error::Config(msg)) => assert!(msg.contains("zero mode"), "{msg}"),
            other => panic!("expected zero-mode count error, got {other:?}"),
        }
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let set = modes_for(8, CouplingKind::Capacitive, 0.0);
        let csv = set.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,nu_n,f_n"));
        assert_eq!(lines.count(), 7);
    }
}
