//! Spectral functions, power-law fits, continuum extrapolation and the
//! Δ-sweep extracting the decoupling law.
//!
//! The cumulative coupling weight
//!
//! ```text
//!   D(ν) = ∫₀^ν J(ν′) dν′ ≃ 2π Σ_{νₙ ≤ ν} |d fₙ|²
//! ```
//!
//! is a staircase over the discrete modes. It is fitted to C·ν^(s+1) in
//! log-log space and differentiated analytically, J(ν) = C(s+1)·ν^s — never
//! finite-differenced. Evaluating the staircase exactly at its jump points
//! overestimates the running integral by half a jump, so the fits consume
//! half-jump-corrected samples (see [`interpolation_samples`]); that
//! correction removes an O(dν/ν) bias that does not vanish with δx → 0
//! because the level spacing is set by the fixed length L̃.

use rayon::prelude::*;

use crate::lattice::{build_chain, CouplingKind, LatticeConfig};
use crate::modes::{normal_modes, ModeSet};
use crate::{Error, Result};

/// Default fit window [ν_lo, ν_hi] in units of ω₀: above the level-spacing
/// granularity, below the band-curvature region.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (0.2, 2.0);

/// Minimum number of samples a power-law fit window must contain.
const MIN_FIT_SAMPLES: usize = 10;

/// Cumulative coupling weight sampled at the distinct mode frequencies.
#[derive(Debug, Clone)]
pub struct CumulativeCurve {
    /// Ascending frequency samples.
    pub nu_grid: Vec<f64>,
    /// D(ν) at each sample: 2π Σ over modes with νₙ ≤ ν of d²fₙ².
    pub values: Vec<f64>,
}

/// Power-law fit of D(ν) = C·ν^(s+1), reported as J(ν) = prefactor·ν^exponent.
#[derive(Debug, Clone, Copy)]
pub struct SpectralFit {
    /// 2πα·d², the coefficient of ν^s in J.
    pub prefactor: f64,
    /// The spectral exponent s (1 = Ohmic).
    pub exponent: f64,
    /// Window [ν_lo, ν_hi] the fit used.
    pub window: (f64, f64),
    /// Root-mean-square relative deviation of the fit over the window.
    pub residual: f64,
}

/// One (Δ, M) cell of an [`AlphaSweep`].
#[derive(Debug, Clone, Copy)]
pub struct AlphaEntry {
    pub delta: f64,
    pub sites: usize,
    pub spacing: f64,
    /// 2πα from the Ohmic (s = 1 forced) fit.
    pub alpha: f64,
    /// Free exponent s from the unconstrained fit (Ohmicity check).
    pub free_exponent: f64,
}

/// Fitted decoupling law 2πα(Δ) = (1 + aΔ)^(−b).
#[derive(Debug, Clone, Copy)]
pub struct DecouplingLaw {
    pub coefficient: f64,
    pub exponent: f64,
    /// RMS residual of log 2πα against the law over the fitted points.
    pub residual: f64,
}

/// Result of the full (Δ, M) sweep.
#[derive(Debug, Clone)]
pub struct AlphaSweep {
    /// One entry per (Δ, M), ordered by Δ then M.
    pub entries: Vec<AlphaEntry>,
    /// Continuum-extrapolated (Δ, 2πα) per Δ.
    pub extrapolated: Vec<(f64, f64)>,
    pub law: DecouplingLaw,
    pub coupling: CouplingKind,
}

/// Build the cumulative staircase D(ν) from a mode set.
///
/// Degenerate frequencies (within relative 1e−9) aggregate into one sample.
pub fn cumulative_coupling(modes: &ModeSet, dipole: f64) -> Result<CumulativeCurve> {
    let n = modes.frequencies.len();
    if n == 0 {
        return Err(Error::Config("empty mode set".into()));
    }
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let f = modes.couplings[i];
            (modes.frequencies[i], 2.0 * std::f64::consts::PI * dipole * dipole * f * f)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut nu_grid: Vec<f64> = Vec::with_capacity(n);
    let mut jumps: Vec<f64> = Vec::with_capacity(n);
    for (nu, w) in pairs {
        match nu_grid.last() {
            Some(&last) if (nu - last).abs() <= 1e-9 * last.max(1.0) => {
                *jumps.last_mut().unwrap() += w;
            }
            _ => {
                nu_grid.push(nu);
                jumps.push(w);
            }
        }
    }
    let mut running = 0.0;
    let values = jumps
        .iter()
        .map(|w| {
            running += w;
            running
        })
        .collect();
    Ok(CumulativeCurve { nu_grid, values })
}

impl CumulativeCurve {
    /// Jump sizes w_i = D_i − D_{i−1}.
    fn jumps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|v| {
                let w = v - prev;
                prev = *v;
                w
            })
            .collect()
    }

    /// Evaluate the staircase at an arbitrary frequency: the sum over all
    /// modes with νₙ ≤ ν, zero below the lowest mode.
    pub fn value_at(&self, nu: f64) -> f64 {
        match self.nu_grid.partition_point(|x| *x <= nu) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }
}

/// Convert a jump-sampled staircase into fit-ready samples.
///
/// Modes of negligible weight (jump ≤ 1e−12 of the total) are dropped, then
/// each remaining sample is lowered by half its own jump: the corrected value
/// estimates the running integral at the jump frequency to second order in
/// the level spacing.
pub fn interpolation_samples(curve: &CumulativeCurve) -> CumulativeCurve {
    let jumps = curve.jumps();
    let total: f64 = jumps.iter().sum();
    let tol = 1e-12 * total;
    let mut nu_grid = Vec::new();
    let mut values = Vec::new();
    let mut running = 0.0;
    for (i, w) in jumps.iter().enumerate() {
        running += w;
        if *w > tol {
            nu_grid.push(curve.nu_grid[i]);
            values.push(running - 0.5 * w);
        }
    }
    CumulativeCurve { nu_grid, values }
}

fn window_samples(
    curve: &CumulativeCurve,
    window: (f64, f64),
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(Error::Fit(format!("invalid window [{lo}, {hi}]")));
    }
    let mut lx = Vec::new();
    let mut ld = Vec::new();
    for (nu, d) in curve.nu_grid.iter().zip(curve.values.iter()) {
        if *nu < lo || *nu > hi {
            continue;
        }
        if *d <= 0.0 {
            return Err(Error::Fit(format!("nonpositive D = {d} at ν = {nu}")));
        }
        lx.push(nu.ln());
        ld.push(d.ln());
    }
    if lx.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] contains {} samples, need at least {MIN_FIT_SAMPLES}",
            lx.len()
        )));
    }
    Ok((lx, ld))
}

fn rms_relative_residual(lx: &[f64], ld: &[f64], intercept: f64, slope: f64) -> f64 {
    let sum: f64 = lx
        .iter()
        .zip(ld.iter())
        .map(|(x, d)| {
            let rel = (intercept + slope * x - d).exp() - 1.0;
            rel * rel
        })
        .sum();
    (sum / lx.len() as f64).sqrt()
}

/// Free-exponent power-law fit of D(ν) = C·ν^(s+1) on the window; the fitted
/// curve is differentiated analytically, returning J parameters
/// (prefactor = C·(s+1), exponent = s).
pub fn fit_power_law(curve: &CumulativeCurve, window: (f64, f64)) -> Result<SpectralFit> {
    let (lx, ld) = window_samples(curve, window)?;
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let md = ld.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxd: f64 = lx.iter().zip(ld.iter()).map(|(x, d)| (x - mx) * (d - md)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae in fit window".into()));
    }
    let slope = sxd / sxx;
    let intercept = md - slope * mx;
    if slope <= 0.0 {
        return Err(Error::Fit(format!("nonpositive fitted power {slope}")));
    }
    Ok(SpectralFit {
        prefactor: intercept.exp() * slope,
        exponent: slope - 1.0,
        window,
        residual: rms_relative_residual(&lx, &ld, intercept, slope),
    })
}

/// Ohmic-form fit with the exponent forced to s = 1 (D = C·ν²); this is the
/// fit that defines α, with prefactor = 2πα·d².
pub fn fit_ohmic_prefactor(curve: &CumulativeCurve, window: (f64, f64)) -> Result<SpectralFit> {
    let (lx, ld) = window_samples(curve, window)?;
    let n = lx.len() as f64;
    let intercept = lx
        .iter()
        .zip(ld.iter())
        .map(|(x, d)| d - 2.0 * x)
        .sum::<f64>()
        / n;
    Ok(SpectralFit {
        prefactor: 2.0 * intercept.exp(),
        exponent: 1.0,
        window,
        residual: rms_relative_residual(&lx, &ld, intercept, 2.0),
    })
}

/// Least-squares extrapolation value(δx) = v₀ + c₁δx + c₂δx², returning v₀.
pub fn extrapolate_continuum(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::Extrapolation(format!(
            "need at least 3 points, got {}",
            series.len()
        )));
    }
    for (i, (xi, _)) in series.iter().enumerate() {
        if !xi.is_finite() || *xi <= 0.0 {
            return Err(Error::Extrapolation(format!("invalid spacing {xi}")));
        }
        for (xj, _) in series.iter().skip(i + 1) {
            if (xi - xj).abs() <= 1e-12 * xi.abs().max(xj.abs()) {
                return Err(Error::Extrapolation(format!("duplicate spacing {xi}")));
            }
        }
    }
    let n = series.len();
    let design = nalgebra::DMatrix::from_fn(n, 3, |i, j| series[i].0.powi(j as i32));
    let rhs = nalgebra::DVector::from_iterator(n, series.iter().map(|(_, v)| *v));
    let svd = design.svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Extrapolation(e.to_string()))?;
    Ok(coeffs[0])
}

/// Fit 2πα(Δ) = (1 + aΔ)^(−b) in log space: for trial a, the exponent b is
/// the no-intercept regression of −log 2πα on log(1 + aΔ); a is optimized by
/// golden-section search on the residual.
pub fn fit_decoupling_law(points: &[(f64, f64)]) -> Result<DecouplingLaw> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(delta, alpha)| *delta >= 0.0 && *alpha > 0.0)
        .collect();
    if usable.iter().filter(|(d, _)| *d > 0.0).count() < 3 {
        return Err(Error::Fit(
            "decoupling-law fit needs at least 3 points with Δ > 0 and positive α".into(),
        ));
    }

    let sse_and_b = |a: f64| -> (f64, f64) {
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (delta, alpha) in &usable {
            let x = (1.0 + a * delta).ln();
            let y = alpha.ln();
            sxx += x * x;
            sxy += x * y;
        }
        if sxx == 0.0 {
            return (f64::INFINITY, 0.0);
        }
        let b = -sxy / sxx;
        let mut sse = 0.0;
        for (delta, alpha) in &usable {
            let r = alpha.ln() + b * (1.0 + a * delta).ln();
            sse += r * r;
        }
        (sse, b)
    };

    let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut lo = 0.05_f64;
    let mut hi = 100.0_f64;
    let mut c = hi - golden * (hi - lo);
    let mut d = lo + golden * (hi - lo);
    for _ in 0..200 {
        if sse_and_b(c).0 < sse_and_b(d).0 {
            hi = d;
            d = c;
            c = hi - golden * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + golden * (hi - lo);
        }
    }
    let a = 0.5 * (lo + hi);
    let (sse, b) = sse_and_b(a);
    Ok(DecouplingLaw {
        coefficient: a,
        exponent: b,
        residual: (sse / usable.len() as f64).sqrt(),
    })
}

/// α for a single (Δ, M) cell: build, diagonalize, fit.
fn alpha_cell(
    delta: f64,
    sites: usize,
    coupling: CouplingKind,
    length: f64,
    window: (f64, f64),
) -> Result<AlphaEntry> {
    let config = LatticeConfig {
        sites,
        length,
        coupling,
        delta,
        dipole: 1.0,
    };
    let modes = normal_modes(&build_chain(&config)?)?;
    let curve = interpolation_samples(&cumulative_coupling(&modes, 1.0)?);
    let ohmic = fit_ohmic_prefactor(&curve, window)?;
    let free = fit_power_law(&curve, window)?;
    Ok(AlphaEntry {
        delta,
        sites,
        spacing: config.spacing(),
        alpha: ohmic.prefactor,
        free_exponent: free.exponent,
    })
}

/// Sweep the (Δ, M) grid, extrapolate each Δ's α to δx → 0 and fit the
/// decoupling law over the extrapolated points.
///
/// The extrapolation runs on log 2πα: the α(δx) sequences decay over decades
/// once Δν_c ≫ 1, and extrapolating the raw values turns negative there.
pub fn sweep_delta(
    deltas: &[f64],
    coupling: CouplingKind,
    m_list: &[usize],
    length: f64,
    window: (f64, f64),
) -> Result<AlphaSweep> {
    if deltas.is_empty() || m_list.is_empty() {
        return Err(Error::Config("empty delta or mode list".into()));
    }
    if deltas.iter().any(|d| *d < 0.0) {
        return Err(Error::Config("negative Δ in sweep".into()));
    }

    let cells: Vec<(f64, usize)> = deltas
        .iter()
        .flat_map(|&d| m_list.iter().map(move |&m| (d, m)))
        .collect();
    let entries: Vec<AlphaEntry> = cells
        .par_iter()
        .map(|&(d, m)| alpha_cell(d, m, coupling, length, window))
        .collect::<Result<Vec<_>>>()?;

    let mut extrapolated = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let series: Vec<(f64, f64)> = entries
            .iter()
            .filter(|e| e.delta == delta)
            .map(|e| (e.spacing, e.alpha.ln()))
            .collect();
        let log_alpha = extrapolate_continuum(&series)?;
        extrapolated.push((delta, log_alpha.exp()));
    }

    let law = fit_decoupling_law(&extrapolated)?;
    Ok(AlphaSweep {
        entries,
        extrapolated,
        law,
        coupling,
    })
}

impl AlphaSweep {
    /// Largest Δ covered by the sweep (law evaluations beyond it extrapolate).
    pub fn max_delta(&self) -> f64 {
        self.extrapolated
            .iter()
            .map(|(d, _)| *d)
            .fold(0.0, f64::max)
    }

    /// Evaluate the fitted law 2πα(Δ) = (1 + aΔ)^(−b).
    pub fn alpha_at(&self, delta: f64) -> f64 {
        (1.0 + self.law.coefficient * delta).powf(-self.law.exponent)
    }
}
