//! Exact spectral side: counting, Riesz means, and smoothed counting
//! densities.

mod smoothing;

pub use smoothing::{smoothed_counting_density, tauberian_gap, SmoothingKernel};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::{eigenvalues_in_interval, sturm_count_below_strict, SymTridiag};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("gamma = {0} outside (0, 1]")]
    BadGamma(f64),
}

/// Eigenvalues within `1e-12·(1+|e|)` of the threshold count as at it
/// (discretization tie-break, inclusive).
fn tie_band(e: f64) -> f64 {
    1e-12 * (1.0 + e.abs())
}

/// Number of eigenvalues `<= e` of a real symmetric tridiagonal matrix.
pub fn sturm_count_below(t: &SymTridiag, e: f64) -> usize {
    sturm_count_below_strict(t, e + tie_band(e))
}

/// Eigenvalues `<= e`, ascending, bisected to `tol`.
pub fn eigenvalues_below(t: &SymTridiag, e: f64, tol: f64) -> Vec<f64> {
    let (lo, _) = t.gershgorin();
    eigenvalues_in_interval(t, lo - 1.0, e + tie_band(e), tol)
}

/// Riesz mean `Σ_{e_j <= 0} (-e_j)^γ` over a sampled spectrum.
pub fn riesz_mean(eigenvalues: &[f64], gamma: f64) -> Result<f64, SpectraError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(SpectraError::BadGamma(gamma));
    }
    let band = tie_band(0.0);
    Ok(eigenvalues
        .iter()
        .filter(|&&e| e <= band)
        .map(|&e| (-e).max(0.0).powf(gamma))
        .sum())
}

/// Sharp counting function built from a sampled spectrum.
#[derive(Clone, Debug)]
pub struct CountingFunction {
    /// Jump points (eigenvalues), ascending.
    pub jumps: Vec<f64>,
    pub hbar: f64,
}

impl CountingFunction {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, hbar: f64) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        CountingFunction {
            jumps: eigenvalues,
            hbar,
        }
    }

    /// `N(e)` with the inclusive tie-break.
    pub fn count_at(&self, e: f64) -> usize {
        let e = e + tie_band(e);
        self.jumps.partition_point(|&x| x <= e)
    }

    /// Sampled `(E, N(E))` table (monotone by construction).
    pub fn samples(&self, es: &[f64]) -> Vec<(f64, usize)> {
        es.iter().map(|&e| (e, self.count_at(e))).collect()
    }
}

/// Spectrum snapshot at one ħ value.
pub struct SpectralSample {
    pub hbar: f64,
    pub count: usize,
    pub riesz: BTreeMap<String, f64>,
    pub eigenvalues_below: Vec<f64>,
}

impl SpectralSample {
    pub fn new(
        eigenvalues_below: Vec<f64>,
        hbar: f64,
        gammas: &[f64],
    ) -> Result<Self, SpectraError> {
        let count = eigenvalues_below.len();
        let mut riesz = BTreeMap::new();
        for &g in gammas {
            riesz.insert(format!("{g}"), riesz_mean(&eigenvalues_below, g)?);
        }
        Ok(SpectralSample {
            hbar,
            count,
            riesz,
            eigenvalues_below,
        })
    }
}

/// Layer-cake consistency: `riesz(γ) = γ ∫_{-∞}^0 (-s)^{γ-1} N(s) ds`,
/// evaluated by quadrature over the sampled counting function. Returns
/// the relative deviation from the direct sum.
pub fn riesz_layer_cake_residual(cf: &CountingFunction, gamma: f64) -> Result<f64, SpectraError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(SpectraError::BadGamma(gamma));
    }
    let direct = riesz_mean(&cf.jumps, gamma)?;
    if direct == 0.0 {
        return Ok(0.0);
    }
    // N(s) is a step function: the integral is Σ_j ((-e_j)^γ) exactly, so
    // quadrature here uses the substitution u = (-s)^γ to tame γ < 1 and
    // integrates the step function numerically (the point of the check).
    let smin = cf.jumps.first().copied().unwrap_or(0.0).min(0.0);
    let umax = (-smin).powf(gamma);
    let val = crate::quad::integrate_adaptive(
        &|u: f64| {
            let s = -u.powf(1.0 / gamma);
            cf.count_at(s) as f64
        },
        0.0,
        umax,
        1e-9 * direct,
    );
    Ok((val - direct).abs() / direct)
}
