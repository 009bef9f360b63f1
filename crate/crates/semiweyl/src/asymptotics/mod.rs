//! Phase-space side of the asymptotics: Weyl volumes, coarea densities,
//! Riesz phase terms, and the quadratic stationary-phase expansion.

mod stationary;
mod volume;

pub use stationary::{
    direct_oscillatory_1d, stationary_phase_expand, Amplitude, ExpansionResult, GaussianAmplitude,
    OddAmplitude,
};
pub use volume::{
    adaptive_phase_integral, coarea_density, riesz_phase_terms, weighted_sublevel_volume,
    weyl_volume, PhaseRegion, VolumeResult,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("sublevel set not certified compact: a0 = {value:.6} <= E + margin at boundary point (x={x:.4}, p={p:.4})")]
    NotCompact { x: f64, p: f64, value: f64 },
    #[error("gamma = {0} outside (0, 1]")]
    BadGamma(f64),
    #[error("coarea differentiation did not converge: Richardson disagreement {disagreement:.3e} > tol {tol:.3e} at s = {s}")]
    CoareaStep {
        s: f64,
        disagreement: f64,
        tol: f64,
    },
    #[error("non-critical certification failed: |∇a0| = {grad:.3e} below floor {floor:.3e} near the level set s = {s}")]
    Critical { s: f64, grad: f64, floor: f64 },
    #[error("singular quadratic form in stationary phase")]
    SingularForm,
    #[error(transparent)]
    Symcalc(#[from] crate::symcalc::SymcalcError),
}
