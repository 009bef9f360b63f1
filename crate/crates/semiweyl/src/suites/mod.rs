//! Validation suites: each one runs a named experiment over a scenario's
//! ħ-sweep, writes CSV rows, records fitted slopes, and judges them
//! against tolerances pinned from the acceptance criteria.

mod calculus;
mod dos;
mod garding;
mod mollify;
mod stationary;
mod sweeps;

pub use calculus::{run_compose_residuals, run_funcalc, run_resolvent_residuals};
pub use dos::{run_dos, run_tauberian};
pub use garding::run_garding;
pub use mollify::run_mollify_rates;
pub use stationary::run_stationary_phase;
pub use sweeps::{run_riesz_sweep, run_weyl_sweep};

use thiserror::Error;

use crate::quantize::PhaseGrid;
use crate::report::SuiteOutcome;
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` needs a {needs} grid")]
    WrongGrid { suite: &'static str, needs: &'static str },
    #[error(transparent)]
    Coeffs(#[from] crate::coeffs::CoeffsError),
    #[error(transparent)]
    Symcalc(#[from] crate::symcalc::SymcalcError),
    #[error(transparent)]
    Quantize(#[from] crate::quantize::QuantizeError),
    #[error(transparent)]
    FormOp(#[from] crate::quantize::matio::MatrixIoError),
    #[error(transparent)]
    Form(#[from] crate::quantize::FormOpError),
    #[error(transparent)]
    Funcalc(#[from] crate::funcalc::FuncalcError),
    #[error(transparent)]
    Asymptotics(#[from] crate::asymptotics::AsymptoticsError),
    #[error(transparent)]
    Spectra(#[from] crate::spectra::SpectraError),
}

/// Run one suite by name.
pub fn run_suite(name: &str, scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    match name {
        "mollify-rates" => run_mollify_rates(scenario),
        "compose-residuals" => run_compose_residuals(scenario),
        "resolvent-residuals" => run_resolvent_residuals(scenario),
        "funcalc" => run_funcalc(scenario),
        "garding" => run_garding(scenario),
        "weyl-sweep" => run_weyl_sweep(scenario),
        "riesz-sweep" => run_riesz_sweep(scenario),
        "dos" => run_dos(scenario),
        "tauberian" => run_tauberian(scenario),
        "stationary-phase" => run_stationary_phase(scenario),
        other => Err(SuiteError::UnknownSuite(other.to_string())),
    }
}

/// Run a scenario's configured suites in order.
pub fn run_scenario_suites(scenario: &Scenario) -> Result<Vec<SuiteOutcome>, SuiteError> {
    scenario
        .suites
        .iter()
        .map(|s| run_suite(s, scenario))
        .collect()
}

/// Torus grid sized so max grid momentum = nyquist_factor x classical_p,
/// honoring the configured cap.
pub(crate) fn torus_grid(
    l: f64,
    hbar: f64,
    classical_p: f64,
    nyquist_factor: f64,
    n_max: usize,
) -> Result<PhaseGrid, SuiteError> {
    let p_max = nyquist_factor * classical_p;
    let mut n = (2.0 * l * p_max / (std::f64::consts::PI * hbar)).ceil() as usize;
    n += n % 2;
    let n = n.min(n_max);
    let grid = PhaseGrid::new(n, l, hbar)?;
    grid.check_nyquist(classical_p)?;
    Ok(grid)
}
