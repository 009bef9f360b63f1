//! Stationary-phase suite: remainder slopes of the quadratic expansion
//! against the closed Fresnel–Gaussian integral.

use num_complex::Complex64;

use crate::asymptotics::{stationary_phase_expand, GaussianAmplitude};
use crate::report::{CsvTable, SuiteOutcome};
use crate::scenario::Scenario;
use crate::util::log_log_slope;

use super::SuiteError;

pub fn run_stationary_phase(scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("stationary-phase");
    let amp = GaussianAmplitude {
        dim: 1,
        radius: 10.0,
    };
    let hbars: Vec<f64> = (3..=7).map(|j| 2.0f64.powi(-j)).collect();
    let mut table = CsvTable::new(
        "stationary",
        vec!["hbar", "n_terms", "approx_re", "approx_im", "exact_re", "exact_im", "err"],
    );
    for n in 0..=2u32 {
        let exp = stationary_phase_expand(&[vec![1.0]], &amp, n)?;
        let mut errs = Vec::new();
        for &hbar in &hbars {
            // ∫ e^{iv²/(2ħ)} e^{-v²/2} dv = √(2π/(1 - i/ħ)).
            let exact = (Complex64::new(2.0 * std::f64::consts::PI, 0.0)
                / Complex64::new(1.0, -1.0 / hbar))
            .sqrt();
            let approx = exp.value(hbar, 1);
            // Normalize by the √ħ prefactor so the slope reads N+1.
            let err = (exact - approx).norm() / hbar.sqrt();
            errs.push(err);
            table.push(vec![
                hbar.into(),
                (n as usize).into(),
                approx.re.into(),
                approx.im.into(),
                exact.re.into(),
                exact.im.into(),
                err.into(),
            ]);
        }
        let slope = log_log_slope(&hbars, &errs, 1e-14).unwrap_or(f64::NAN);
        out.check(
            &format!("slope_n{n}"),
            slope,
            n as f64 + scenario.tolerance("stationary_slope_margin", 0.8),
            true,
        );
    }
    out.tables.push(table);
    Ok(out)
}
