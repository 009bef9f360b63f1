//! Mollification-rate suite: fitted log-log slopes of the derivative
//! approximation errors against the `ε^{k+μ-|η|}` law, plus the sampled
//! field export.

use std::sync::Arc;

use crate::coeffs::{mollify, MollifierKernel, ScalarField};
use crate::report::{CsvTable, SuiteOutcome};
use crate::scenario::Scenario;
use crate::util::log_log_slope;

use super::SuiteError;

pub fn run_mollify_rates(scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("mollify-rates");
    let kernel = Arc::new(MollifierKernel::new(
        scenario.kernel_moment_order,
        scenario.kernel_radius,
    ));

    // The canonical C^{1,1/2} exemplar |x|^{1+μ} + 1 drives the rate
    // checks; its kink sits at the origin, so the sup grids track it at
    // scale eps.
    let field = crate::coeffs::make_test_field(
        crate::coeffs::TestFamily::AbsPower,
        &crate::coeffs::FieldParams {
            mu: scenario.mu.clamp(0.25, 0.75),
            ..Default::default()
        },
    )?;
    let k = field.k;
    let mu = field.mu;

    let epss: Vec<f64> = (3..=9).map(|j| 2.0f64.powi(-j)).collect();
    let orders: Vec<u32> = (0..=k + 1).collect();
    let mut sup_errs: Vec<Vec<f64>> = vec![Vec::new(); orders.len()];

    let mut table = CsvTable::new("rates", vec!["eps", "order", "sup_err"]);
    for &eps in &epss {
        let fe = mollify(field.clone(), kernel.clone(), eps)?;
        let mut xs: Vec<f64> = (-40..=40).map(|t| eps * t as f64 / 8.0).collect();
        xs.extend((-24..=24).map(|t| t as f64 / 16.0));
        for (oi, &ord) in orders.iter().enumerate() {
            let mut sup: f64 = 0.0;
            for &x in &xs {
                let v = if ord <= k {
                    (fe.deriv(ord, x) - field.deriv(ord, x)).abs()
                } else {
                    fe.deriv(ord, x).abs()
                };
                sup = sup.max(v);
            }
            sup_errs[oi].push(sup);
            table.push(vec![eps.into(), (ord as usize).into(), sup.into()]);
        }
    }
    out.tables.push(table);

    for (oi, &ord) in orders.iter().enumerate() {
        let expect = k as f64 + mu - ord as f64;
        let slope = log_log_slope(&epss, &sup_errs[oi], 1e-14).unwrap_or(f64::NAN);
        out.slopes.insert(format!("slope_order{ord}"), slope);
        out.tolerances
            .insert(format!("slope_order{ord}"), expect);
        let tol = scenario.tolerance("mollify_slope_tol", 0.15);
        if !((slope - expect).abs() <= tol) {
            out.fail(format!(
                "mollify rate order {ord}: slope {slope:.4} vs {expect:.4} ± {tol}"
            ));
        }
    }

    // Sampled field export: x, f, f_eps, abs_err at a representative eps.
    let eps = 2.0f64.powi(-5);
    let fe = mollify(field.clone(), kernel, eps)?;
    let mut export = CsvTable::new("field", vec!["x", "f", "f_eps", "abs_err"]);
    for t in -200..=200 {
        let x = t as f64 / 100.0;
        let f0 = field.eval(x);
        let f1 = fe.eval(x);
        export.push(vec![x.into(), f0.into(), f1.into(), (f1 - f0).abs().into()]);
    }
    out.tables.push(export);
    Ok(out)
}
