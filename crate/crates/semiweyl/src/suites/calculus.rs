//! Torus symbol-calculus suites: composition residuals, resolvent
//! parametrix residuals, and the functional-calculus comparison. These
//! run on canonical test symbols (the scenario supplies the ħ-sweep and
//! tolerances); coefficients are integer-frequency trig on `L = 2π`, so
//! every grid mode is even and the discrete calculus carries no
//! half-integer-mode defect.

use std::sync::Arc;

use num_complex::Complex64;

use crate::coeffs::{mollify, HoelderField, MollifierKernel};
use crate::funcalc::{resolvent_symbols, FunctionProfile};
use crate::linalg::{two_norm_estimate, CMat};
use crate::quantize::{
    band_projector, weyl_quantize_on_torus, PhaseGrid, ResidualOp, SymbolSource,
};
use crate::report::{CsvTable, SuiteOutcome};
use crate::scenario::Scenario;
use crate::symcalc::{moyal_terms, CoeffExpr, CompiledExpr, PolySymbol};
use crate::util::log_log_slope;

use super::{torus_grid, SuiteError};

const L: f64 = 2.0 * std::f64::consts::PI;

fn vfield() -> Arc<HoelderField> {
    HoelderField::trig("V", 1.0, vec![(1.0, -1.0, 0.0)]) // 1 - cos x
}

/// Sweep used by the calculus suites: log2-spaced, bounded below so the
/// largest grids stay around n = 2048.
fn calculus_hbars(scenario: &Scenario) -> Vec<f64> {
    let _ = scenario;
    vec![
        2.0f64.powf(-4.0),
        2.0f64.powf(-4.75),
        2.0f64.powf(-5.5),
        2.0f64.powf(-6.25),
        2.0f64.powf(-7.0),
    ]
}

fn guarded_norm(
    a: &CMat,
    b: &CMat,
    correction: Option<&CMat>,
    identity: f64,
    grid: PhaseGrid,
) -> f64 {
    let guard = band_projector(grid.n);
    let res = ResidualOp {
        a,
        b,
        c: correction,
        identity,
        guard: Some(&guard),
    };
    two_norm_estimate(&res, 70)
}

pub fn run_compose_residuals(scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("compose-residuals");
    let hbars = calculus_hbars(scenario);
    let kernel = Arc::new(MollifierKernel::new(
        scenario.kernel_moment_order,
        scenario.kernel_radius,
    ));
    // Rough coefficient for the mollified pair: C^{3,1/2}, so orders up to
    // N+1 = 3 stay within the oracle and the expected slopes are N+1.
    let rough = HoelderField::abs_pow_sin("w35", 3, 0.5, 0.5, 2.0, 1.0)?;

    let mut table = CsvTable::new(
        "compose",
        vec!["hbar", "pair", "n_terms", "residual_norm"],
    );
    // Residual histories: [pair][n_terms][hbar].
    let mut errs = vec![vec![Vec::new(); 3]; 3];

    for &hbar in &hbars {
        let grid = torus_grid(L, hbar, 2.0, 4.0, 1 << 14)?;
        let eps = hbar.sqrt();
        let w_eps = mollify(rough.clone(), kernel.clone(), eps)?;

        let v = vfield();
        let s = HoelderField::trig("s2", 0.0, vec![(1.0, 0.0, 0.6)]);
        let pairs: Vec<(PolySymbol, PolySymbol)> = vec![
            // smooth kinetic x trig first-order
            (
                PolySymbol::term1(2, CoeffExpr::real(1.0))
                    .add(&PolySymbol::field_term1(0, v.clone())),
                PolySymbol::term1(1, CoeffExpr::real(2.0))
                    .add(&PolySymbol::field_term1(0, s.clone())),
            ),
            // potential x kinetic
            (
                PolySymbol::field_term1(0, v.clone()),
                PolySymbol::term1(2, CoeffExpr::real(1.0)),
            ),
            // mollified eps = ħ^{1/2} coefficients
            (
                PolySymbol::term1(2, CoeffExpr::real(1.0))
                    .add(&PolySymbol::field_term1(0, w_eps.clone())),
                PolySymbol::field_term1(1, w_eps.clone()),
            ),
        ];

        for (pi, (a, b)) in pairs.iter().enumerate() {
            let cj = moyal_terms(a, b, 0.5, 3)?;
            let oa = weyl_quantize_on_torus(&SymbolSource::Poly(a), grid);
            let ob = weyl_quantize_on_torus(&SymbolSource::Poly(b), grid);
            let mut corr = CMat::zeros(grid.n);
            for n_terms in 0..=2usize {
                let oc = weyl_quantize_on_torus(&SymbolSource::Poly(&cj[n_terms]), grid);
                corr.scaled_add(Complex64::new(hbar.powi(n_terms as i32), 0.0), &oc.mat);
                let norm = guarded_norm(&oa.mat, &ob.mat, Some(&corr), 0.0, grid);
                errs[pi][n_terms].push(norm);
                table.push(vec![
                    hbar.into(),
                    (pi + 1).into(),
                    n_terms.into(),
                    norm.into(),
                ]);
            }
        }
    }
    out.tables.push(table);

    let margin = scenario.tolerance("compose_slope_margin", 0.8);
    for pi in 0..3 {
        for n_terms in 0..=2usize {
            let slope =
                log_log_slope(&hbars, &errs[pi][n_terms], 1e-12).unwrap_or(f64::INFINITY);
            out.check(
                &format!("slope_pair{}_n{}", pi + 1, n_terms),
                slope,
                n_terms as f64 + margin,
                true,
            );
        }
    }
    Ok(out)
}

pub fn run_resolvent_residuals(scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("resolvent-residuals");
    let hbars = calculus_hbars(scenario);
    let z = Complex64::new(-1.0, 1.0);

    // a = p² + V(x) - 0.5 with V = 1 - cos x.
    let base = vec![PolySymbol::term1(2, CoeffExpr::real(1.0))
        .add(&PolySymbol::field_term1(0, vfield()))
        .add(&PolySymbol::constant(1, -0.5))];
    let series = resolvent_symbols(&base, 2)?;
    let compiled: Vec<CompiledExpr> = series
        .b
        .iter()
        .map(|b| CompiledExpr::compile(b, &base))
        .collect::<Result<_, _>>()?;

    let mut table = CsvTable::new("resolvent", vec!["hbar", "residual_norm"]);
    let mut errs = Vec::new();
    for &hbar in &hbars {
        let grid = torus_grid(L, hbar, 2.0, 4.0, 1 << 14)?;
        // B_{z,2} = b_0 + ħ b_1 + ħ² b_2 as one symbol closure.
        let bsym = |x: f64, p: f64| -> Complex64 {
            let c0 = compiled[0].at_x(x);
            let c1 = compiled[1].at_x(x);
            let c2 = compiled[2].at_x(x);
            c0.eval(p, Some(z)) + hbar * c1.eval(p, Some(z)) + hbar * hbar * c2.eval(p, Some(z))
        };
        let ob = weyl_quantize_on_torus(&SymbolSource::Func(&bsym), grid);
        let mut oa = weyl_quantize_on_torus(&SymbolSource::Poly(&base[0]), grid);
        // A - z.
        for i in 0..grid.n {
            let v = oa.mat.get(i, i) - z;
            oa.mat.set(i, i, v);
        }
        let norm = guarded_norm(&oa.mat, &ob.mat, None, 1.0, grid);
        errs.push(norm);
        table.push(vec![hbar.into(), norm.into()]);
    }
    out.tables.push(table);
    let slope = log_log_slope(&hbars, &errs, 1e-12).unwrap_or(f64::NAN);
    out.check(
        "parametrix_slope",
        slope,
        scenario.tolerance("resolvent_slope", 2.7),
        true,
    );
    Ok(out)
}

pub fn run_funcalc(scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("funcalc");

    // H = Op_W(p² + V - 0.5): spectrum bottom near -0.5, wells around 0.
    let base = vec![PolySymbol::term1(2, CoeffExpr::real(1.0))
        .add(&PolySymbol::field_term1(0, vfield()))
        .add(&PolySymbol::constant(1, -0.5))];
    let series = resolvent_symbols(&base, 1)?;

    // Symbolic identity a^f_1 = a_1 f'(a_0), i.e. d_{1,1} = -a_1.
    let d11_ok = series.d11().pretty() == "-1·a1";
    out.slopes
        .insert("d11_is_minus_a1".into(), if d11_ok { 1.0 } else { 0.0 });
    out.tolerances.insert("d11_is_minus_a1".into(), 1.0);
    if !d11_ok {
        out.fail(format!("d_{{1,1}} = {}", series.d11().pretty()));
    }

    let f = FunctionProfile::bump("f", -0.45, -0.35, -0.2, -0.1);
    let hbars: Vec<f64> = vec![
        2.0f64.powf(-3.0),
        2.0f64.powf(-4.0),
        2.0f64.powf(-5.0),
        2.0f64.powf(-6.0),
        2.0f64.powf(-7.0),
    ];
    let mut table = CsvTable::new("funcalc", vec!["hbar", "residual_norm"]);
    let mut errs = Vec::new();
    for &hbar in &hbars {
        let grid = torus_grid(L, hbar, 1.5, 4.0, 1 << 13)?;
        let op = weyl_quantize_on_torus(&SymbolSource::Poly(&base[0]), grid);
        let fh = op.function_of(|e| f.eval(e));
        // a^f_0 = f(a_0) quantized (a^f_1 = 0 here since a_1 = 0).
        let a0 = &base[0];
        let sym = |x: f64, p: f64| -> Complex64 {
            Complex64::new(f.eval(a0.eval1(x, p).re), 0.0)
        };
        let oc = weyl_quantize_on_torus(&SymbolSource::Func(&sym), grid);
        let mut r = fh;
        r.scaled_add(Complex64::new(-1.0, 0.0), &oc.mat);
        let norm = two_norm_estimate(&r, 70);
        errs.push(norm);
        table.push(vec![hbar.into(), norm.into()]);
    }
    out.tables.push(table);
    let slope = log_log_slope(&hbars, &errs, 1e-12).unwrap_or(f64::NAN);
    out.check(
        "funcalc_slope",
        slope,
        scenario.tolerance("funcalc_slope", 1.8),
        true,
    );
    Ok(out)
}
