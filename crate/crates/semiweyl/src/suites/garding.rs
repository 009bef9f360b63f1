//! Sharp Gårding suite: the quantization of `(p + sin x)² + cos²x` is a
//! sum of operator squares and therefore non-negative; the suite measures
//! the negative part of the minimum eigenvalue over the ħ-sweep and fits
//! its exponent (vacuously passing at the numerical floor).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::linalg::LinearOp;
use crate::quantize::{garding_check, weyl_quantize_on_torus, PhaseGrid, SymbolSource};
use crate::report::{CsvTable, SuiteOutcome};
use crate::scenario::Scenario;
use crate::symcalc::{CoeffExpr, PolySymbol};

use super::{torus_grid, SuiteError};

/// Matrix-free Weyl quantization of `(p + sin x)² + cos² x` via the exact
/// operator identity `(P + S)² + C²` (FFT momentum multiplication plus
/// diagonal factors).
struct ShiftedKineticOp {
    grid: PhaseGrid,
    fft: Arc<dyn rustfft::Fft<f64>>,
    ifft: Arc<dyn rustfft::Fft<f64>>,
    sinx: Vec<f64>,
    cos2x: Vec<f64>,
    ps: Vec<f64>,
}

impl ShiftedKineticOp {
    fn new(grid: PhaseGrid) -> Self {
        let mut planner = FftPlanner::new();
        ShiftedKineticOp {
            grid,
            fft: planner.plan_fft_forward(grid.n),
            ifft: planner.plan_fft_inverse(grid.n),
            sinx: (0..grid.n).map(|j| grid.x(j).sin()).collect(),
            cos2x: (0..grid.n).map(|j| grid.x(j).cos().powi(2)).collect(),
            ps: (0..grid.n).map(|m| grid.p(m)).collect(),
        }
    }

    fn apply_p_plus_s(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n;
        let mut buf = v.to_vec();
        self.fft.process(&mut buf);
        for (z, &p) in buf.iter_mut().zip(&self.ps) {
            *z *= p;
        }
        self.ifft.process(&mut buf);
        for i in 0..n {
            out[i] = buf[i] / n as f64 + self.sinx[i] * v[i];
        }
    }
}

impl LinearOp for ShiftedKineticOp {
    fn dim(&self) -> usize {
        self.grid.n
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n;
        let mut t = vec![Complex64::new(0.0, 0.0); n];
        self.apply_p_plus_s(v, &mut t);
        self.apply_p_plus_s(&t, out);
        for i in 0..n {
            out[i] += self.cos2x[i] * v[i];
        }
    }
}

pub fn run_garding(scenario: &Scenario) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new("garding");
    // Classical momentum range of (p + sin x)²: |p| <= ~2.2 on the low
    // levels; keep the usual 2x margin inside the quarter band.
    let classical_p = 2.5;
    let l = 2.0 * std::f64::consts::PI;

    // Equivalence of the FFT closure and the dense quantization, checked
    // once at a moderate grid.
    {
        let grid = PhaseGrid::new(256, l, 0.05)?;
        let sym = shifted_kinetic_symbol();
        let dense = weyl_quantize_on_torus(&SymbolSource::Poly(&sym), grid);
        let op = ShiftedKineticOp::new(grid);
        let v: Vec<Complex64> = (0..grid.n)
            .map(|j| Complex64::new((j as f64 * 0.13).sin(), (j as f64 * 0.07).cos()))
            .collect();
        let mut a = vec![Complex64::new(0.0, 0.0); grid.n];
        let mut b = vec![Complex64::new(0.0, 0.0); grid.n];
        dense.mat.matvec(&v, &mut a);
        op.apply(&v, &mut b);
        let err: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        if err > 1e-8 {
            out.fail(format!("FFT closure vs dense quantization: err {err:.3e}"));
        }
    }

    let hbars: Vec<f64> = scenario.hbars.clone();
    let mut ops: Vec<(f64, ShiftedKineticOp)> = Vec::new();
    for &hbar in &hbars {
        let grid = torus_grid(l, hbar, classical_p, 4.0, 1 << 16)?;
        ops.push((hbar, ShiftedKineticOp::new(grid)));
    }
    let op_refs: Vec<(f64, &dyn LinearOp)> =
        ops.iter().map(|(h, op)| (*h, op as &dyn LinearOp)).collect();
    let report = garding_check(&op_refs, 420);

    let mut table = CsvTable::new("garding", vec!["hbar", "min_eig", "neg_part"]);
    for &(hbar, min_eig, neg) in &report.rows {
        table.push(vec![hbar.into(), min_eig.into(), neg.into()]);
    }
    out.tables.push(table);

    let margin = scenario.tolerance("garding_exponent", 0.9);
    match (report.all_at_floor, report.fitted_exponent) {
        (true, _) => {
            // min eig >= -floor everywhere: the inequality holds with room
            // to spare and the exponent fit is vacuous.
            out.slopes.insert("neg_part_exponent".into(), f64::INFINITY);
            out.tolerances.insert("neg_part_exponent".into(), margin);
        }
        (false, Some(slope)) => {
            out.check("neg_part_exponent", slope, margin, true);
        }
        (false, None) => out.fail("garding: exponent fit failed".into()),
    }
    Ok(out)
}

fn shifted_kinetic_symbol() -> PolySymbol {
    // p² + 2 sin(x) p + 1  =  (p + sin x)² + cos² x.
    let s = crate::coeffs::HoelderField::trig("sinx", 0.0, vec![(1.0, 0.0, 1.0)]);
    PolySymbol::term1(2, CoeffExpr::real(1.0))
        .add(&PolySymbol::field_term1(1, s).scale(Complex64::new(2.0, 0.0)))
        .add(&PolySymbol::constant(1, 1.0))
}
