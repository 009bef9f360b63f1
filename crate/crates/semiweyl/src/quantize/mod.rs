//! Discrete realizations of symbols as self-adjoint matrices.
//!
//! On the torus `x ∈ [-L, L)` with `n` grid points the `t`-quantization is
//! an exact finite formula,
//!
//! `M[j,l] = (1/n) Σ_m e^{i (x_j - x_l) p_m / ħ} a((1-t)x_j + t x_l, p_m)`,
//!
//! with momenta `p_m = πħm/L`, `m ∈ [-n/2, n/2)`. The phases reduce to
//! pure DFT phases, so assembly runs on FFTs. The wrap-around of the
//! momentum grid at `±p_max` is a documented systematic of the discrete
//! torus: states within a coefficient bandwidth of the seam pick up O(1)
//! aliasing, which is why residual norms are measured through a
//! momentum-band guard projector (see [`band_projector`]).
use std::sync::Arc;
mod form_op;
pub mod matio;

pub use form_op::{assemble_form_operator, FormOperator1D};



use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::linalg::{
    eigenvalues_in_interval, hermitian_eigen, hermitian_tridiagonalize, lanczos_extreme_eigs,
    CMat, LinearOp,
};
use crate::symcalc::PolySymbol;
use crate::util::log_log_slope;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("grid size {0} is not even and >= 4")]
    BadGridSize(usize),
    #[error(
        "Nyquist violation: max grid momentum {available:.3} < 2 x classical bound {required:.3}"
    )]
    Nyquist { available: f64, required: f64 },
    #[error("generic t-quantization limited to n <= {limit}, got {n}")]
    GenericTTooLarge { n: usize, limit: usize },
    #[error(transparent)]
    Symcalc(#[from] crate::symcalc::SymcalcError),
}

/// Discrete torus phase grid.
#[derive(Clone, Copy, Debug)]
pub struct PhaseGrid {
    pub n: usize,
    /// Half-period: x ∈ [-L, L).
    pub l: f64,
    pub hbar: f64,
}

impl PhaseGrid {
    pub fn new(n: usize, l: f64, hbar: f64) -> Result<Self, QuantizeError> {
        if n < 4 || n % 2 != 0 {
            return Err(QuantizeError::BadGridSize(n));
        }
        Ok(PhaseGrid { n, l, hbar })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.l + self.dx() * j as f64
    }

    /// Momentum of FFT index `m` (signed: indices above n/2 wrap negative).
    pub fn p(&self, m: usize) -> f64 {
        let ms = if m < self.n / 2 {
            m as isize
        } else {
            m as isize - self.n as isize
        };
        std::f64::consts::PI * self.hbar * ms as f64 / self.l
    }

    pub fn p_max(&self) -> f64 {
        std::f64::consts::PI * self.hbar * (self.n as f64 / 2.0) / self.l
    }

    /// Check max |p| >= 2 x the classical momentum bound of the scenario.
    pub fn check_nyquist(&self, classical_p: f64) -> Result<(), QuantizeError> {
        if self.p_max() < 2.0 * classical_p {
            return Err(QuantizeError::Nyquist {
                available: self.p_max(),
                required: classical_p,
            });
        }
        Ok(())
    }

    /// Smallest even n with p_max >= 2 x classical bound.
    pub fn n_for(l: f64, hbar: f64, classical_p: f64) -> usize {
        let n = (4.0 * classical_p * l / (std::f64::consts::PI * hbar)).ceil() as usize;
        n + n % 2
    }
}

/// A symbol the quantizer can sample: either a polynomial symbol (whose
/// x-coefficients are cached per distinct midpoint) or a raw closure.
pub enum SymbolSource<'a> {
    Poly(&'a PolySymbol),
    Func(&'a (dyn Fn(f64, f64) -> Complex64 + Sync)),
}

impl SymbolSource<'_> {
    /// Values on the tensor grid `xs × ps`, row-major in `xs`.
    fn table(&self, xs: &[f64], ps: &[f64]) -> Vec<Complex64> {
        match self {
            SymbolSource::Func(f) => {
                use rayon::prelude::*;
                let np = ps.len();
                let mut out = vec![Complex64::new(0.0, 0.0); xs.len() * np];
                out.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
                    for (k, &p) in ps.iter().enumerate() {
                        row[k] = f(xs[i], p);
                    }
                });
                out
            }
            SymbolSource::Poly(sym) => {
                use rayon::prelude::*;
                // Cache coefficient values per x, then sweep p powers.
                let terms: Vec<(u32, &crate::symcalc::CoeffExpr)> = sym
                    .terms
                    .iter()
                    .map(|(a, c)| (a.get(0), c))
                    .collect();
                let np = ps.len();
                let mut out = vec![Complex64::new(0.0, 0.0); xs.len() * np];
                out.par_chunks_mut(np).enumerate().for_each(|(i, row)| {
                    let x = xs[i];
                    let coeffs: Vec<(u32, Complex64)> =
                        terms.iter().map(|(k, c)| (*k, c.eval(x))).collect();
                    for (kp, &p) in ps.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (k, c) in &coeffs {
                            acc += c * p.powi(*k as i32);
                        }
                        row[kp] = acc;
                    }
                });
                out
            }
        }
    }
}

/// Dense matrix realization of a quantized symbol.
pub struct OperatorMatrix {
    pub grid: PhaseGrid,
    pub mat: CMat,
    pub hermitian_residual: f64,
}

impl OperatorMatrix {
    /// All eigenvalues (ascending) via tridiagonalization + bisection.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let ht = hermitian_tridiagonalize(&self.mat, false);
        let (lo, hi) = ht.t.gershgorin();
        eigenvalues_in_interval(&ht.t, lo - 1.0, hi + 1.0, 1e-11)
    }

    /// Eigenvalues in a window (ascending).
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let ht = hermitian_tridiagonalize(&self.mat, false);
        eigenvalues_in_interval(&ht.t, lo, hi, 1e-11)
    }

    /// `f(H)` by full eigendecomposition (the spectral oracle).
    pub fn function_of(&self, f: impl Fn(f64) -> f64) -> CMat {
        let (w, v) = hermitian_eigen(&self.mat, true);
        let v = v.expect("vectors requested");
        let n = self.mat.n;
        // V diag(f(w)) Vᴴ
        let mut scaled = v.clone();
        for k in 0..n {
            let fv = f(w[k]);
            for i in 0..n {
                let val = scaled.get(i, k) * fv;
                scaled.set(i, k, val);
            }
        }
        scaled.matmul(&v.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }
}

fn quantize_table(grid: PhaseGrid, table_builder: impl Fn(&[f64]) -> Vec<Complex64>) -> CMat {
    // Midpoint-quantization core: the symbol is sampled on the 2n points
    // of the half-grid (s = 0..2n-1, midpoint -L + s·dx/2), each row is
    // inverse-FFT'd over the momentum index, and entries are gathered by
    // (j+l, j-l). Pairs whose index distance exceeds n/2 are physically
    // adjacent across the torus seam; their geodesic midpoint is the naive
    // one shifted by half a period, which is row (j+l+n) mod 2n of the
    // same table. Using the naive midpoint there corrupts the symbol
    // calculus at O(ħn).
    let n = grid.n;
    let mids: Vec<f64> = (0..2 * n)
        .map(|s| {
            let m = -grid.l + grid.dx() * s as f64 / 2.0;
            if m >= grid.l {
                m - 2.0 * grid.l
            } else {
                m
            }
        })
        .collect();
    let mut rows = table_builder(&mids);
    assert_eq!(rows.len(), 2 * n * n);
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    use rayon::prelude::*;
    rows.par_chunks_mut(n).for_each(|row| {
        ifft.process(row);
        for v in row.iter_mut() {
            *v /= n as f64;
        }
    });
    let mut mat = CMat::zeros(n);
    let half = n as isize / 2;
    for j in 0..n {
        for l in 0..n {
            let dr = j as isize - l as isize;
            let s = if dr.abs() > half { (j + l + n) % (2 * n) } else { j + l };
            let d = (j + n - l) % n;
            mat.set(j, l, rows[s * n + d]);
        }
    }
    mat
}

/// Weyl quantization (`t = 1/2`) on the discrete torus.
pub fn weyl_quantize_on_torus(src: &SymbolSource, grid: PhaseGrid) -> OperatorMatrix {
    let ps: Vec<f64> = (0..grid.n).map(|m| grid.p(m)).collect();
    let mat = quantize_table(grid, |mids| src.table(mids, &ps));
    let hermitian_residual = mat.hermitian_residual();
    OperatorMatrix {
        grid,
        mat,
        hermitian_residual,
    }
}

/// General `t`-quantization. `t = 0, 1/2, 1` run on FFTs; other values
/// fall back to the O(n³) direct sum and are capped at n = 512.
pub fn t_quantize_on_torus(
    src: &SymbolSource,
    t: f64,
    grid: PhaseGrid,
) -> Result<OperatorMatrix, QuantizeError> {
    let n = grid.n;
    let ps: Vec<f64> = (0..n).map(|m| grid.p(m)).collect();
    if t == 0.5 {
        return Ok(weyl_quantize_on_torus(src, grid));
    }
    if t == 0.0 || t == 1.0 {
        // Midpoint is x_j (t=0) or x_l (t=1): one FFT per row/column.
        let xs: Vec<f64> = (0..n).map(|j| grid.x(j)).collect();
        let mut rows = src.table(&xs, &ps);
        let mut planner = FftPlanner::new();
        let ifft = planner.plan_fft_inverse(n);
        use rayon::prelude::*;
        rows.par_chunks_mut(n).for_each(|row| {
            ifft.process(row);
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        });
        let mut mat = CMat::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let d = (j + n - l) % n;
                let base = if t == 0.0 { j } else { l };
                mat.set(j, l, rows[base * n + d]);
            }
        }
        let hermitian_residual = mat.hermitian_residual();
        return Ok(OperatorMatrix {
            grid,
            mat,
            hermitian_residual,
        });
    }
    if n > 512 {
        return Err(QuantizeError::GenericTTooLarge { n, limit: 512 });
    }
    let mut mat = CMat::zeros(n);
    for j in 0..n {
        for l in 0..n {
            // Geodesic interpolation across the seam.
            let xj = grid.x(j);
            let mut xl = grid.x(l);
            if xj - xl > grid.l {
                xl += 2.0 * grid.l;
            } else if xl - xj > grid.l {
                xl -= 2.0 * grid.l;
            }
            let mut xarg = (1.0 - t) * xj + t * xl;
            if xarg >= grid.l {
                xarg -= 2.0 * grid.l;
            } else if xarg < -grid.l {
                xarg += 2.0 * grid.l;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &p) in ps.iter().enumerate() {
                let phase = 2.0 * std::f64::consts::PI
                    * (m as f64)
                    * ((j + n - l) % n) as f64
                    / n as f64;
                let val = match src {
                    SymbolSource::Poly(s) => s.eval1(xarg, p),
                    SymbolSource::Func(f) => f(xarg, p),
                };
                acc += val * Complex64::new(phase.cos(), phase.sin());
            }
            mat.set(j, l, acc / n as f64);
        }
    }
    let hermitian_residual = mat.hermitian_residual();
    Ok(OperatorMatrix {
        grid,
        mat,
        hermitian_residual,
    })
}

/// Matrix trace together with the phase-space integral it must equal:
/// `Tr Op_W(a) = (2πħ)^{-1} ∫∫ a dx dp` (exact on the discrete torus,
/// where both sides are the same double sum).
pub struct TraceCheck {
    pub trace: f64,
    pub phase_integral: f64,
}

pub fn trace_of_quantization(src: &SymbolSource, grid: PhaseGrid) -> TraceCheck {
    let n = grid.n;
    let xs: Vec<f64> = (0..n).map(|j| grid.x(j)).collect();
    let ps: Vec<f64> = (0..n).map(|m| grid.p(m)).collect();
    let table = src.table(&xs, &ps);
    let sum: f64 = table.iter().map(|v| v.re).sum();
    let trace = sum / n as f64;
    // Riemann sum with cell 2πħ/n per point: (2πħ)^{-1} ΣΣ a dxdp.
    let cell = grid.dx() * (std::f64::consts::PI * grid.hbar / grid.l);
    let phase_integral = sum * cell / (2.0 * std::f64::consts::PI * grid.hbar);
    TraceCheck {
        trace,
        phase_integral,
    }
}

/// Momentum-band guard projector: keeps FFT modes with signed index
/// `|m| <= keep`. Residuals of symbol-calculus identities are measured as
/// `‖Π R Π‖` with `keep = n/4`: the momentum grid is a sawtooth across the
/// seam, and its kink injects checkerboard artifacts that transfer
/// momentum ±n/2 — an input inside the quarter band is mapped outside it,
/// so the compressed norm sees only the continuum residual. (Nyquist
/// sizing keeps the classically relevant momenta well inside the quarter
/// band.)
pub struct BandGuard {
    pub n: usize,
    pub keep: usize,
    fft: Arc<dyn rustfft::Fft<f64>>,
    ifft: Arc<dyn rustfft::Fft<f64>>,
}

/// Quarter-band projector for residual measurements.
pub fn band_projector(n: usize) -> BandGuard {
    band_projector_keep(n, n / 4)
}

pub fn band_projector_keep(n: usize, keep: usize) -> BandGuard {
    let mut planner = FftPlanner::new();
    BandGuard {
        n,
        keep,
        fft: planner.plan_fft_forward(n),
        ifft: planner.plan_fft_inverse(n),
    }
}

impl BandGuard {
    pub fn project(&self, v: &mut [Complex64]) {
        let n = self.n;
        self.fft.process(v);
        for (m, z) in v.iter_mut().enumerate() {
            let ms = if m < n / 2 { m as isize } else { m as isize - n as isize };
            if ms.unsigned_abs() > self.keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        self.ifft.process(v);
        for z in v.iter_mut() {
            *z /= n as f64;
        }
    }
}

/// Residual operator `Π (A·B - C - λI) Π` for norm estimation without
/// forming the product matrix.
pub struct ResidualOp<'a> {
    pub a: &'a CMat,
    pub b: &'a CMat,
    /// Correction `C = Σ ħ^j Op(c_j)` to subtract (may be empty/zero).
    pub c: Option<&'a CMat>,
    /// Coefficient of the identity to subtract (1 for parametrix checks).
    pub identity: f64,
    pub guard: Option<&'a BandGuard>,
}

impl LinearOp for ResidualOp<'_> {
    fn dim(&self) -> usize {
        self.a.n
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.a.n;
        let mut vin = v.to_vec();
        if let Some(g) = self.guard {
            g.project(&mut vin);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); n];
        self.b.matvec(&vin, &mut t);
        self.a.matvec(&t, out);
        if let Some(c) = self.c {
            let mut cv = vec![Complex64::new(0.0, 0.0); n];
            c.matvec(&vin, &mut cv);
            for (o, x) in out.iter_mut().zip(&cv) {
                *o -= x;
            }
        }
        if self.identity != 0.0 {
            for (o, x) in out.iter_mut().zip(&vin) {
                *o -= self.identity * x;
            }
        }
        if let Some(g) = self.guard {
            g.project(out);
        }
    }

    fn apply_adj(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.a.n;
        let mut vin = v.to_vec();
        if let Some(g) = self.guard {
            g.project(&mut vin);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); n];
        self.a.matvec_adj(&vin, &mut t);
        self.b.matvec_adj(&t, out);
        if let Some(c) = self.c {
            let mut cv = vec![Complex64::new(0.0, 0.0); n];
            c.matvec_adj(&vin, &mut cv);
            for (o, x) in out.iter_mut().zip(&cv) {
                *o -= x;
            }
        }
        if self.identity != 0.0 {
            for (o, x) in out.iter_mut().zip(&vin) {
                *o -= self.identity * x;
            }
        }
        if let Some(g) = self.guard {
            g.project(out);
        }
    }
}

/// Sharp Gårding check: minimum eigenvalue of the quantization of a
/// non-negative symbol over an ħ-sweep, with the fitted exponent of the
/// negative part.
pub struct GardingReport {
    pub rows: Vec<(f64, f64, f64)>, // (hbar, min_eig, neg_part)
    pub fitted_exponent: Option<f64>,
    /// True when every negative part sits at the numerical floor.
    pub all_at_floor: bool,
}

pub fn garding_check(
    ops: &[(f64, &dyn LinearOp)],
    lanczos_steps: usize,
) -> GardingReport {
    let floor = 1e-12;
    let mut rows = Vec::new();
    for (hbar, op) in ops {
        let (lo, _) = lanczos_extreme_eigs(*op, lanczos_steps, 11);
        rows.push((*hbar, lo, (-lo).max(0.0)));
    }
    let hbars: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let negs: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let all_at_floor = negs.iter().all(|&v| v <= floor);
    let fitted_exponent = if all_at_floor {
        None
    } else {
        log_log_slope(&hbars, &negs, floor)
    };
    GardingReport {
        rows,
        fitted_exponent,
        all_at_floor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::HoelderField;
    use crate::linalg::two_norm_estimate;
    use crate::symcalc::{moyal_terms, CoeffExpr};

    fn grid(n: usize, hbar: f64) -> PhaseGrid {
        // Two coefficient periods on the torus: integer-frequency trig
        // coefficients then carry even grid modes, which keeps the
        // midpoint half-grid single-valued.
        PhaseGrid::new(n, 2.0 * std::f64::consts::PI, hbar).unwrap()
    }

    #[test]
    fn identity_symbol_quantizes_to_identity() {
        let g = grid(32, 0.1);
        let one = PolySymbol::constant(1, 1.0);
        let op = weyl_quantize_on_torus(&SymbolSource::Poly(&one), g);
        for j in 0..32 {
            for l in 0..32 {
                let expect = if j == l { 1.0 } else { 0.0 };
                assert!((op.mat.get(j, l) - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn momentum_symbol_is_spectral_derivative() {
        // Op(p) must be diagonal in the Fourier basis with eigenvalues p_m:
        // applying it to a plane wave multiplies by p_m.
        let g = grid(64, 0.05);
        let p1 = PolySymbol::term1(1, CoeffExpr::real(1.0));
        let op = weyl_quantize_on_torus(&SymbolSource::Poly(&p1), g);
        let m = 5;
        let wave: Vec<Complex64> = (0..64)
            .map(|j| {
                let phase = 2.0 * std::f64::consts::PI * (m * j) as f64 / 64.0;
                Complex64::new(phase.cos(), phase.sin())
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 64];
        op.mat.matvec(&wave, &mut out);
        let pm = g.p(m);
        for j in 0..64 {
            assert!((out[j] - wave[j] * pm).norm() < 1e-10);
        }
    }

    #[test]
    fn commutator_with_position_on_localized_states() {
        // [Op(p), Op(x·periodized)] acts as -iħ on states localized away
        // from the wrap seam: apply the commutator to shifted Gaussians and
        // check ([P,X]ψ)(x_j) = -iħ ψ(x_j) on interior rows. (Entrywise the
        // commutator with a diagonal matrix has zero diagonal; the identity
        // only holds against resolved test states.)
        let g = grid(128, 0.05);
        let p1 = PolySymbol::term1(1, CoeffExpr::real(1.0));
        let xf = HoelderField::poly("x", vec![0.0, 1.0]);
        let x0 = PolySymbol::field_term1(0, xf);
        let opp = weyl_quantize_on_torus(&SymbolSource::Poly(&p1), g);
        let opx = weyl_quantize_on_torus(&SymbolSource::Poly(&x0), g);
        for center in [-0.8f64, 0.0, 1.1] {
            let psi: Vec<Complex64> = (0..g.n)
                .map(|j| {
                    let x = g.x(j) - center;
                    Complex64::new((-x * x / 0.08).exp(), 0.0)
                })
                .collect();
            let mut t1 = vec![Complex64::new(0.0, 0.0); g.n];
            let mut px = vec![Complex64::new(0.0, 0.0); g.n];
            let mut xp = vec![Complex64::new(0.0, 0.0); g.n];
            opx.mat.matvec(&psi, &mut t1);
            opp.mat.matvec(&t1, &mut px);
            opp.mat.matvec(&psi, &mut t1);
            opx.mat.matvec(&t1, &mut xp);
            for j in 16..112 {
                let comm = px[j] - xp[j];
                let expect = Complex64::new(0.0, -g.hbar) * psi[j];
                assert!(
                    (comm - expect).norm() < 1e-8,
                    "center {center} row {j}: {comm} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn harmonic_oscillator_spectrum() {
        // a = p² + x² on a large torus: lowest eigenvalues ≈ ħ(2k+1).
        let hbar = 0.05;
        let g = PhaseGrid::new(1024, 8.0, hbar).unwrap();
        g.check_nyquist(1.5).unwrap();
        let xf = HoelderField::poly("x2", vec![0.0, 0.0, 1.0]);
        let sym = PolySymbol::term1(2, CoeffExpr::real(1.0))
            .add(&PolySymbol::field_term1(0, xf));
        let op = weyl_quantize_on_torus(&SymbolSource::Poly(&sym), g);
        assert!(op.hermitian_residual < 1e-10);
        let evs = op.eigenvalues_in(-0.1, 1.0);
        for (k, ev) in evs.iter().take(10).enumerate() {
            let expect = hbar * (2.0 * k as f64 + 1.0);
            assert!(
                (ev - expect).abs() < 1e-4,
                "level {k}: {ev} vs {expect}"
            );
        }
    }

    #[test]
    fn t_quantizations_agree_for_x_constant_symbols() {
        let g = grid(64, 0.1);
        let p2 = PolySymbol::term1(2, CoeffExpr::real(1.0));
        let w = weyl_quantize_on_torus(&SymbolSource::Poly(&p2), g);
        for t in [0.0, 1.0] {
            let ot = t_quantize_on_torus(&SymbolSource::Poly(&p2), t, g).unwrap();
            let mut err: f64 = 0.0;
            for k in 0..64 * 64 {
                err = err.max((ot.mat.data[k] - w.mat.data[k]).norm());
            }
            assert!(err < 1e-12, "t={t} err {err}");
        }
    }

    #[test]
    fn left_right_duality() {
        // Op_0(a) = Op_1(a)ᴴ for real symbols.
        let g = grid(64, 0.1);
        let c = HoelderField::trig("c", 0.0, vec![(1.0, 1.0, 0.0)]);
        let a = PolySymbol::field_term1(1, c);
        let o0 = t_quantize_on_torus(&SymbolSource::Poly(&a), 0.0, g).unwrap();
        let o1 = t_quantize_on_torus(&SymbolSource::Poly(&a), 1.0, g).unwrap();
        let adj = o1.mat.adjoint();
        let mut err: f64 = 0.0;
        for k in 0..64 * 64 {
            err = err.max((o0.mat.data[k] - adj.data[k]).norm());
        }
        assert!(err < 1e-12);
    }

    #[test]
    fn quantization_change_matches_requantize() {
        // Op_0(c(x)p) - Op_W(c(x)p) = ħ Op_W(b_1) + O(ħ²) with b_1 from the
        // requantize series.
        let c = HoelderField::trig("c", 0.0, vec![(1.0, 0.4, 0.7)]);
        let a = PolySymbol::field_term1(1, c);
        let series = crate::symcalc::requantize(&[a.clone()], 0.0, 0.5, 2).unwrap();
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for j in 3..=6 {
            let hbar = 2.0_f64.powi(-j);
            let g = grid(256, hbar);
            let o0 = t_quantize_on_torus(&SymbolSource::Poly(&a), 0.0, g).unwrap();
            let ow = weyl_quantize_on_torus(&SymbolSource::Poly(&a), g);
            let ob1 = weyl_quantize_on_torus(&SymbolSource::Poly(&series[1]), g);
            // R = Op_0(a) - Op_W(a) - ħ Op_W(b1): expect O(ħ²); here b is
            // linear in p so the series terminates and R is rounding-level.
            let mut r = o0.mat.clone();
            r.scaled_add(Complex64::new(-1.0, 0.0), &ow.mat);
            r.scaled_add(Complex64::new(-hbar, 0.0), &ob1.mat);
            let guard = band_projector(g.n);
            let zero = CMat::zeros(g.n);
            let res = ResidualOp {
                a: &r,
                b: &identity_like(&zero),
                c: None,
                identity: 0.0,
                guard: Some(&guard),
            };
            let norm = two_norm_estimate(&res, 60);
            hs.push(hbar);
            errs.push(norm.max(1e-16));
        }
        // The expansion is exact for p-linear symbols: residuals at rounding.
        assert!(errs.iter().all(|&e| e < 1e-10), "residuals {errs:?}");
        let _ = hs;
    }

    fn identity_like(z: &CMat) -> CMat {
        CMat::identity(z.n)
    }

    #[test]
    fn composition_residual_scaling() {
        // ‖Op_W(a)Op_W(b) - Σ_{j<=N} ħ^j Op_W(c_j)‖ through the band guard
        // drops like ħ^{N+1} (exactly, since the expansions terminate).
        let v = HoelderField::trig("V", 1.0, vec![(1.0, -1.0, 0.0)]);
        let a = PolySymbol::field_term1(0, v);
        let b = PolySymbol::term1(2, CoeffExpr::real(1.0));
        let cj = moyal_terms(&a, &b, 0.5, 3).unwrap();
        for nterms in [0usize, 1, 2] {
            let mut hs = Vec::new();
            let mut errs = Vec::new();
            for j in 3..=6 {
                let hbar = 2.0_f64.powi(-j);
                let g = grid(512, hbar);
                let oa = weyl_quantize_on_torus(&SymbolSource::Poly(&a), g);
                let ob = weyl_quantize_on_torus(&SymbolSource::Poly(&b), g);
                let mut corr = CMat::zeros(g.n);
                for (jj, c) in cj.iter().enumerate().take(nterms + 1) {
                    let oc = weyl_quantize_on_torus(&SymbolSource::Poly(c), g);
                    corr.scaled_add(Complex64::new(hbar.powi(jj as i32), 0.0), &oc.mat);
                }
                let guard = band_projector(g.n);
                let res = ResidualOp {
                    a: &oa.mat,
                    b: &ob.mat,
                    c: Some(&corr),
                    identity: 0.0,
                    guard: Some(&guard),
                };
                hs.push(hbar);
                errs.push(two_norm_estimate(&res, 60));
            }
            let slope = log_log_slope(&hs, &errs, 1e-13).unwrap_or(99.0);
            assert!(
                slope >= nterms as f64 + 0.8,
                "N={nterms}: slope {slope}, errs {errs:?}"
            );
        }
    }

    #[test]
    fn trace_identity_and_phase_space() {
        let g = grid(256, 0.05);
        // a = 1: trace = n.
        let one = PolySymbol::constant(1, 1.0);
        let tc = trace_of_quantization(&SymbolSource::Poly(&one), g);
        assert!((tc.trace - 256.0).abs() < 1e-9);
        assert!((tc.phase_integral - 256.0).abs() < 1e-9);

        // Gaussian-like bump: trace matches (2πħ)^{-1}∫∫a to high accuracy,
        // and the matrix trace equals the double sum identically.
        let f = HoelderField::custom_smooth(
            "gauss",
            std::sync::Arc::new(|_, x: f64| (-x * x).exp()),
            (2.0, 2.0),
        );
        let sym = |x: f64, p: f64| Complex64::new((-x * x - p * p).exp(), 0.0);
        let _ = f;
        let tc = trace_of_quantization(&SymbolSource::Func(&sym), g);
        assert!((tc.trace - tc.phase_integral).abs() < 1e-20 * tc.trace.abs() + 1e-12);
        let op = weyl_quantize_on_torus(&SymbolSource::Func(&sym), g);
        assert!((op.trace().re - tc.trace).abs() < 1e-8);

        // Odd-in-p symbol with zero-mean coefficient: trace 0.
        let c = HoelderField::trig("c", 0.0, vec![(1.0, 1.0, 0.0)]);
        let odd = PolySymbol::field_term1(1, c);
        let tc = trace_of_quantization(&SymbolSource::Poly(&odd), g);
        assert!(tc.trace.abs() < 1e-10);
    }

    #[test]
    fn garding_on_squares() {
        // a = p²: min eig >= 0 exactly; a = 0: min eig 0.
        let g = grid(128, 0.05);
        let p2 = PolySymbol::term1(2, CoeffExpr::real(1.0));
        let op = weyl_quantize_on_torus(&SymbolSource::Poly(&p2), g);
        let report = garding_check(&[(0.05, &op.mat as &dyn LinearOp)], 60);
        assert!(report.rows[0].1 >= -1e-12);
        assert!(report.all_at_floor);
    }
}
