//! Resolvent symbol recursion, functional-calculus symbols, and trace
//! expansion coefficients.
//!
//! The resolvent symbols obey
//!
//! `b_{z,0} = (a_0 - z)^{-1}`,
//! `b_{z,j+1} = -b_{z,0} Σ_{l+|α|+|β|+k = j+1, l<=j} (1/α!β!) (1/2)^{|α|}
//!              (-1/2)^{|β|} (∂_p^α D_x^β a_k)(∂_p^β D_x^α b_{z,l})`,
//!
//! and normalize into `b_{z,j} = Σ_{k=1}^{2j-1} d_{j,k} b_{z,0}^{k+1}` with
//! `d_{j,k}` universal polynomials in the derivative atoms `∂^η_x ∂^γ_p a_l`
//! restricted by `|η|+|γ|+l <= j`. Substituting `B^{k+1} -> ((-1)^k/k!)
//! f^{(k)}(a_0)` turns the same table into the functional-calculus symbols
//! `a^f_j` and the trace coefficients `T_j`.

mod hs;
mod profile;

pub use hs::{hs_apply, HsQuad};
pub use profile::{AlmostAnalyticExtension, FunctionProfile};

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::asymptotics::{adaptive_phase_integral, PhaseRegion};
use crate::symcalc::{PolySymbol, SymbolExpr, SymcalcError};
use crate::util::{factorial, MultiIndex};

#[derive(Debug, Error)]
pub enum FuncalcError {
    #[error("recursion produced derivative atoms beyond coefficient smoothness: {atom} in b_{{z,{j}}}")]
    AtomBeyondSmoothness { j: u32, atom: String },
    #[error("f(a_0) support is not compact inside the region: |a^f_0| = {value:.3e} on the boundary")]
    NonCompactSupport { value: f64 },
    #[error("matrix is not Hermitian: residual {0:.3e}")]
    NotHermitian(f64),
    #[error("almost-analytic extension needs n >= 2 for the resolvent quadrature, got {0}")]
    ExtensionOrderTooLow(u32),
    #[error("function profile has no compact support; hs_apply requires one")]
    NoSupport,
    #[error("Helffer-Sjöstrand quadrature estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    QuadratureTolerance { estimate: f64, tol: f64 },
    #[error(transparent)]
    Symcalc(#[from] SymcalcError),
}

/// The resolvent symbol table `d_{j,k}` together with the full symbols
/// `b_{z,j}` (as expressions over atoms and powers of `B`).
pub struct ResolventSymbolSeries {
    pub base: Vec<PolySymbol>,
    pub table: BTreeMap<(u32, u32), SymbolExpr>,
    pub b: Vec<SymbolExpr>,
    pub j_max: u32,
}

/// Run the recursion up to order `j_max` (default cap 3: the expression
/// growth is combinatorial and order 3 covers every O(ħ³) check here).
pub fn resolvent_symbols(
    base: &[PolySymbol],
    j_max: u32,
) -> Result<ResolventSymbolSeries, FuncalcError> {
    let dim = base.first().map(|s| s.dim).unwrap_or(1);
    let mut b: Vec<SymbolExpr> = vec![SymbolExpr::resolvent_factor(dim)];

    for j in 0..j_max {
        // b_{z,j+1} = -B Σ_{l+|α|+|β|+k=j+1, l<=j} c_{αβ}
        //             (∂_p^α D_x^β a_k)(∂_p^β D_x^α b_{z,l})
        let mut sum = SymbolExpr::zero(dim);
        for l in 0..=j {
            for ja in 0..=(j + 1 - l) {
                for jb in 0..=(j + 1 - l - ja) {
                    let k = j + 1 - l - ja - jb;
                    if (k as usize) >= base.len().max(1) {
                        continue;
                    }
                    if base.get(k as usize).map_or(true, |s| s.is_zero()) && k > 0 {
                        continue;
                    }
                    for alpha in MultiIndex::with_order(dim, ja) {
                        for beta in MultiIndex::with_order(dim, jb) {
                            // ∂_p^α ∂_x^β a_k as a single atom expression.
                            let mut a_atom = SymbolExpr::atom(dim, k);
                            for dir in 0..dim {
                                for _ in 0..beta.get(dir) {
                                    a_atom = a_atom.derivative(true, dir);
                                }
                                for _ in 0..alpha.get(dir) {
                                    a_atom = a_atom.derivative(false, dir);
                                }
                            }
                            // ∂_p^β ∂_x^α b_l.
                            let mut b_term = b[l as usize].clone();
                            for dir in 0..dim {
                                for _ in 0..alpha.get(dir) {
                                    b_term = b_term.derivative(true, dir);
                                }
                                for _ in 0..beta.get(dir) {
                                    b_term = b_term.derivative(false, dir);
                                }
                            }
                            // Scalars: 1/(α!β!) (1/2)^{|α|} (-1/2)^{|β|} and
                            // the (-i)^{|α|+|β|} from the D_x's.
                            let half = 0.5f64.powi(ja as i32) * (-0.5f64).powi(jb as i32);
                            let mi = match (ja + jb) % 4 {
                                0 => Complex64::new(1.0, 0.0),
                                1 => Complex64::new(0.0, -1.0),
                                2 => Complex64::new(-1.0, 0.0),
                                _ => Complex64::new(0.0, 1.0),
                            };
                            let s = mi * half / (alpha.factorial() * beta.factorial());
                            sum = sum.add(&a_atom.mul(&b_term).scale(s));
                        }
                    }
                }
            }
        }
        let next = SymbolExpr::resolvent_factor(dim)
            .mul(&sum)
            .scale(Complex64::new(-1.0, 0.0));
        b.push(next);
    }

    // Normalize into the d_{j,k} table and validate the structure lemma.
    let mut table = BTreeMap::new();
    for (j, bj) in b.iter().enumerate().skip(1) {
        let j = j as u32;
        for k in 1..=(2 * j - 1) {
            let mut d = SymbolExpr::zero(dim);
            for m in &bj.monos {
                if m.bpow == k + 1 {
                    let mut stripped = m.clone();
                    stripped.bpow = 0;
                    d.monos.push(stripped);
                }
            }
            let d = d.add(&SymbolExpr::zero(dim)); // canonicalize
            if d.max_atom_budget() > j {
                // The structure lemma guarantees this never fires; keeping
                // the check hard catches recursion regressions.
                panic!(
                    "structure lemma violated: atom budget {} > j = {j}",
                    d.max_atom_budget()
                );
            }
            table.insert((j, k), d);
        }
        // Leftover monomials outside 2 <= bpow <= 2j would indicate a bug.
        debug_assert!(bj.monos.iter().all(|m| m.bpow >= 2 && m.bpow <= 2 * j + 1));
    }

    let series = ResolventSymbolSeries {
        base: base.to_vec(),
        table,
        b,
        j_max,
    };
    series.validate_smoothness()?;
    Ok(series)
}

impl ResolventSymbolSeries {
    /// Reject tables whose atoms exceed the coefficient oracles of the
    /// base symbols (rough fields at eps = 1).
    fn validate_smoothness(&self) -> Result<(), FuncalcError> {
        for ((j, _), d) in &self.table {
            for m in &d.monos {
                for atom in &m.atoms {
                    if let Some(base) = self.base.get(atom.sym as usize) {
                        for coeff in base.terms.values() {
                            for mono in &coeff.monos {
                                for fa in &mono.atoms {
                                    if let Some(limit) = fa.field.max_order() {
                                        if fa.order + atom.x.order() > limit {
                                            return Err(FuncalcError::AtomBeyondSmoothness {
                                                j: *j,
                                                atom: format!("{atom:?}"),
                                            });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluate `b_{z,j}` at a phase-space point.
    pub fn eval_b(
        &self,
        j: u32,
        x: f64,
        p: f64,
        z: Complex64,
    ) -> Result<Complex64, SymcalcError> {
        let refs: Vec<&PolySymbol> = self.base.iter().collect();
        self.b[j as usize].eval(&refs, x, p, Some(z), None)
    }

    /// Evaluate `d_{j,k}` at a phase-space point (complex in general).
    pub fn eval_d(&self, j: u32, k: u32, x: f64, p: f64) -> Result<Complex64, SymcalcError> {
        let refs: Vec<&PolySymbol> = self.base.iter().collect();
        match self.table.get(&(j, k)) {
            None => Ok(Complex64::new(0.0, 0.0)),
            Some(d) => d.eval(&refs, x, p, None, None),
        }
    }

    /// Functional-calculus symbol `a^f_j(x, p)`:
    /// `a^f_0 = f(a_0)`, `a^f_j = Σ_k ((-1)^k/k!) d_{j,k} f^{(k)}(a_0)`.
    pub fn funcalc_symbol(
        &self,
        f: &FunctionProfile,
        j: u32,
        x: f64,
        p: f64,
    ) -> Result<f64, FuncalcError> {
        let a0 = self.base[0].eval1_real(x, p)?;
        if j == 0 {
            return Ok(f.eval(a0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=(2 * j - 1) {
            let d = self.eval_d(j, k, x, p)?;
            if d.norm() == 0.0 {
                continue;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += d * (sign / factorial(k)) * f.deriv(k, a0);
        }
        let scale = acc.norm().max(1.0);
        if acc.im.abs() > 1e-8 * scale {
            return Err(SymcalcError::NotReal { imag: acc.im }.into());
        }
        Ok(acc.re)
    }

    /// The symbolic identity `a^f_1 = a_1 f'(a_0)` holds iff
    /// `d_{1,1} = -a_1`; expose the table entry for the test.
    pub fn d11(&self) -> &SymbolExpr {
        &self.table[&(1, 1)]
    }
}

/// Trace expansion coefficients
/// `T_j = ∫∫ Σ_k ((-1)^k/k!) d_{j,k} f^{(k)}(a_0) dx dp` (and
/// `T_0 = ∫∫ f(a_0)`), by adaptive phase-space quadrature. The support of
/// `f(a_0)` must be compact inside the region.
pub fn trace_expansion_terms(
    series: &ResolventSymbolSeries,
    f: &FunctionProfile,
    j_max: u32,
    region: PhaseRegion,
    tol: f64,
) -> Result<Vec<f64>, FuncalcError> {
    // Compact-support check on the region boundary.
    let samples = 120;
    for i in 0..=samples {
        let x = region.x.0 + (region.x.1 - region.x.0) * i as f64 / samples as f64;
        let p = region.p.0 + (region.p.1 - region.p.0) * i as f64 / samples as f64;
        for (bx, bp) in [
            (x, region.p.0),
            (x, region.p.1),
            (region.x.0, p),
            (region.x.1, p),
        ] {
            let a0 = series.base[0].eval1_real(bx, bp)?;
            let v = f.eval(a0).abs();
            if v > 1e-14 {
                return Err(FuncalcError::NonCompactSupport { value: v });
            }
        }
    }
    let mut out = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        let integrand = |x: f64, p: f64| -> f64 {
            series
                .funcalc_symbol(f, j, x, p)
                .unwrap_or(f64::NAN)
        };
        let val = adaptive_phase_integral(&integrand, region, tol);
        if !val.is_finite() {
            return Err(FuncalcError::NonCompactSupport { value: f64::NAN });
        }
        out.push(val);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::HoelderField;
    use crate::symcalc::CoeffExpr;
    use std::sync::Arc;

    fn schrodinger_base() -> Vec<PolySymbol> {
        // a_0 = p² + (1 - cos x) - 0.5, a_1 = 0.
        let v = HoelderField::trig("V", 0.5, vec![(1.0, -1.0, 0.0)]);
        vec![PolySymbol::term1(2, CoeffExpr::real(1.0)).add(&PolySymbol::field_term1(0, v))]
    }

    fn base_with_subprincipal() -> Vec<PolySymbol> {
        let v = HoelderField::trig("V", 0.5, vec![(1.0, -1.0, 0.0)]);
        let g = HoelderField::trig("gp", 0.0, vec![(1.0, 1.0, 0.0)]); // a1 = cos x
        vec![
            PolySymbol::term1(2, CoeffExpr::real(1.0)).add(&PolySymbol::field_term1(0, v)),
            PolySymbol::field_term1(0, g),
        ]
    }

    #[test]
    fn d11_is_minus_a1() {
        let series = resolvent_symbols(&base_with_subprincipal(), 3).unwrap();
        // d_{1,1} must be the single atom -a_1.
        assert_eq!(series.d11().pretty(), "-1·a1");
        // And numerically: b_{z,1} = -a_1 b_{z,0}².
        let z = Complex64::new(-1.0, 1.0);
        for (x, p) in [(0.3, 0.7), (-1.1, 0.2)] {
            let b1 = series.eval_b(1, x, p, z).unwrap();
            let a0 = series.base[0].eval1(x, p);
            let a1 = series.base[1].eval1(x, p);
            let expect = -a1 / ((a0 - z) * (a0 - z));
            assert!((b1 - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn fourier_multiplier_resolvent_is_exact() {
        // a_0 x-independent, a_1 = 0: all d_{j,k} vanish.
        let base = vec![PolySymbol::term1(2, CoeffExpr::real(1.0))
            .add(&PolySymbol::constant(1, 0.7))];
        let series = resolvent_symbols(&base, 3).unwrap();
        // The d_{j,k} are universal polynomials in abstract atoms; for an
        // x-independent symbol every atom with an x-derivative evaluates to
        // zero, so each table entry vanishes pointwise.
        for ((j, k), _) in &series.table {
            for (x, p) in [(0.3, 0.9), (-1.0, 0.4)] {
                let v = series.eval_d(*j, *k, x, p).unwrap();
                assert!(v.norm() < 1e-14, "d_{{{j},{k}}}({x},{p}) = {v}");
            }
        }
    }

    #[test]
    fn structure_lemma_budgets() {
        let series = resolvent_symbols(&base_with_subprincipal(), 3).unwrap();
        for ((j, k), d) in &series.table {
            assert!(d.max_atom_budget() <= *j, "budget at ({j},{k})");
            assert!(*k <= 2 * j - 1);
        }
        // B-power degree inside b_j is at most 2j + ... (k+1 <= 2j).
        for (j, bj) in series.b.iter().enumerate().skip(1) {
            assert!(bj.max_bpow() <= 2 * j as u32 + 1);
        }
    }

    #[test]
    fn resolvent_bound_shape_on_test_arc() {
        // Sampled |∂_p^β ∂_x^α b_{z,j}| against the Lemma-shape bound
        // C (|z-ζ1|/dist(z,[ζ1,∞)))^{2j+|α|+|β|} (a_0-ζ1)^{-1}.
        let base = schrodinger_base();
        let series = resolvent_symbols(&base, 2).unwrap();
        // ζ1 = (min sampled a_0) - 1.
        let mut zeta1 = f64::INFINITY;
        for i in 0..200 {
            let x = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / 200.0;
            for j in 0..60 {
                let p = -3.0 + 6.0 * j as f64 / 60.0;
                zeta1 = zeta1.min(base[0].eval1(x, p).re);
            }
        }
        zeta1 -= 1.0;
        let pinned_c = 100.0;
        for (alpha, beta) in [(0u32, 0u32), (1, 0), (0, 1), (1, 1)] {
            for j in 0..=2u32 {
                let mut expr = series.b[j as usize].clone();
                for _ in 0..alpha {
                    expr = expr.derivative(true, 0);
                }
                for _ in 0..beta {
                    expr = expr.derivative(false, 0);
                }
                for arc in 0..8 {
                    let theta = std::f64::consts::PI * (0.15 + 0.7 * arc as f64 / 7.0);
                    let z = Complex64::new(-0.3, 0.0) + Complex64::from_polar(1.3, theta);
                    let dist = if z.re >= zeta1 { z.im.abs() } else { (z - zeta1).norm() };
                    let ratio = (z - zeta1).norm() / dist;
                    let refs: Vec<&PolySymbol> = base.iter().collect();
                    for (x, p) in [(0.2, 0.4), (1.0, -0.8)] {
                        let v = expr.eval(&refs, x, p, Some(z), None).unwrap().norm();
                        let a0 = base[0].eval1(x, p).re;
                        let bound = pinned_c
                            * ratio.powi((2 * j + alpha + beta) as i32)
                            / (a0 - zeta1);
                        assert!(
                            v <= bound,
                            "j={j} α={alpha} β={beta} z={z}: {v} > {bound}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn smoothness_error_path() {
        // Rough coefficient with k = 1 at eps = 1: order-2+ atoms in the
        // recursion must be rejected with the offending atom named.
        let rough = crate::coeffs::make_test_field(
            crate::coeffs::TestFamily::AbsPower,
            &crate::coeffs::FieldParams::default(),
        )
        .unwrap();
        let base = vec![PolySymbol::term1(2, CoeffExpr::real(1.0))
            .add(&PolySymbol::field_term1(0, rough))];
        let err = resolvent_symbols(&base, 3);
        assert!(matches!(
            err,
            Err(FuncalcError::AtomBeyondSmoothness { .. })
        ));
    }

    #[test]
    fn funcalc_symbol_identities() {
        let series = resolvent_symbols(&base_with_subprincipal(), 2).unwrap();
        let f = FunctionProfile::bump("f", -0.6, -0.4, -0.2, -0.05);
        // a^f_1 = a_1 f'(a_0) pointwise.
        for (x, p) in [(0.0, 0.3), (0.8, -0.5), (2.0, 0.1)] {
            let lhs = series.funcalc_symbol(&f, 1, x, p).unwrap();
            let a0 = series.base[0].eval1(x, p).re;
            let a1 = series.base[1].eval1(x, p).re;
            let rhs = a1 * f.deriv(1, a0);
            assert!((lhs - rhs).abs() < 1e-12, "({x},{p}): {lhs} vs {rhs}");
        }
        // Identity profile on a window with a_1 = 0: a^f_1 = 0.
        let series0 = resolvent_symbols(&schrodinger_base(), 2).unwrap();
        let id = FunctionProfile::windowed_identity("id", -0.6, -0.4, -0.2, -0.05);
        for (x, p) in [(0.1, 0.2), (1.2, 0.45)] {
            let v = series0.funcalc_symbol(&id, 1, x, p).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn trace_terms_harmonic_coarea_oracle() {
        // a_0 = x² + p² - 1: T_0 = ∫∫ f(a_0) = π ∫ f(s) ds over the bump
        // window (coarea with constant density π) and T_1 = 0.
        let x2 = HoelderField::poly("x2", vec![-1.0, 0.0, 1.0]);
        let base = vec![PolySymbol::term1(2, CoeffExpr::real(1.0))
            .add(&PolySymbol::field_term1(0, x2))];
        let series = resolvent_symbols(&base, 1).unwrap();
        let f = FunctionProfile::bump("f", -0.7, -0.5, -0.3, -0.1);
        let region = PhaseRegion {
            x: (-2.0, 2.0),
            p: (-2.0, 2.0),
        };
        let t = trace_expansion_terms(&series, &f, 1, region, 1e-8).unwrap();
        let oracle = std::f64::consts::PI
            * crate::quad::integrate_adaptive(&|s| f.eval(s), -0.8, 0.0, 1e-10);
        assert!((t[0] - oracle).abs() < 1e-5, "T0 {} vs {oracle}", t[0]);
        assert!(t[1].abs() < 1e-9, "T1 = {}", t[1]);
    }

    #[test]
    fn non_compact_support_detected() {
        let base = schrodinger_base();
        let series = resolvent_symbols(&base, 1).unwrap();
        // f supported at energies reached on the region boundary.
        let f = FunctionProfile::bump("wide", 0.0, 1.0, 8.0, 9.0);
        let region = PhaseRegion {
            x: (-3.0, 3.0),
            p: (-2.0, 2.0),
        };
        assert!(matches!(
            trace_expansion_terms(&series, &f, 1, region, 1e-6),
            Err(FuncalcError::NonCompactSupport { .. })
        ));
    }

    #[test]
    fn profile_custom_arc() {
        let f = FunctionProfile::custom(
            "exp",
            Arc::new(|_r, t: f64| t.exp()),
            None,
        );
        assert!((f.deriv(3, 0.5) - 0.5f64.exp()).abs() < 1e-12);
    }
}
