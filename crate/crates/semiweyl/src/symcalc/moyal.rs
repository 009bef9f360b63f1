//! Star-product coefficients, quantization changes, and the subprincipal
//! symbol of a sesquilinear form.
//!
//! For `t`-quantized operators the composition symbol expands as
//! `c(x,p;ħ) = Σ_j ħ^j c_j(x,p)` with
//!
//! * `t = 0`:   `c_j = Σ_{|α|=j} (1/α!) ∂_p^α a · D_x^α b`
//! * `t = 1`:   `c_j = (-1)^j Σ_{|α|=j} (1/α!) D_x^α a · ∂_p^α b`
//! * `t = 1/2`: `c_j = Σ_{|α|+|β|=j} (1/α!β!) (1/2)^{|α|} (-1/2)^{|β|}
//!               (∂_p^α D_x^β a)(∂_p^β D_x^α b)`
//!
//! with `D = -i∂`. For polynomial-in-p symbols every expansion terminates,
//! so the results are exact.

use num_complex::Complex64;

use crate::util::MultiIndex;

use super::{CoeffExpr, PolySymbol, SymcalcError};

pub use super::poly_symbol::eval_symbol_real as eval_symbol;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn minus_i_pow(k: u32) -> Complex64 {
    // (-i)^k
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn iter_deriv(
    a: &PolySymbol,
    porder: &MultiIndex,
    xorder: &MultiIndex,
) -> Result<PolySymbol, SymcalcError> {
    let mut out = a.clone();
    for dir in 0..porder.dim() {
        for _ in 0..porder.get(dir) {
            out = out.dp(dir);
        }
    }
    for dir in 0..xorder.dim() {
        for _ in 0..xorder.get(dir) {
            out = out.dx(dir)?;
        }
    }
    Ok(out)
}

/// Which of the three canonical quantizations a parameter denotes.
fn classify_t(t: f64) -> Result<u8, SymcalcError> {
    if t == 0.0 {
        Ok(0)
    } else if t == 0.5 {
        Ok(1)
    } else if t == 1.0 {
        Ok(2)
    } else {
        Err(SymcalcError::UnsupportedQuantization(t))
    }
}

/// Exact star-product coefficients `c_0 .. c_N` of `Op_t(a) Op_t(b)`.
pub fn moyal_terms(
    a: &PolySymbol,
    b: &PolySymbol,
    t: f64,
    n: u32,
) -> Result<Vec<PolySymbol>, SymcalcError> {
    assert_eq!(a.dim, b.dim);
    let dim = a.dim;
    let kind = classify_t(t)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        let mut cj = PolySymbol::zero(dim);
        cj.hbar_order = j as i32;
        match kind {
            0 => {
                for alpha in MultiIndex::with_order(dim, j) {
                    let da = iter_deriv(a, &alpha, &MultiIndex::zeros(dim))?;
                    let db = iter_deriv(b, &MultiIndex::zeros(dim), &alpha)?;
                    let s = minus_i_pow(j) / alpha.factorial();
                    cj = cj.add(&da.mul(&db).scale(s));
                }
            }
            2 => {
                for alpha in MultiIndex::with_order(dim, j) {
                    let da = iter_deriv(a, &MultiIndex::zeros(dim), &alpha)?;
                    let db = iter_deriv(b, &alpha, &MultiIndex::zeros(dim))?;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let s = minus_i_pow(j) * sign / alpha.factorial();
                    cj = cj.add(&da.mul(&db).scale(s));
                }
            }
            _ => {
                for ja in 0..=j {
                    let jb = j - ja;
                    for alpha in MultiIndex::with_order(dim, ja) {
                        for beta in MultiIndex::with_order(dim, jb) {
                            let da = iter_deriv(a, &alpha, &beta)?;
                            let db = iter_deriv(b, &beta, &alpha)?;
                            let half = 0.5f64.powi(ja as i32) * (-0.5f64).powi(jb as i32);
                            let s = minus_i_pow(j) * half
                                / (alpha.factorial() * beta.factorial());
                            cj = cj.add(&da.mul(&db).scale(s));
                        }
                    }
                }
            }
        }
        out.push(cj);
    }
    Ok(out)
}

/// Compose two ħ-series term-wise: `c_j = Σ_{k+l+r=j} moyal_r(a_k, b_l)`.
pub fn moyal_series_compose(
    a: &[PolySymbol],
    b: &[PolySymbol],
    t: f64,
    n: u32,
) -> Result<Vec<PolySymbol>, SymcalcError> {
    let dim = a.first().map(|s| s.dim).unwrap_or(1);
    let mut out = vec![PolySymbol::zero(dim); n as usize + 1];
    for (k, ak) in a.iter().enumerate() {
        for (l, bl) in b.iter().enumerate() {
            if k + l > n as usize {
                continue;
            }
            let rest = n as usize - k - l;
            let terms = moyal_terms(ak, bl, t, rest as u32)?;
            for (r, term) in terms.into_iter().enumerate() {
                out[k + l + r] = out[k + l + r].add(&term);
            }
        }
    }
    for (j, s) in out.iter_mut().enumerate() {
        s.hbar_order = j as i32;
    }
    Ok(out)
}

/// Change of quantization for a symbol series:
/// `b_{t2,j} = Σ_{l+r=j} ((t1-t2)^r / r!) (∇_x·D_p)^r b_{t1,l}`.
///
/// Exact for polynomial symbols; the operator `∇_x·D_p` is
/// `-i Σ_dir ∂_{x_dir} ∂_{p_dir}`.
pub fn requantize(
    series: &[PolySymbol],
    t1: f64,
    t2: f64,
    n: u32,
) -> Result<Vec<PolySymbol>, SymcalcError> {
    let dim = series.first().map(|s| s.dim).unwrap_or(1);
    let mut out = vec![PolySymbol::zero(dim); n as usize + 1];
    for (l, bl) in series.iter().enumerate() {
        if l > n as usize {
            break;
        }
        let mut cur = bl.clone();
        let mut fact = 1.0;
        for r in 0..=(n as usize - l) {
            if r > 0 {
                fact *= r as f64;
                let mut step = PolySymbol::zero(dim);
                for dir in 0..dim {
                    step = step.add(&cur.dp(dir).dx(dir)?);
                }
                cur = step.scale(-I); // D_p = -i ∂_p
                if cur.is_zero() {
                    break;
                }
            }
            let coeff = (t1 - t2).powi(r as i32) / fact;
            out[l + r] = out[l + r].add(&cur.scale(Complex64::new(coeff, 0.0)));
        }
    }
    for (j, s) in out.iter_mut().enumerate() {
        s.hbar_order = j as i32;
    }
    Ok(out)
}

/// One coefficient `a_{αβ}(x)` of a sesquilinear form.
#[derive(Clone)]
pub struct FormTerm {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub coeff: CoeffExpr,
}

impl FormTerm {
    pub fn new1(alpha: u32, beta: u32, coeff: CoeffExpr) -> Self {
        FormTerm {
            alpha: MultiIndex::new(vec![alpha]),
            beta: MultiIndex::new(vec![beta]),
            coeff,
        }
    }
}

/// Principal symbol `a_0 = Σ a_{αβ}(x) p^{α+β}`.
pub fn principal_from_form(form: &[FormTerm]) -> PolySymbol {
    let dim = form.first().map(|t| t.alpha.dim()).unwrap_or(1);
    let mut out = PolySymbol::zero(dim);
    for t in form {
        out.insert(t.alpha.add(&t.beta), t.coeff.clone());
    }
    out
}

/// Weyl subprincipal symbol of the form,
/// `a_1 = i Σ_{αβ} Σ_j ((β_j - α_j)/2) ∂_{x_j} a_{αβ}(x) p^{α+β-η_j}`.
///
/// Real-valued whenever `a_{αβ} = conj(a_{βα})`.
pub fn subprincipal_from_form(form: &[FormTerm]) -> Result<PolySymbol, SymcalcError> {
    let dim = form.first().map(|t| t.alpha.dim()).unwrap_or(1);
    let mut out = PolySymbol::zero(dim);
    out.hbar_order = 1;
    for t in form {
        for j in 0..dim {
            let diff = t.beta.get(j) as f64 - t.alpha.get(j) as f64;
            if diff == 0.0 {
                continue;
            }
            if j != 0 && t.coeff.as_constant().is_none() {
                return Err(SymcalcError::FieldCoefficientDim);
            }
            let dcoeff = t.coeff.dx()?;
            let total = t.alpha.add(&t.beta);
            let lowered = total
                .checked_sub(&MultiIndex::unit(dim, j))
                .expect("β_j ≠ α_j forces α_j + β_j >= 1");
            out.insert(lowered, dcoeff.scale(I * (0.5 * diff)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::HoelderField;

    fn p1() -> PolySymbol {
        PolySymbol::term1(1, CoeffExpr::real(1.0))
    }

    fn x1() -> PolySymbol {
        PolySymbol::term1(0, CoeffExpr::field(HoelderField::poly("x", vec![0.0, 1.0])))
    }

    #[test]
    fn canonical_commutator() {
        // a = p, b = x, Weyl: c_0 = p·x, c_1 = -i/2, higher terms vanish;
        // the commutator a#b - b#a reproduces -iħ.
        let (p, x) = (p1(), x1());
        let cab = moyal_terms(&p, &x, 0.5, 3).unwrap();
        let cba = moyal_terms(&x, &p, 0.5, 3).unwrap();
        assert!(cab[0].approx_eq(&p.mul(&x), 1e-15));
        let c1 = cab[1].eval1(0.7, -0.3);
        assert!((c1 - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        for j in 2..=3 {
            assert!(cab[j].is_zero());
        }
        let comm1 = cab[1].add(&cba[1].scale(Complex64::new(-1.0, 0.0)));
        assert!((comm1.eval1(0.2, 0.4) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn x_independent_symbols_commute() {
        // a = b = p²: c_0 = p⁴ and all higher terms vanish for every t.
        let p2 = PolySymbol::term1(2, CoeffExpr::real(1.0));
        for t in [0.0, 0.5, 1.0] {
            let c = moyal_terms(&p2, &p2, t, 4).unwrap();
            assert!((c[0].eval1(0.0, 1.5).re - 1.5f64.powi(4)).abs() < 1e-12);
            for cj in &c[1..] {
                assert!(cj.is_zero());
            }
        }
    }

    #[test]
    fn potential_times_kinetic_weyl() {
        // a = V(x), b = p², t = 1/2: c_1 = i p V' (the product of two
        // self-adjoint factors is not self-adjoint at order ħ) and
        // c_2 = -(1/4) V''(x).
        let v = HoelderField::trig("V", 1.0, vec![(1.0, -1.0, 0.0)]); // 1 - cos x
        let a = PolySymbol::field_term1(0, v.clone());
        let b = PolySymbol::term1(2, CoeffExpr::real(1.0));
        let c = moyal_terms(&a, &b, 0.5, 3).unwrap();
        for x in [0.0f64, 0.7, 2.1] {
            let p = 3.3;
            let got1 = c[1].eval1(x, p);
            let expect1 = Complex64::new(0.0, p * x.sin()); // i p V', V' = sin x
            assert!((got1 - expect1).norm() < 1e-14, "c1 at {x}: {got1}");
            let expect2 = -0.25 * x.cos(); // V'' = cos x
            let got2 = c[2].eval1(x, p);
            assert!((got2.re - expect2).abs() < 1e-14 && got2.im.abs() < 1e-15);
        }
        assert!(c[3].is_zero());
        // The symmetrised combination (V # p² + p² # V)/2 has no ħ¹ term.
        let cr = moyal_terms(&b, &a, 0.5, 3).unwrap();
        let sym1 = c[1].add(&cr[1]).scale(Complex64::new(0.5, 0.0));
        assert!(sym1.is_zero(), "symmetrised c1 = {sym1:?}");
    }

    #[test]
    fn rejects_unsupported_t() {
        assert!(matches!(
            moyal_terms(&p1(), &x1(), 0.3, 1),
            Err(SymcalcError::UnsupportedQuantization(_))
        ));
    }

    #[test]
    fn requantize_linear_symbol() {
        // b = c(x) p from t1 = 0 to t2 = 1/2: the first correction is
        // ((t1-t2)/1!)(∇_x D_p)(c p) = (i/2) c'(x), which matches the
        // operator identity c(X)(ħD) = Op_W(cp) + (iħ/2) c'.
        let c = HoelderField::trig("c", 0.0, vec![(1.0, 1.0, 0.0)]); // cos x
        let b = PolySymbol::field_term1(1, c);
        let out = requantize(&[b], 0.0, 0.5, 2).unwrap();
        let v = out[1].eval1(0.4, 9.9);
        // (i/2) c' = (i/2)(-sin x)
        assert!((v - Complex64::new(0.0, -0.5 * 0.4f64.sin())).norm() < 1e-15);
        assert!(out[2].is_zero());
    }

    #[test]
    fn requantize_p_independent_is_identity() {
        let c = HoelderField::trig("c", 1.0, vec![(2.0, 0.5, 0.0)]);
        let b = PolySymbol::field_term1(0, c);
        for (t1, t2) in [(0.0, 1.0), (0.5, 0.0), (1.0, 0.5)] {
            let out = requantize(&[b.clone()], t1, t2, 3).unwrap();
            assert!(out[0].approx_eq(&b, 1e-15));
            for s in &out[1..] {
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn requantize_round_trip() {
        let c = HoelderField::trig("c", 0.3, vec![(1.0, 0.2, -0.4)]);
        let b = PolySymbol::field_term1(2, c).add(&PolySymbol::term1(1, CoeffExpr::real(0.7)));
        let fwd = requantize(&[b.clone()], 0.0, 1.0, 4).unwrap();
        let back = requantize(&fwd, 1.0, 0.0, 4).unwrap();
        assert!(back[0].approx_eq(&b, 1e-13));
        for s in &back[1..] {
            assert!(
                s.terms
                    .values()
                    .all(|c| c.max_scalar_norm() < 1e-13),
                "round trip residue {s:?}"
            );
        }
    }

    #[test]
    fn subprincipal_of_divergence_form_vanishes() {
        // form {α=β=1: a(x)}: β_j - α_j = 0 termwise.
        let a = HoelderField::trig("a", 2.0, vec![(1.0, 0.3, 0.0)]);
        let form = [FormTerm::new1(1, 1, CoeffExpr::field(a))];
        let a1 = subprincipal_from_form(&form).unwrap();
        assert!(a1.is_zero());
    }

    #[test]
    fn subprincipal_constant_coefficients_vanishes() {
        let form = [
            FormTerm::new1(0, 1, CoeffExpr::real(2.0)),
            FormTerm::new1(1, 0, CoeffExpr::real(2.0)),
        ];
        let a1 = subprincipal_from_form(&form).unwrap();
        assert!(a1.is_zero());
    }

    #[test]
    fn subprincipal_of_antisymmetric_pair() {
        // form {α=0,β=1: i g(x); α=1,β=0: -i g(x)} with real g. The zeroth
        // symbol cancels and the operator equals the multiplication by
        // -ħ g'(x), so a_1 = -g'. Cross-checked against the quantization
        // change route: Op_0(i g p) + Op_1(-i g p) expressed as one Weyl
        // symbol.
        let g = HoelderField::trig("g", 0.0, vec![(1.0, 0.0, 1.0)]); // sin x
        let ig = CoeffExpr::field(g.clone()).scale(I);
        let mig = CoeffExpr::field(g.clone()).scale(-I);
        let form = [FormTerm::new1(0, 1, ig.clone()), FormTerm::new1(1, 0, mig.clone())];

        let a0 = principal_from_form(&form);
        assert!(a0.is_zero(), "i g p - i g p should cancel");

        let a1 = subprincipal_from_form(&form).unwrap();
        for x in [0.0, 0.5, 1.9] {
            let got = a1.eval1(x, 0.3);
            let expect = -x.cos(); // -g'
            assert!((got.re - expect).abs() < 1e-14 && got.im.abs() < 1e-15);
        }

        // Route two: left-quantized symbol of i g ħD is i g p; right-quantized
        // symbol of ħD (-i g) is -i g p. Convert both to Weyl and add.
        let left = requantize(&[PolySymbol::term1(1, ig)], 0.0, 0.5, 2).unwrap();
        let right = requantize(&[PolySymbol::term1(1, mig)], 1.0, 0.5, 2).unwrap();
        let weyl1 = left[1].add(&right[1]);
        assert!(weyl1.approx_eq(&a1, 1e-14), "requantize cross-check");
    }
}
