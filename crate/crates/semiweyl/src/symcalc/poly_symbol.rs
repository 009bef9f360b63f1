//! Symbols polynomial in the momentum variable.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::coeffs::ScalarField;
use crate::util::MultiIndex;

use super::{CoeffExpr, SymcalcError};

/// `Σ_α c_α(x) p^α` with symbolic coefficients. `hbar_order` records which
/// power of ħ the symbol multiplies inside a series.
#[derive(Clone, Default)]
pub struct PolySymbol {
    pub dim: usize,
    pub terms: BTreeMap<MultiIndex, CoeffExpr>,
    pub hbar_order: i32,
}

impl PolySymbol {
    pub fn zero(dim: usize) -> Self {
        PolySymbol {
            dim,
            terms: BTreeMap::new(),
            hbar_order: 0,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut s = Self::zero(dim);
        s.insert(MultiIndex::zeros(dim), CoeffExpr::real(c));
        s
    }

    /// `c(x) p^α`.
    pub fn monomial(dim: usize, porder: MultiIndex, coeff: CoeffExpr) -> Self {
        assert_eq!(porder.dim(), dim);
        let mut s = Self::zero(dim);
        s.insert(porder, coeff);
        s
    }

    /// Convenience in dimension one: `coeff(x) p^k`.
    pub fn term1(k: u32, coeff: CoeffExpr) -> Self {
        Self::monomial(1, MultiIndex::new(vec![k]), coeff)
    }

    /// Convenience in dimension one: field coefficient times `p^k`.
    pub fn field_term1(k: u32, f: Arc<dyn ScalarField>) -> Self {
        Self::term1(k, CoeffExpr::field(f))
    }

    pub fn insert(&mut self, porder: MultiIndex, coeff: CoeffExpr) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(porder) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max `|α|` over the support (2m for a form symbol of order m).
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|a| a.order()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.insert(a.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> PolySymbol {
        let mut out = PolySymbol::zero(self.dim);
        out.hbar_order = self.hbar_order;
        for (a, c) in &self.terms {
            out.insert(a.clone(), c.scale(s));
        }
        out
    }

    pub fn mul(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dim, other.dim);
        let mut out = PolySymbol::zero(self.dim);
        out.hbar_order = self.hbar_order + other.hbar_order;
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.insert(a.add(b), ca.mul(cb));
            }
        }
        out
    }

    /// Exact momentum derivative in direction `dir` (lowers the degree).
    pub fn dp(&self, dir: usize) -> PolySymbol {
        let mut out = PolySymbol::zero(self.dim);
        out.hbar_order = self.hbar_order;
        for (a, c) in &self.terms {
            let k = a.get(dir);
            if k == 0 {
                continue;
            }
            let lowered = a
                .checked_sub(&MultiIndex::unit(self.dim, dir))
                .expect("positive entry");
            out.insert(lowered, c.scale(Complex64::new(k as f64, 0.0)));
        }
        out
    }

    /// Space derivative in direction `dir`, delegated to the coefficient
    /// oracles. Field coefficients are one-dimensional, so `dir` must be 0
    /// whenever a non-constant coefficient is present.
    pub fn dx(&self, dir: usize) -> Result<PolySymbol, SymcalcError> {
        let mut out = PolySymbol::zero(self.dim);
        out.hbar_order = self.hbar_order;
        for (a, c) in &self.terms {
            if c.as_constant().is_some() {
                continue;
            }
            if dir != 0 {
                return Err(SymcalcError::FieldCoefficientDim);
            }
            out.insert(a.clone(), c.dx()?);
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64], p: &[f64]) -> Complex64 {
        assert_eq!(p.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, c) in &self.terms {
            let mut pw = 1.0;
            for (dir, &k) in a.entries().iter().enumerate() {
                pw *= p[dir].powi(k as i32);
            }
            acc += c.eval(x[0]) * pw;
        }
        acc
    }

    /// One-dimensional evaluation.
    pub fn eval1(&self, x: f64, p: f64) -> Complex64 {
        self.eval(&[x], &[p])
    }

    /// `∂_x^η ∂_p^γ (symbol)` evaluated at a point (dimension one).
    pub fn deriv_eval1(&self, xorder: u32, porder: u32, x: f64, p: f64) -> Result<Complex64, SymcalcError> {
        let mut s = self.clone();
        for _ in 0..porder {
            s = s.dp(0);
        }
        for _ in 0..xorder {
            s = s.dx(0)?;
        }
        Ok(s.eval1(x, p))
    }

    /// Real-valued evaluation; errors when the imaginary part is not
    /// negligible relative to the magnitude.
    pub fn eval1_real(&self, x: f64, p: f64) -> Result<f64, SymcalcError> {
        let v = self.eval1(x, p);
        let scale = v.norm().max(1.0);
        if v.im.abs() > 1e-9 * scale {
            return Err(SymcalcError::NotReal { imag: v.im });
        }
        Ok(v.re)
    }

    /// Structural equality with tolerance on scalar factors.
    pub fn approx_eq(&self, other: &PolySymbol, tol: f64) -> bool {
        let mut keys: Vec<&MultiIndex> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.sort();
        keys.dedup();
        let zero = CoeffExpr::zero();
        for k in keys {
            let a = self.terms.get(k).unwrap_or(&zero);
            let b = other.terms.get(k).unwrap_or(&zero);
            if !a.approx_eq(b, tol) {
                return false;
            }
        }
        true
    }

    /// Largest coefficient-field derivative order appearing anywhere.
    pub fn max_atom_order(&self) -> u32 {
        self.terms
            .values()
            .map(|c| c.max_atom_order())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for PolySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c:?}]·p^{a}")?;
        }
        Ok(())
    }
}

/// Evaluate a symbol at a phase-space point, asserting a real value.
/// This is the spec-level `eval_symbol` operation.
pub fn eval_symbol_real(a: &PolySymbol, x: f64, p: f64) -> Result<f64, SymcalcError> {
    a.eval1_real(x, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::HoelderField;

    #[test]
    fn eval_p_squared() {
        // a = p², (x,p) = (0.3, 2) -> 4
        let a = PolySymbol::term1(2, CoeffExpr::real(1.0));
        assert_eq!(a.eval1(0.3, 2.0).re, 4.0);
    }

    #[test]
    fn eval_weighted_kinetic() {
        // a = (1+x²)p² at (1,1) -> 2
        let c = HoelderField::poly("w", vec![1.0, 0.0, 1.0]);
        let a = PolySymbol::field_term1(2, c);
        assert_eq!(a.eval1(1.0, 1.0).re, 2.0);
    }

    #[test]
    fn eval_mixed_symbol() {
        // a = p² + 2 sin(x) p + 1 at (π/2, -1) -> 0
        let s = HoelderField::trig("s", 0.0, vec![(1.0, 0.0, 1.0)]);
        let a = PolySymbol::term1(2, CoeffExpr::real(1.0))
            .add(&PolySymbol::field_term1(1, s).scale(Complex64::new(2.0, 0.0)))
            .add(&PolySymbol::constant(1, 1.0));
        let v = a.eval1(std::f64::consts::FRAC_PI_2, -1.0);
        assert!(v.re.abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn dp_lowers_degree() {
        let a = PolySymbol::term1(3, CoeffExpr::real(2.0));
        let d = a.dp(0);
        // d/dp 2p³ = 6p²
        assert_eq!(d.eval1(0.0, 2.0).re, 24.0);
        assert_eq!(a.dp(0).dp(0).dp(0).dp(0).eval1(0.0, 5.0).re, 0.0);
    }
}
