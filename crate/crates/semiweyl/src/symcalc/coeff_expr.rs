//! Symbolic coefficient expressions: sums of monomials in derivative
//! atoms of coefficient fields, with complex scalar factors.
//!
//! The `i`-powers produced by the `D = -i∂` convention live in the scalar
//! factors; powers of `i` are exact in floating point, so coefficients the
//! calculus makes real stay real to rounding.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::coeffs::ScalarField;

use super::SymcalcError;

/// `d^order/dx^order` of a coefficient field.
#[derive(Clone)]
pub struct CoeffAtom {
    pub field: Arc<dyn ScalarField>,
    pub order: u32,
}

impl CoeffAtom {
    fn key(&self) -> (u64, u32) {
        (self.field.id().0, self.order)
    }
}

impl PartialEq for CoeffAtom {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for CoeffAtom {}
impl PartialOrd for CoeffAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for CoeffAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Debug for CoeffAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "{}", self.field.name())
        } else if self.order == 1 {
            write!(f, "d({})", self.field.name())
        } else {
            write!(f, "d^{}({})", self.order, self.field.name())
        }
    }
}

/// One monomial: `scalar · Π atoms`.
#[derive(Clone, Debug)]
pub struct CoeffMono {
    pub scalar: Complex64,
    pub atoms: Vec<CoeffAtom>,
}

/// Canonical sum of monomials.
#[derive(Clone, Default)]
pub struct CoeffExpr {
    pub monos: Vec<CoeffMono>,
}

impl CoeffExpr {
    pub fn zero() -> Self {
        CoeffExpr { monos: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        CoeffExpr {
            monos: vec![CoeffMono {
                scalar: c,
                atoms: Vec::new(),
            }],
        }
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn field(f: Arc<dyn ScalarField>) -> Self {
        CoeffExpr {
            monos: vec![CoeffMono {
                scalar: Complex64::new(1.0, 0.0),
                atoms: vec![CoeffAtom { field: f, order: 0 }],
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.monos.is_empty()
    }

    /// True when the expression is a plain constant (possibly zero).
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.monos.len() {
            0 => Some(Complex64::new(0.0, 0.0)),
            1 if self.monos[0].atoms.is_empty() => Some(self.monos[0].scalar),
            _ => None,
        }
    }

    fn canonicalize(mut self) -> Self {
        for m in &mut self.monos {
            m.atoms.sort();
        }
        self.monos.sort_by(|a, b| a.atoms.cmp(&b.atoms));
        let mut out: Vec<CoeffMono> = Vec::with_capacity(self.monos.len());
        for m in self.monos {
            if let Some(last) = out.last_mut() {
                if last.atoms == m.atoms {
                    last.scalar += m.scalar;
                    continue;
                }
            }
            out.push(m);
        }
        out.retain(|m| m.scalar != Complex64::new(0.0, 0.0));
        CoeffExpr { monos: out }
    }

    pub fn add(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut monos = self.monos.clone();
        monos.extend(other.monos.iter().cloned());
        CoeffExpr { monos }.canonicalize()
    }

    pub fn scale(&self, s: Complex64) -> CoeffExpr {
        CoeffExpr {
            monos: self
                .monos
                .iter()
                .map(|m| CoeffMono {
                    scalar: m.scalar * s,
                    atoms: m.atoms.clone(),
                })
                .collect(),
        }
        .canonicalize()
    }

    pub fn mul(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut monos = Vec::with_capacity(self.monos.len() * other.monos.len());
        for a in &self.monos {
            for b in &other.monos {
                let mut atoms = a.atoms.clone();
                atoms.extend(b.atoms.iter().cloned());
                monos.push(CoeffMono {
                    scalar: a.scalar * b.scalar,
                    atoms,
                });
            }
        }
        CoeffExpr { monos }.canonicalize()
    }

    /// Space derivative (dimension one): product rule over the atoms.
    pub fn dx(&self) -> Result<CoeffExpr, SymcalcError> {
        let mut monos = Vec::new();
        for m in &self.monos {
            for (i, atom) in m.atoms.iter().enumerate() {
                if let Some(limit) = atom.field.max_order() {
                    if atom.order + 1 > limit {
                        return Err(SymcalcError::DerivativeOrder {
                            field: atom.field.name().to_string(),
                            order: atom.order + 1,
                            limit,
                        });
                    }
                }
                let mut atoms = m.atoms.clone();
                atoms[i] = CoeffAtom {
                    field: atom.field.clone(),
                    order: atom.order + 1,
                };
                monos.push(CoeffMono {
                    scalar: m.scalar,
                    atoms,
                });
            }
        }
        Ok(CoeffExpr { monos }.canonicalize())
    }

    pub fn conj(&self) -> CoeffExpr {
        CoeffExpr {
            monos: self
                .monos
                .iter()
                .map(|m| CoeffMono {
                    scalar: m.scalar.conj(),
                    atoms: m.atoms.clone(),
                })
                .collect(),
        }
        .canonicalize()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in &self.monos {
            let mut v = m.scalar;
            for a in &m.atoms {
                v *= a.field.deriv(a.order, x);
            }
            acc += v;
        }
        acc
    }

    /// Structural equality with a scalar tolerance (canonical forms share
    /// the same monomial basis, so this is decidable).
    pub fn approx_eq(&self, other: &CoeffExpr, tol: f64) -> bool {
        self.sub(other).max_scalar_norm() <= tol
    }

    pub fn sub(&self, other: &CoeffExpr) -> CoeffExpr {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_scalar_norm(&self) -> f64 {
        self.monos
            .iter()
            .map(|m| m.scalar.norm())
            .fold(0.0, f64::max)
    }

    /// The largest derivative order taken of any field atom.
    pub fn max_atom_order(&self) -> u32 {
        self.monos
            .iter()
            .flat_map(|m| m.atoms.iter().map(|a| a.order))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Debug for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monos.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monos.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", m.scalar.re, m.scalar.im)?;
            for a in &m.atoms {
                write!(f, "·{a:?}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::HoelderField;

    #[test]
    fn product_rule_and_merge() {
        let f = HoelderField::trig("s", 0.0, vec![(1.0, 0.0, 1.0)]); // sin x
        let e = CoeffExpr::field(f.clone()).mul(&CoeffExpr::field(f.clone()));
        // d(sin^2) = 2 sin cos: two identical monomials merged.
        let d = e.dx().unwrap();
        assert_eq!(d.monos.len(), 1);
        assert!((d.monos[0].scalar.re - 2.0).abs() < 1e-15);
        let x = 0.37;
        assert!((d.eval(x).re - 2.0 * x.sin() * x.cos()).abs() < 1e-14);
    }

    #[test]
    fn derivative_limit_propagates() {
        let f = crate::coeffs::make_test_field(
            crate::coeffs::TestFamily::AbsPower,
            &crate::coeffs::FieldParams::default(),
        )
        .unwrap();
        let e = CoeffExpr::field(f);
        let d1 = e.dx().unwrap();
        assert!(matches!(
            d1.dx(),
            Err(SymcalcError::DerivativeOrder { .. })
        ));
    }

    #[test]
    fn approx_eq_detects_equality_of_routes() {
        let f = HoelderField::poly("q", vec![0.0, 0.0, 1.0]); // x^2
        let g = HoelderField::trig("c", 0.0, vec![(2.0, 1.0, 0.0)]); // cos 2x
        let fg = CoeffExpr::field(f.clone()).mul(&CoeffExpr::field(g.clone()));
        // d(fg) built two ways.
        let route1 = fg.dx().unwrap();
        let route2 = CoeffExpr::field(f.clone())
            .dx()
            .unwrap()
            .mul(&CoeffExpr::field(g.clone()))
            .add(&CoeffExpr::field(f).mul(&CoeffExpr::field(g).dx().unwrap()));
        assert!(route1.approx_eq(&route2, 1e-14));
    }
}
