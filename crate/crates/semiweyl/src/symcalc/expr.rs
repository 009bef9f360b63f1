//! Formal expressions over derivative atoms of a symbol series.
//!
//! A monomial is `scalar · Π ∂_x^η ∂_p^γ a_l · B^k · f^{(r)}(a_0)` where
//! `B` stands for the resolvent factor `(a_0 - z)^{-1}`. The algebra is
//! closed under phase-space differentiation: the chain rule on `B^k`
//! produces `-k B^{k+1} ∂a_0` terms and on `f^{(r)}` bumps the derivative
//! order. This single engine carries both the resolvent-symbol recursion
//! tables and the Faà di Bruno expansion.


use std::fmt;

use num_complex::Complex64;

use crate::util::MultiIndex;

use super::{PolySymbol, SymcalcError};

/// `∂_x^η ∂_p^γ a_sym`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExprAtom {
    pub sym: u32,
    pub x: MultiIndex,
    pub p: MultiIndex,
}

impl ExprAtom {
    pub fn base(dim: usize, sym: u32) -> Self {
        ExprAtom {
            sym,
            x: MultiIndex::zeros(dim),
            p: MultiIndex::zeros(dim),
        }
    }
}

impl fmt::Debug for ExprAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xo = self.x.order();
        let po = self.p.order();
        if xo > 0 {
            write!(f, "dx{}", if xo > 1 { format!("^{xo}") } else { String::new() })?;
        }
        if po > 0 {
            write!(f, "dp{}", if po > 1 { format!("^{po}") } else { String::new() })?;
        }
        if xo > 0 || po > 0 {
            write!(f, "(a{})", self.sym)
        } else {
            write!(f, "a{}", self.sym)
        }
    }
}

/// `scalar · Π atoms · B^bpow · f^{(fder)}`.
#[derive(Clone)]
pub struct ExprMono {
    pub scalar: Complex64,
    pub atoms: Vec<ExprAtom>,
    pub bpow: u32,
    pub fder: u32,
}

impl ExprMono {
    fn key(&self) -> (u32, u32, &[ExprAtom]) {
        (self.bpow, self.fder, &self.atoms)
    }
}

/// Canonical sum of monomials.
#[derive(Clone, Default)]
pub struct SymbolExpr {
    pub dim: usize,
    pub monos: Vec<ExprMono>,
}

impl SymbolExpr {
    pub fn zero(dim: usize) -> Self {
        SymbolExpr {
            dim,
            monos: Vec::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        SymbolExpr {
            dim,
            monos: vec![ExprMono {
                scalar: c,
                atoms: Vec::new(),
                bpow: 0,
                fder: 0,
            }],
        }
        .canonical()
    }

    /// The atom `a_sym` as an expression.
    pub fn atom(dim: usize, sym: u32) -> Self {
        SymbolExpr {
            dim,
            monos: vec![ExprMono {
                scalar: Complex64::new(1.0, 0.0),
                atoms: vec![ExprAtom::base(dim, sym)],
                bpow: 0,
                fder: 0,
            }],
        }
    }

    /// The resolvent factor `B = (a_0 - z)^{-1}`.
    pub fn resolvent_factor(dim: usize) -> Self {
        SymbolExpr {
            dim,
            monos: vec![ExprMono {
                scalar: Complex64::new(1.0, 0.0),
                atoms: Vec::new(),
                bpow: 1,
                fder: 0,
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.monos.is_empty()
    }

    fn canonical(mut self) -> Self {
        for m in &mut self.monos {
            m.atoms.sort();
        }
        self.monos.sort_by(|a, b| {
            a.bpow
                .cmp(&b.bpow)
                .then(a.fder.cmp(&b.fder))
                .then_with(|| a.atoms.cmp(&b.atoms))
        });
        let mut out: Vec<ExprMono> = Vec::with_capacity(self.monos.len());
        for m in self.monos {
            if let Some(last) = out.last_mut() {
                if last.key() == m.key() {
                    last.scalar += m.scalar;
                    continue;
                }
            }
            out.push(m);
        }
        out.retain(|m| m.scalar != Complex64::new(0.0, 0.0));
        SymbolExpr {
            dim: self.dim,
            monos: out,
        }
    }

    pub fn add(&self, other: &SymbolExpr) -> SymbolExpr {
        let mut monos = self.monos.clone();
        monos.extend(other.monos.iter().cloned());
        SymbolExpr {
            dim: self.dim,
            monos,
        }
        .canonical()
    }

    pub fn scale(&self, s: Complex64) -> SymbolExpr {
        SymbolExpr {
            dim: self.dim,
            monos: self
                .monos
                .iter()
                .map(|m| ExprMono {
                    scalar: m.scalar * s,
                    atoms: m.atoms.clone(),
                    bpow: m.bpow,
                    fder: m.fder,
                })
                .collect(),
        }
        .canonical()
    }

    pub fn mul(&self, other: &SymbolExpr) -> SymbolExpr {
        let mut monos = Vec::with_capacity(self.monos.len() * other.monos.len());
        for a in &self.monos {
            for b in &other.monos {
                let mut atoms = a.atoms.clone();
                atoms.extend(b.atoms.iter().cloned());
                monos.push(ExprMono {
                    scalar: a.scalar * b.scalar,
                    atoms,
                    bpow: a.bpow + b.bpow,
                    fder: a.fder + b.fder,
                });
            }
        }
        SymbolExpr {
            dim: self.dim,
            monos,
        }
        .canonical()
    }

    /// Phase-space derivative. `dx = true` differentiates in `x_dir`,
    /// otherwise in `p_dir`. The chain rule on `B^k` introduces
    /// `-k B^{k+1} ∂a_0`; monomials with `fder` set are rejected here
    /// (the Faà di Bruno engine handles those via [`compose_expand`]).
    pub fn derivative(&self, dx: bool, dir: usize) -> SymbolExpr {
        let mut monos = Vec::new();
        for m in &self.monos {
            assert_eq!(m.fder, 0, "derivative of f-monomials must go through compose_expand");
            // Product rule over the atoms.
            for (i, atom) in m.atoms.iter().enumerate() {
                let mut atoms = m.atoms.clone();
                let mut na = atom.clone();
                if dx {
                    na.x = na.x.bump(dir);
                } else {
                    na.p = na.p.bump(dir);
                }
                atoms[i] = na;
                monos.push(ExprMono {
                    scalar: m.scalar,
                    atoms,
                    bpow: m.bpow,
                    fder: 0,
                });
            }
            // Chain rule on the resolvent power.
            if m.bpow > 0 {
                let mut atoms = m.atoms.clone();
                let mut da0 = ExprAtom::base(self.dim, 0);
                if dx {
                    da0.x = da0.x.bump(dir);
                } else {
                    da0.p = da0.p.bump(dir);
                }
                atoms.push(da0);
                monos.push(ExprMono {
                    scalar: m.scalar * (-(m.bpow as f64)),
                    atoms,
                    bpow: m.bpow + 1,
                    fder: 0,
                });
            }
        }
        SymbolExpr {
            dim: self.dim,
            monos,
        }
        .canonical()
    }

    /// Equality of canonical forms up to a scalar tolerance.
    pub fn approx_eq(&self, other: &SymbolExpr, tol: f64) -> bool {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
            .monos
            .iter()
            .all(|m| m.scalar.norm() <= tol)
    }

    /// Evaluate with a concrete base symbol series: `base[l]` realises
    /// `a_l`. `z` gives the resolvent parameter when `B` powers occur;
    /// `fderiv(r, v)` evaluates `f^{(r)}(v)` when `fder` tags occur.
    pub fn eval(
        &self,
        base: &[&PolySymbol],
        x: f64,
        p: f64,
        z: Option<Complex64>,
        fderiv: Option<&dyn Fn(u32, f64) -> f64>,
    ) -> Result<Complex64, SymcalcError> {
        let a0_val = if self.monos.iter().any(|m| m.bpow > 0 || m.fder > 0) {
            base[0].eval1(x, p)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for m in &self.monos {
            let mut v = m.scalar;
            for atom in &m.atoms {
                let sym = base
                    .get(atom.sym as usize)
                    .copied()
                    .unwrap_or(&PLACEHOLDER_ZERO);
                v *= sym.deriv_eval1(atom.x.order(), atom.p.order(), x, p)?;
                if v.norm() == 0.0 {
                    break;
                }
            }
            if m.bpow > 0 {
                let z = z.expect("resolvent powers require z");
                v *= (a0_val - z).powi(-(m.bpow as i32));
            }
            if m.fder > 0 || fderiv.is_some() {
                if let Some(fd) = fderiv {
                    // f^{(r)} takes the real part of a_0; imaginary parts
                    // at this point indicate a mis-specified base symbol.
                    v *= fd(m.fder, a0_val.re);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Worst ε-exponent of the expression for regularity `tau`: each atom
    /// `∂^η_x ∂^γ_p a_l` contributes `min(0, tau - l - |η|)`, products add.
    pub fn eps_exponent(&self, tau: i32) -> i32 {
        self.monos
            .iter()
            .map(|m| {
                m.atoms
                    .iter()
                    .map(|a| (tau - a.sym as i32 - a.x.order() as i32).min(0))
                    .sum::<i32>()
            })
            .min()
            .unwrap_or(0)
    }

    /// Max over atoms of `|η| + |γ| + l` (the structure-lemma budget).
    pub fn max_atom_budget(&self) -> u32 {
        self.monos
            .iter()
            .flat_map(|m| {
                m.atoms
                    .iter()
                    .map(|a| a.x.order() + a.p.order() + a.sym)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn max_bpow(&self) -> u32 {
        self.monos.iter().map(|m| m.bpow).max().unwrap_or(0)
    }

    /// Deterministic text form used by golden-file tests.
    pub fn pretty(&self) -> String {
        if self.monos.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, m) in self.monos.iter().enumerate() {
            let s = m.scalar;
            let sign = if s.im == 0.0 && s.re < 0.0 { "-" } else { "+" };
            if i > 0 || sign == "-" {
                out.push_str(sign);
                if i > 0 {
                    out.push(' ');
                }
            }
            let mag = if s.im == 0.0 {
                format_scalar(s.re.abs())
            } else if s.re == 0.0 {
                format!("{}i", format_scalar(s.im))
            } else {
                format!("({}{:+}i)", format_scalar(s.re), s.im)
            };
            out.push_str(&mag);
            for a in &m.atoms {
                out.push_str(&format!("·{a:?}"));
            }
            if m.bpow > 0 {
                out.push_str(&format!("·B^{}", m.bpow));
            }
            if m.fder > 0 {
                out.push_str(&format!("·f^({})", m.fder));
            }
            if i + 1 < self.monos.len() {
                out.push(' ');
            }
        }
        out
    }
}

fn format_scalar(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl fmt::Debug for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

static PLACEHOLDER_ZERO: std::sync::LazyLock<PolySymbol> =
    std::sync::LazyLock::new(|| PolySymbol::zero(1));

/// Expand `∂_p^β ∂_x^α f^{(f_order)}(g)` as `Σ_k f^{(k)}(g) · P_k` where the
/// `P_k` are polynomials in derivative atoms of `g`. The combinatorial
/// constants come out of iterated single-variable chain/Leibniz steps with
/// canonical-form merging, not a closed formula.
pub fn compose_expand(
    g: &SymbolExpr,
    f_order: u32,
    alpha: &MultiIndex,
    beta: &MultiIndex,
) -> SymbolExpr {
    let dim = g.dim;
    // State: map fder-offset k -> factor expression (product polynomial).
    let mut layers: Vec<SymbolExpr> = vec![SymbolExpr::constant(dim, Complex64::new(1.0, 0.0))];
    let apply = |layers: &mut Vec<SymbolExpr>, dx: bool, dir: usize| {
        let mut next: Vec<SymbolExpr> = vec![SymbolExpr::zero(dim); layers.len() + 1];
        let dg = g.derivative(dx, dir);
        for (k, factor) in layers.iter().enumerate() {
            if factor.is_zero() {
                continue;
            }
            // Leibniz: derivative of the factor keeps level k ...
            next[k] = next[k].add(&factor.derivative(dx, dir));
            // ... chain on f^{(k)}(g) raises the level.
            next[k + 1] = next[k + 1].add(&factor.mul(&dg));
        }
        *layers = next;
    };
    for dir in 0..dim {
        for _ in 0..alpha.get(dir) {
            apply(&mut layers, true, dir);
        }
    }
    for dir in 0..dim {
        for _ in 0..beta.get(dir) {
            apply(&mut layers, false, dir);
        }
    }
    // Assemble: level k carries f^{(f_order + k)}.
    let mut out = SymbolExpr::zero(dim);
    for (k, factor) in layers.into_iter().enumerate() {
        if factor.is_zero() {
            continue;
        }
        let tagged = SymbolExpr {
            dim,
            monos: factor
                .monos
                .into_iter()
                .map(|mut m| {
                    m.fder = f_order + k as u32;
                    m
                })
                .collect(),
        };
        out = out.add(&tagged);
    }
    out.canonical()
}

/// Faà di Bruno expansion of `∂_p^β ∂_x^α f(a_0)` with `a_0` abstract.
pub fn faa_di_bruno_expand(f_order: u32, alpha: &MultiIndex, beta: &MultiIndex) -> SymbolExpr {
    let dim = alpha.dim();
    let g = SymbolExpr::atom(dim, 0);
    compose_expand(&g, f_order, alpha, beta)
}

/// Expression compiled against a concrete base series for fast repeated
/// evaluation: every distinct derivative atom is differentiated once
/// symbolically, then per-point work is plain arithmetic. Evaluation at a
/// fixed `x` amortizes the coefficient-oracle calls across all `p`.
pub struct CompiledExpr {
    monos: Vec<(Complex64, Vec<usize>, u32, u32)>,
    /// Pre-differentiated atom symbols, flattened to
    /// (p-power, [(scalar, [(field, order)])]).
    atoms: Vec<Vec<(i32, Vec<(Complex64, Vec<(std::sync::Arc<dyn crate::coeffs::ScalarField>, u32)>)>)>>,
    a0: Option<PolySymbol>,
}

/// Per-`x` snapshot: atom values become polynomials in `p`.
pub struct CompiledAtX {
    /// Per atom: coefficients by p-power (sparse (power, value)).
    atom_polys: Vec<Vec<(i32, Complex64)>>,
    monos: Vec<(Complex64, Vec<usize>, u32, u32)>,
    a0_poly: Option<Vec<(i32, Complex64)>>,
}

impl CompiledExpr {
    pub fn compile(expr: &SymbolExpr, base: &[PolySymbol]) -> Result<Self, SymcalcError> {
        use std::collections::HashMap;
        let mut atom_ids: HashMap<(u32, u32, u32), usize> = HashMap::new();
        let mut atoms = Vec::new();
        let mut monos = Vec::new();
        let needs_a0 = expr.monos.iter().any(|m| m.bpow > 0 || m.fder > 0);
        for m in &expr.monos {
            let mut ids = Vec::with_capacity(m.atoms.len());
            for atom in &m.atoms {
                let key = (atom.sym, atom.x.order(), atom.p.order());
                let id = match atom_ids.get(&key) {
                    Some(&id) => id,
                    None => {
                        let mut sym = base
                            .get(atom.sym as usize)
                            .cloned()
                            .unwrap_or_else(|| PolySymbol::zero(expr.dim));
                        for _ in 0..atom.p.order() {
                            sym = sym.dp(0);
                        }
                        for _ in 0..atom.x.order() {
                            sym = sym.dx(0)?;
                        }
                        let flat = flatten_symbol(&sym);
                        let id = atoms.len();
                        atoms.push(flat);
                        atom_ids.insert(key, id);
                        id
                    }
                };
                ids.push(id);
            }
            monos.push((m.scalar, ids, m.bpow, m.fder));
        }
        Ok(CompiledExpr {
            monos,
            atoms,
            a0: needs_a0.then(|| base[0].clone()),
        })
    }

    pub fn at_x(&self, x: f64) -> CompiledAtX {
        let atom_polys = self
            .atoms
            .iter()
            .map(|flat| {
                flat.iter()
                    .map(|(k, monos)| {
                        let mut c = Complex64::new(0.0, 0.0);
                        for (scalar, fields) in monos {
                            let mut v = *scalar;
                            for (field, order) in fields {
                                v *= field.deriv(*order, x);
                            }
                            c += v;
                        }
                        (*k, c)
                    })
                    .collect()
            })
            .collect();
        let a0_poly = self.a0.as_ref().map(|a0| {
            flatten_symbol(a0)
                .iter()
                .map(|(k, monos)| {
                    let mut c = Complex64::new(0.0, 0.0);
                    for (scalar, fields) in monos {
                        let mut v = *scalar;
                        for (field, order) in fields {
                            v *= field.deriv(*order, x);
                        }
                        c += v;
                    }
                    (*k, c)
                })
                .collect()
        });
        CompiledAtX {
            atom_polys,
            monos: self.monos.clone(),
            a0_poly,
        }
    }
}

impl CompiledAtX {
    #[inline]
    pub fn eval(&self, p: f64, z: Option<Complex64>) -> Complex64 {
        let eval_poly = |poly: &[(i32, Complex64)]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k, c) in poly {
                acc += c * p.powi(k);
            }
            acc
        };
        let b = match (&self.a0_poly, z) {
            (Some(poly), Some(z)) => Some((eval_poly(poly) - z).finv()),
            _ => None,
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (scalar, ids, bpow, _fder) in &self.monos {
            let mut v = *scalar;
            for &id in ids {
                v *= eval_poly(&self.atom_polys[id]);
                if v.norm_sqr() == 0.0 {
                    break;
                }
            }
            if *bpow > 0 {
                let b = b.expect("resolvent power needs z");
                v *= b.powu(*bpow);
            }
            acc += v;
        }
        acc
    }
}

type FlatTerms =
    Vec<(i32, Vec<(Complex64, Vec<(std::sync::Arc<dyn crate::coeffs::ScalarField>, u32)>)>)>;

fn flatten_symbol(sym: &PolySymbol) -> FlatTerms {
    sym.terms
        .iter()
        .map(|(alpha, coeff)| {
            (
                alpha.get(0) as i32,
                coeff
                    .monos
                    .iter()
                    .map(|m| {
                        (
                            m.scalar,
                            m.atoms
                                .iter()
                                .map(|a| (a.field.clone(), a.order))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcalc::CoeffExpr;

    fn mi(v: Vec<u32>) -> MultiIndex {
        MultiIndex::new(v)
    }

    #[test]
    fn first_order_chain_rule() {
        // ∂_x f(g) = f'(g) ∂_x g
        let e = faa_di_bruno_expand(0, &mi(vec![1]), &mi(vec![0]));
        assert_eq!(e.monos.len(), 1);
        let m = &e.monos[0];
        assert_eq!(m.fder, 1);
        assert_eq!(m.atoms.len(), 1);
        assert_eq!(m.atoms[0].x.order(), 1);
        assert_eq!(m.atoms[0].p.order(), 0);
        assert_eq!(e.pretty(), "1·dx(a0)·f^(1)");
    }

    #[test]
    fn second_order_chain_rule() {
        // ∂_x² f(g) = f''(g)(∂_x g)² + f'(g) ∂_x² g
        let e = faa_di_bruno_expand(0, &mi(vec![2]), &mi(vec![0]));
        assert_eq!(e.monos.len(), 2);
        assert_eq!(e.pretty(), "1·dx^2(a0)·f^(1) + 1·dx(a0)·dx(a0)·f^(2)");
    }

    #[test]
    fn mixed_xp_expansion() {
        // ∂_x ∂_p f(g) = f''(g) ∂_x g ∂_p g + f'(g) ∂_x∂_p g
        let e = faa_di_bruno_expand(0, &mi(vec![1]), &mi(vec![1]));
        assert_eq!(e.monos.len(), 2);
        let budgets: Vec<u32> = e.monos.iter().map(|m| m.fder).collect();
        assert_eq!(budgets, vec![1, 2]);
    }

    #[test]
    fn mixed_expansion_against_finite_differences() {
        // g = p² + sin x, f = exp: validate ∂_x∂_p f(g) numerically at
        // scattered points.
        let s = crate::coeffs::HoelderField::trig("s", 0.0, vec![(1.0, 0.0, 1.0)]);
        let g_poly = PolySymbol::term1(2, CoeffExpr::real(1.0))
            .add(&PolySymbol::field_term1(0, s));
        let expansion = faa_di_bruno_expand(0, &mi(vec![1]), &mi(vec![1]));
        let fexp = |_r: u32, v: f64| v.exp();
        let h = 3e-5;
        for (x, p) in [(0.1, 0.4), (-0.8, 1.2), (1.9, -0.6), (0.33, 2.2)] {
            let sym = expansion
                .eval(&[&g_poly], x, p, None, Some(&fexp))
                .unwrap()
                .re;
            let f = |x: f64, p: f64| g_poly.eval1(x, p).re.exp();
            let fd = (f(x + h, p + h) - f(x + h, p - h) - f(x - h, p + h) + f(x - h, p - h))
                / (4.0 * h * h);
            let rel = (sym - fd).abs() / fd.abs().max(1.0);
            assert!(rel < 1e-6, "x={x} p={p} sym={sym} fd={fd} rel={rel:e}");
        }
    }

    #[test]
    fn total_degree_bookkeeping() {
        // Every monomial of ∂_p^β ∂_x^α f(g) has x-orders summing to |α|
        // and p-orders summing to |β|.
        for (a, b) in [(2u32, 1u32), (1, 2), (3, 0), (2, 2)] {
            let e = faa_di_bruno_expand(0, &mi(vec![a]), &mi(vec![b]));
            for m in &e.monos {
                let xs: u32 = m.atoms.iter().map(|at| at.x.order()).sum();
                let ps: u32 = m.atoms.iter().map(|at| at.p.order()).sum();
                assert_eq!(xs, a);
                assert_eq!(ps, b);
            }
        }
    }

    #[test]
    fn resolvent_factor_chain_rule() {
        // ∂_x B = -B² ∂_x a_0
        let b = SymbolExpr::resolvent_factor(1);
        let d = b.derivative(true, 0);
        assert_eq!(d.monos.len(), 1);
        assert_eq!(d.monos[0].bpow, 2);
        assert_eq!(d.monos[0].scalar, Complex64::new(-1.0, 0.0));
        assert_eq!(d.pretty(), "-1·dx(a0)·B^2");
    }

    #[test]
    fn eps_exponent_bookkeeping() {
        // Atom dx²(a1) with tau = 2: exponent (2 - 1 - 2)_- = -1.
        let e = SymbolExpr::atom(1, 1).derivative(true, 0).derivative(true, 0);
        assert_eq!(e.eps_exponent(2), -1);
        assert_eq!(e.eps_exponent(4), 0);
    }
}
