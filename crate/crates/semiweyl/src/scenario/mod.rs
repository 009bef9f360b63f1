//! Scenario configuration: the batch driver's input format and its
//! validated in-memory model.

mod parse;

pub use parse::{parse_scenario, ScenarioParseError};

use std::sync::Arc;

use crate::coeffs::{HoelderField, ScalarField};
use crate::symcalc::{
    principal_from_form, subprincipal_from_form, CoeffExpr, FormTerm, PolySymbol,
};

use num_complex::Complex64;

/// Coefficient family spec as written in the config.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffSpec {
    Const(f64),
    Poly(Vec<f64>),
    Trig { a0: f64, modes: Vec<(f64, f64, f64)> },
    AbsPower { mu: f64, scale: f64, shift: f64 },
    AbsPowSin {
        k: u32,
        mu: f64,
        scale: f64,
        shift: f64,
        freq: f64,
    },
    Weierstrass {
        b: f64,
        k: u32,
        mu: f64,
        scale: f64,
        nterms: u32,
        shift: f64,
    },
}

impl CoeffSpec {
    pub fn build(&self, name: &str) -> Result<Arc<HoelderField>, crate::coeffs::CoeffsError> {
        match self {
            CoeffSpec::Const(c) => Ok(HoelderField::constant(name, *c)),
            CoeffSpec::Poly(cs) => Ok(HoelderField::poly(name, cs.clone())),
            CoeffSpec::Trig { a0, modes } => Ok(HoelderField::trig(name, *a0, modes.clone())),
            CoeffSpec::AbsPower { mu, scale, shift } => {
                HoelderField::abs_power(name, *mu, *scale, *shift)
            }
            CoeffSpec::AbsPowSin {
                k,
                mu,
                scale,
                shift,
                freq,
            } => HoelderField::abs_pow_sin(name, *k, *mu, *scale, *shift, *freq),
            CoeffSpec::Weierstrass {
                b,
                k,
                mu,
                scale,
                nterms,
                shift,
            } => HoelderField::weierstrass(name, *b, *k, *mu, *scale, *nterms, *shift),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Interval {
        x_lo: f64,
        x_hi: f64,
        /// Interior spacing h = hbar / oversample.
        oversample: f64,
    },
    Torus {
        l: f64,
        /// Max grid momentum = nyquist_factor x classical_p.
        classical_p: f64,
        nyquist_factor: f64,
        n_max: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaRule {
    /// δ = μ/(1+μ) (Weyl-law regime).
    Weyl,
    /// δ = 1 - (1+γ)/(2+μ) (Riesz regime; depends on γ).
    Riesz,
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Declared class of the rough coefficients.
    pub k: u32,
    pub mu: f64,
    pub a11: CoeffSpec,
    pub a00: CoeffSpec,
    pub g: Option<CoeffSpec>,
    pub grid: GridSpec,
    pub hbars: Vec<f64>,
    pub gammas: Vec<f64>,
    pub delta: DeltaRule,
    pub kernel_moment_order: u32,
    pub kernel_radius: f64,
    pub smoothing_t0: f64,
    pub dos_hbar: f64,
    /// Localization bump (a1, a2, b1, b2) for density-of-states work.
    pub window: (f64, f64, f64, f64),
    /// Bulk interval for the DOS sup comparison.
    pub bulk: (f64, f64),
    /// Phase-space bounding box for volume quadratures.
    pub region_x: (f64, f64),
    pub region_p: (f64, f64),
    pub suites: Vec<String>,
    pub tolerances: std::collections::BTreeMap<String, f64>,
}

impl Scenario {
    /// δ for a given γ under the scenario's rule; always in (0, 1).
    pub fn delta(&self, gamma: f64) -> f64 {
        let d = match self.delta {
            DeltaRule::Weyl => self.mu / (1.0 + self.mu),
            DeltaRule::Riesz => 1.0 - (1.0 + gamma) / (2.0 + self.mu),
            DeltaRule::Fixed(d) => d,
        };
        d.clamp(1e-6, 1.0 - 1e-6)
    }

    /// eps = ħ^{1-δ} (the microlocal uncertainty floor).
    pub fn eps_for(&self, hbar: f64, gamma: f64) -> f64 {
        hbar.powf(1.0 - self.delta(gamma))
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    pub fn build_fields(
        &self,
    ) -> Result<BuiltFields, crate::coeffs::CoeffsError> {
        Ok(BuiltFields {
            a11: self.a11.build("a11")?,
            a00: self.a00.build("a00")?,
            g: match &self.g {
                None => None,
                Some(spec) => Some(spec.build("g")?),
            },
        })
    }
}

pub struct BuiltFields {
    pub a11: Arc<HoelderField>,
    pub a00: Arc<HoelderField>,
    pub g: Option<Arc<HoelderField>>,
}

impl BuiltFields {
    /// Form terms of the m = 1 sesquilinear form (the antisymmetric pair
    /// enters as a_{01} = i g, a_{10} = -i g).
    pub fn form_terms(&self) -> Vec<FormTerm> {
        let mut terms = vec![
            FormTerm::new1(1, 1, CoeffExpr::field(self.a11.clone())),
            FormTerm::new1(0, 0, CoeffExpr::field(self.a00.clone())),
        ];
        if let Some(g) = &self.g {
            let i = Complex64::new(0.0, 1.0);
            terms.push(FormTerm::new1(0, 1, CoeffExpr::field(g.clone()).scale(i)));
            terms.push(FormTerm::new1(1, 0, CoeffExpr::field(g.clone()).scale(-i)));
        }
        terms
    }

    pub fn principal(&self) -> PolySymbol {
        principal_from_form(&self.form_terms())
    }

    pub fn subprincipal(&self) -> Result<PolySymbol, crate::symcalc::SymcalcError> {
        subprincipal_from_form(&self.form_terms())
    }

    pub fn scalar_fields(&self) -> Vec<Arc<dyn ScalarField>> {
        let mut out: Vec<Arc<dyn ScalarField>> =
            vec![self.a11.clone(), self.a00.clone()];
        if let Some(g) = &self.g {
            out.push(g.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_rules() {
        let mut sc = parse::tests_support::minimal_scenario();
        sc.mu = 0.5;
        sc.delta = DeltaRule::Weyl;
        assert!((sc.delta(1.0) - 1.0 / 3.0).abs() < 1e-12);
        sc.delta = DeltaRule::Riesz;
        assert!((sc.delta(1.0) - 0.2).abs() < 1e-12);
        assert!((sc.delta(0.5) - 0.4).abs() < 1e-12);
        // eps respects the microlocal uncertainty: eps = ħ^{1-δ} >= ħ.
        let eps = sc.eps_for(0.01, 1.0);
        assert!(eps >= 0.01 && eps <= 1.0);
    }

    #[test]
    fn form_symbols_from_fields() {
        let sc = parse::tests_support::minimal_scenario();
        let fields = sc.build_fields().unwrap();
        let a0 = fields.principal();
        // a11 = 1, a00 = x² - 1: a0 = p² + x² - 1.
        let v = a0.eval1(0.5, 0.5).re;
        assert!((v - (-0.5)).abs() < 1e-14);
        let a1 = fields.subprincipal().unwrap();
        assert!(a1.is_zero());
    }
}
