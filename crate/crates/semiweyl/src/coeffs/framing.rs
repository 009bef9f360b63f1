//! Framing symbol pairs: smooth-coefficient symbols sandwiching a rough
//! form from below and above in quadratic-form order.
//!
//! For a form with coefficients `a_{αβ} ∈ C^{k,μ}` the pair is
//!
//! `a^±_ε = Σ a^ε_{αβ}(x) p^{α+β} ± C₁ ε^{k+μ} Σ_{|α| ≤ m} p^{2α}`
//!
//! with mollified coefficients `a^ε` and a constant `C₁` computed from the
//! Cauchy–Schwarz step of the framing argument using *measured*
//! mollification constants, so the sandwich holds pointwise on samples by
//! construction and the constant is reproducible.

use std::sync::Arc;

use crate::symcalc::{CoeffExpr, PolySymbol};
use crate::util::MultiIndex;

use super::field::{HoelderField, ScalarField};
use super::mollify::{mollify, MollifiedField, MollifierKernel};
use super::CoeffsError;

/// One coefficient `a_{αβ}` of the sesquilinear form (dimension one, so
/// the multi-indices are single orders). `im_part` carries the purely
/// imaginary antisymmetric coefficients (`a_{αβ} = i g`, `a_{βα} = -i g`).
#[derive(Clone)]
pub struct FormCoefficient {
    pub alpha: u32,
    pub beta: u32,
    pub field: Arc<HoelderField>,
    /// False: coefficient is `field` (real). True: coefficient is
    /// `i·field` and the conjugate pair entry is implied.
    pub imaginary: bool,
}

impl FormCoefficient {
    pub fn real(alpha: u32, beta: u32, field: Arc<HoelderField>) -> Self {
        FormCoefficient {
            alpha,
            beta,
            field,
            imaginary: false,
        }
    }
}

/// The mollified framing pair `a^±_ε` together with the data that built it.
pub struct FramingSymbolPair {
    pub plus: PolySymbol,
    pub minus: PolySymbol,
    pub eps: f64,
    /// The framing constant actually used.
    pub c1: f64,
    /// Measured per-coefficient mollification constants
    /// `sup_x |a - a^ε| / ε^{k+μ}`.
    pub mollification_constants: Vec<f64>,
    /// `k + μ` of the worst coefficient.
    pub kmu: f64,
    pub mollified: Vec<Arc<MollifiedField>>,
    /// Form order m (1 for the second-order forms used here).
    pub m: u32,
}

impl FramingSymbolPair {
    /// The gap `plus - minus = 2 C₁ ε^{k+μ} Σ_{|α| <= m} p^{2α}` in closed
    /// form.
    pub fn gap_symbol(&self) -> PolySymbol {
        let mut s = PolySymbol::zero(1);
        let amp = 2.0 * self.c1 * self.eps.powf(self.kmu);
        for a in 0..=self.m {
            s.insert(MultiIndex::new(vec![2 * a]), CoeffExpr::real(amp));
        }
        s
    }
}

/// Build the framing symbol pair for a dimension-one form of order `m`.
///
/// `ellipticity` is the constant `C₂` of the top-order part
/// (supplied or estimated by the caller); `eps` must stay below the
/// threshold at which the `-C₁ε^{k+μ}` correction could destroy it.
pub fn build_framing_symbols(
    form: &[FormCoefficient],
    eps: f64,
    kernel: Arc<MollifierKernel>,
    ellipticity: f64,
    sample_window: (f64, f64),
) -> Result<FramingSymbolPair, CoeffsError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(CoeffsError::BadEps(eps));
    }
    let m = form.iter().map(|c| c.alpha.max(c.beta)).max().unwrap_or(1);

    // k+μ of the least regular coefficient governs the frame width.
    let kmu = form
        .iter()
        .filter(|c| c.field.max_order().is_some())
        .map(|c| c.field.k as f64 + c.field.mu)
        .fold(f64::INFINITY, f64::min);
    let kmu = if kmu.is_finite() { kmu } else { 2.0 };

    // Mollify every coefficient and measure sup |a - a^eps| on a dense grid.
    let mut mollified = Vec::new();
    let mut constants = Vec::new();
    let (lo, hi) = sample_window;
    let n_samples = 2048;
    for c in form {
        let fe = mollify(c.field.clone(), kernel.clone(), eps)?;
        let mut sup: f64 = 0.0;
        for i in 0..=n_samples {
            let x = lo + (hi - lo) * i as f64 / n_samples as f64;
            sup = sup.max((fe.eval(x) - c.field.eval(x)).abs());
        }
        constants.push(sup / eps.powf(kmu));
        mollified.push(fe);
    }

    // Cauchy–Schwarz framing constant: (number of coefficient pairs) ×
    // (max measured mollification constant), with a 25% sampling margin.
    // In d = 1 the pointwise bound Σ_{a,b<=m}|p|^{a+b} <= (m+1) Σ p^{2a}
    // makes this dominate the coefficient error symbol-wise.
    let n_pairs = ((m + 1) * (m + 1)) as f64;
    let cmax = constants.iter().copied().fold(0.0, f64::max);
    let c1 = 1.25 * n_pairs * cmax.max(1e-300);

    // Ellipticity threshold: keep C2 - C1 eps^{k+mu} >= C2/2.
    let threshold = (ellipticity / (2.0 * c1)).powf(1.0 / kmu);
    if eps > threshold {
        return Err(CoeffsError::EllipticityThreshold {
            eps,
            threshold,
            c2: ellipticity,
            c1,
            kmu,
        });
    }

    // Assemble Σ a^ε_{αβ} p^{α+β} (imaginary pairs cancel in the symbol).
    let mut core = PolySymbol::zero(1);
    for (c, fe) in form.iter().zip(&mollified) {
        if c.imaginary {
            continue;
        }
        core.insert(
            MultiIndex::new(vec![c.alpha + c.beta]),
            CoeffExpr::field(fe.clone() as Arc<dyn ScalarField>),
        );
    }
    let amp = c1 * eps.powf(kmu);
    let mut plus = core.clone();
    let mut minus = core;
    for a in 0..=m {
        plus.insert(MultiIndex::new(vec![2 * a]), CoeffExpr::real(amp));
        minus.insert(MultiIndex::new(vec![2 * a]), CoeffExpr::real(-amp));
    }

    Ok(FramingSymbolPair {
        plus,
        minus,
        eps,
        c1,
        mollification_constants: constants,
        kmu,
        mollified,
        m,
    })
}
