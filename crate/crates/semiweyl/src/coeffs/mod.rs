//! Non-smooth coefficient fields and their mollification.
//!
//! A coefficient is a scalar function of one space variable together with
//! a derivative oracle up to its declared smoothness `C^{k,μ}` and the
//! tempered-weight constants it satisfies. Mollification convolves with a
//! Schwartz-class kernel whose positive moments vanish, which is what
//! produces the `ε^{k+μ-|η|}` approximation rates that the rest of the
//! toolkit depends on.

mod field;
mod framing;
mod mollify;

pub use field::{make_test_field, FieldId, FieldParams, HoelderField, ScalarField, TestFamily};
pub use framing::{build_framing_symbols, FormCoefficient, FramingSymbolPair};
pub use mollify::{mollify, MollifiedField, MollifierKernel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoeffsError {
    #[error("invalid field parameters: {0}")]
    BadParams(String),
    #[error("mollifier kernel moment order {kernel} is below the field smoothness k = {field}")]
    MomentOrderTooLow { kernel: u32, field: u32 },
    #[error("eps = {0} outside (0, 1]")]
    BadEps(f64),
    #[error(
        "mollification quadrature tail bound exceeded: estimate {estimate:.3e} > tol {tol:.3e} \
         (kernel radius {radius})"
    )]
    TailBound {
        estimate: f64,
        tol: f64,
        radius: f64,
    },
    #[error("derivative order {order} beyond the oracle limit {limit} for field `{field}`")]
    DerivativeOrder {
        field: String,
        order: u32,
        limit: u32,
    },
    #[error(
        "eps = {eps:.3e} above the ellipticity-preservation threshold {threshold:.3e} \
         (C2 = {c2:.3e}, C1 = {c1:.3e}, k+mu = {kmu})"
    )]
    EllipticityThreshold {
        eps: f64,
        threshold: f64,
        c2: f64,
        c1: f64,
        kmu: f64,
    },
}
