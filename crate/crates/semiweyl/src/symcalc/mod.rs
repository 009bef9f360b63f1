//! Polynomial-in-p symbol algebra.
//!
//! Symbols are finite sums `Σ_α c_α(x) p^α` whose coefficients are
//! symbolic expressions over coefficient-field derivative atoms. All
//! operations here are exact: differentiation bumps derivative atoms,
//! star-product coefficients terminate because the symbols are polynomial
//! in `p`, and equality of canonical forms is decidable (up to float
//! rounding in the scalar factors).

mod coeff_expr;
mod expr;
mod moyal;
mod poly_symbol;

pub use coeff_expr::{CoeffAtom, CoeffExpr, CoeffMono};
pub use expr::{compose_expand, faa_di_bruno_expand, CompiledAtX, CompiledExpr, ExprAtom, ExprMono, SymbolExpr};
pub use moyal::{
    eval_symbol, moyal_series_compose, moyal_terms, principal_from_form, requantize,
    subprincipal_from_form, FormTerm,
};
pub use poly_symbol::PolySymbol;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymcalcError {
    #[error("t = {0} outside the supported quantizations {{0, 1/2, 1}}")]
    UnsupportedQuantization(f64),
    #[error("derivative order {order} exceeds the oracle limit {limit} of field `{field}`")]
    DerivativeOrder {
        field: String,
        order: u32,
        limit: u32,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("space derivatives of field coefficients only implemented in dimension one")]
    FieldCoefficientDim,
    #[error("symbolic evaluation produced imaginary part {imag:.3e} where a real value was required")]
    NotReal { imag: f64 },
}
