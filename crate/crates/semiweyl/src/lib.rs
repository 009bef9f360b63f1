//! Semiclassical spectral toolkit for differential operators with
//! non-smooth coefficients.
//!
//! The crate is organised around the pipeline
//!
//! ```text
//! coeffs     -- Hölder coefficient fields, mollification, framing symbol pairs
//! symcalc    -- polynomial-in-p symbol algebra, star-product coefficients,
//!               quantization changes, Faà di Bruno expansion engine
//! funcalc    -- resolvent symbol recursion, functional-calculus symbols,
//!               almost-analytic extensions, Helffer–Sjöstrand evaluation
//! quantize   -- exact Weyl / t-quantization on a discrete torus, banded
//!               form operators on an interval, trace identity, Gårding check
//! spectra    -- Sturm counting, eigenvalue extraction, Riesz means,
//!               smoothed counting densities
//! asymptotics-- phase-space volumes, coarea densities, Riesz phase terms,
//!               quadratic stationary phase
//! scenario   -- config-file driven batch runs (used by the `semiweyl` CLI)
//! ```
//!
//! Everything is double precision, dimension one in space (phase space is
//! the `(x, p)` plane), and deterministic: given the same inputs the same
//! bytes come out.


pub mod asymptotics;
pub mod coeffs;
pub mod funcalc;
pub mod quantize;
pub mod scenario;
pub mod spectra;
pub mod symcalc;

pub mod linalg;
pub mod quad;






pub mod util;

pub use num_complex::Complex64;
