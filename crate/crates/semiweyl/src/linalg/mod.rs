//! Self-contained dense linear algebra: exactly the pieces the toolkit
//! needs, tuned for determinism rather than generality.

mod dense;
mod hermitian;
mod iterative;
mod tridiag;

pub use dense::{solve_small, CMat};
pub use hermitian::{hermitian_eigen, hermitian_tridiagonalize, HermitianTridiag};
pub use iterative::{lanczos_extreme_eigs, two_norm_estimate, LinearOp};
pub use tridiag::{
    bisect_eigenvalue, eigenvalues_in_interval, solve_complex_tridiag, sturm_count_below_strict,
    tql2, SymTridiag,
};
