//! Helffer–Sjöstrand evaluation of `f(H)` for Hermitian matrices:
//!
//! `f(H) = -(1/π) ∫_ℂ ∂̄f̃(z) (z - H)^{-1} L(dz)`.
//!
//! The matrix is tridiagonalized once; every quadrature node is then an
//! independent pivoted tridiagonal solve (all right-hand sides), and the
//! accumulated kernel is rotated back at the end. Nodes are tensor
//! Gauss–Legendre in `x` over the support of `f̃` and dyadic-towards-the-
//! axis bands in `y`, where the `|y|^n` vanishing of `∂̄f̃` beats the
//! `1/|y|` resolvent growth band by band.

use num_complex::Complex64;
use std::sync::Arc;

use crate::linalg::{hermitian_tridiagonalize, solve_complex_tridiag, CMat};
use crate::quad::gauss_legendre;

use super::profile::{AlmostAnalyticExtension, FunctionProfile};
use super::FuncalcError;

/// Quadrature layout for [`hs_apply`]. The x-direction must resolve the
/// spikes of `f^{(n+1)}` inside the profile's edge intervals, so panels
/// are distributed per edge segment; the y-direction needs only moderate
/// bulk panels plus a few dyadic bands toward the axis (the integrand
/// already vanishes like `|y|^{n-1}` there).
#[derive(Clone, Copy, Debug)]
pub struct HsQuad {
    /// Panels per profile segment (each segment between breakpoints).
    pub x_panels_per_segment: usize,
    pub x_nodes: usize,
    /// Uniform bulk panels over `[λ/16, 2λ]`.
    pub y_panels: usize,
    pub y_nodes: usize,
    /// Dyadic bands below `λ/16`.
    pub y_dyadic: usize,
    pub y_dyadic_nodes: usize,
    pub tol: f64,
}

impl Default for HsQuad {
    fn default() -> Self {
        HsQuad {
            x_panels_per_segment: 40,
            x_nodes: 10,
            y_panels: 32,
            y_nodes: 8,
            y_dyadic: 12,
            y_dyadic_nodes: 4,
            tol: 1e-3,
        }
    }
}

/// Evaluate `f(H)` by the Helffer–Sjöstrand formula with an `n`-term
/// almost-analytic extension.
pub fn hs_apply(
    h: &CMat,
    f: &FunctionProfile,
    n: u32,
    quad: HsQuad,
) -> Result<CMat, FuncalcError> {
    let herm = h.hermitian_residual();
    if herm > 1e-10 {
        return Err(FuncalcError::NotHermitian(herm));
    }
    if n < 2 {
        return Err(FuncalcError::ExtensionOrderTooLow(n));
    }
    let (a, b) = f.support().ok_or(FuncalcError::NoSupport)?;
    let ext = AlmostAnalyticExtension::new(Arc::new(f.clone()), n);

    let dim = h.n;
    let ht = hermitian_tridiagonalize(h, true);
    let q = ht.q.expect("vectors requested");

    let (gx, wx) = gauss_legendre(quad.x_nodes);
    let (gy, wy) = gauss_legendre(quad.y_nodes);
    let (gd, wd) = gauss_legendre(quad.y_dyadic_nodes);

    // x-panels distributed per profile segment.
    let mut cuts: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .filter(|&c| c >= a - 1e-12 && c <= b + 1e-12)
        .collect();
    cuts.insert(0, a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|u, v| (*u - *v).abs() < 1e-12);
    let mut x_panels: Vec<(f64, f64)> = Vec::new();
    for seg in cuts.windows(2) {
        let w = seg[1] - seg[0];
        if w <= 0.0 {
            continue;
        }
        let np = quad.x_panels_per_segment;
        for k in 0..np {
            x_panels.push((
                seg[0] + w * k as f64 / np as f64,
                seg[0] + w * (k + 1) as f64 / np as f64,
            ));
        }
    }

    // All z-nodes with weights w·∂̄f̃(z).
    let mut z_nodes: Vec<(Complex64, Complex64, bool)> = Vec::new();
    for &(x_lo, x_hi) in &x_panels {
        let hx = x_hi - x_lo;
        for (xi, wxi) in gx.iter().zip(&wx) {
            let x = x_lo + 0.5 * hx * (xi + 1.0);
            let wx_total = 0.5 * hx * wxi;
            let lam = (1.0 + x * x).sqrt();
            let y_split = lam / 16.0;
            let hy = (2.0 * lam - y_split) / quad.y_panels as f64;
            for py in 0..quad.y_panels {
                let y_lo = y_split + hy * py as f64;
                for (yi, wyi) in gy.iter().zip(&wy) {
                    let y = y_lo + 0.5 * hy * (yi + 1.0);
                    let w_total = wx_total * 0.5 * hy * wyi;
                    let dbar = ext.dbar(x, y);
                    if dbar.norm() > 0.0 {
                        z_nodes.push((Complex64::new(x, y), dbar * w_total, false));
                    }
                }
            }
            let mut hi = y_split;
            for band in 0..quad.y_dyadic {
                let lo = 0.5 * hi;
                for (yi, wyi) in gd.iter().zip(&wd) {
                    let y = lo + 0.5 * (hi - lo) * (yi + 1.0);
                    let w_total = wx_total * 0.5 * (hi - lo) * wyi;
                    let dbar = ext.dbar(x, y);
                    if dbar.norm() > 0.0 {
                        z_nodes.push((
                            Complex64::new(x, y),
                            dbar * w_total,
                            band + 1 == quad.y_dyadic,
                        ));
                    }
                }
                hi = lo;
            }
        }
    }

    // Accumulate M = -(2/π) Re Σ w ∂̄f̃(z) (z - T)^{-1} over the upper half
    // plane (the lower half contributes the entrywise conjugate because T
    // is real and f is real). Nodes are independent solves; parallel over
    // nodes with a deterministic chunked reduction.
    use rayon::prelude::*;
    let chunk = 256;
    let partials: Vec<(Vec<Complex64>, Vec<Complex64>)> = z_nodes
        .par_chunks(chunk)
        .map(|nodes| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut inner = vec![Complex64::new(0.0, 0.0); dim * dim];
            for (z, coeff, innermost) in nodes {
                for col in 0..dim {
                    let mut e = vec![Complex64::new(0.0, 0.0); dim];
                    e[col] = Complex64::new(1.0, 0.0);
                    let sol = solve_complex_tridiag(&ht.t, *z, &e);
                    for row in 0..dim {
                        acc[row * dim + col] += coeff * sol[row];
                        if *innermost {
                            inner[row * dim + col] += coeff * sol[row];
                        }
                    }
                }
            }
            (acc, inner)
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut innermost = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (pa, pi) in &partials {
        for k in 0..dim * dim {
            acc[k] += pa[k];
            innermost[k] += pi[k];
        }
    }

    // Quadrature estimate: the dyadic refinement converges geometrically,
    // so the innermost band bounds the truncated axis tail.
    let inner_norm = innermost
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        * 2.0
        / std::f64::consts::PI;
    if inner_norm * 4.0 > quad.tol {
        return Err(FuncalcError::QuadratureTolerance {
            estimate: inner_norm * 4.0,
            tol: quad.tol,
        });
    }

    let mut m = CMat::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(
                i,
                j,
                Complex64::new(-2.0 / std::f64::consts::PI * acc[i * dim + j].re, 0.0),
            );
        }
    }
    // Symmetrize away the rounding asymmetry, then rotate back.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, avg);
            m.set(j, i, avg);
        }
    }
    Ok(q.matmul(&m).matmul(&q.adjoint()))
}
