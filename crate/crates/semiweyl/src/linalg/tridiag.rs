//! Real symmetric tridiagonal eigen-tools: Sturm sequence counting,
//! bisection, implicit-QL with eigenvectors, and a pivoted complex
//! tridiagonal solver.

use num_complex::Complex64;

/// Real symmetric tridiagonal matrix: `diag` has length `n`, `off` length
/// `n - 1`.
#[derive(Clone, Debug)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
    }
}

/// Number of eigenvalues strictly below `lambda`, by the LDLᵀ (Sturm
/// sequence) pivot count with the usual small-pivot regularisation.
pub fn sturm_count_below_strict(t: &SymTridiag, lambda: f64) -> usize {
    let n = t.n();
    if n == 0 {
        return 0;
    }
    let scale = t
        .diag
        .iter()
        .chain(t.off.iter())
        .fold(1.0f64, |m, &v| m.max(v.abs()));
    let guard = 1e-300f64.max(scale * 1e-18);
    let mut count = 0usize;
    let mut q = t.diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (t.diag[i] - lambda) - t.off[i - 1] * t.off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th eigenvalue (0-based, ascending) by bisection to tolerance `tol`.
pub fn bisect_eigenvalue(t: &SymTridiag, k: usize, tol: f64) -> f64 {
    let (mut lo, mut hi) = t.gershgorin();
    lo -= 1e-12 + 1e-12 * lo.abs();
    hi += 1e-12 + 1e-12 * hi.abs();
    while hi - lo > tol.max(1e-15 * (lo.abs() + hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if sturm_count_below_strict(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues in `(a, b]`, ascending, each refined to `tol`.
pub fn eigenvalues_in_interval(t: &SymTridiag, a: f64, b: f64, tol: f64) -> Vec<f64> {
    let below_a = sturm_count_below_strict(t, a);
    let below_b = sturm_count_below_strict(t, b);
    (below_a..below_b)
        .map(|k| bisect_eigenvalue(t, k, tol))
        .collect()
}

/// Implicit-QL eigen decomposition of a symmetric tridiagonal matrix.
///
/// Returns eigenvalues ascending; when `want_vectors` the second element
/// holds the eigenvector matrix `Z` column-wise (`z[i * n + k]` is
/// component `i` of eigenvector `k`), so `T = Z diag(w) Zᵀ`.
pub fn tql2(t: &SymTridiag, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let n = t.n();
    let mut d = t.diag.clone();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&t.off);
    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };

    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a small off-diagonal element.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "tql2 failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    for k in 0..n {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Sort ascending, permuting vectors along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let dw: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let zw = z.map(|z| {
        let mut out = vec![0.0; n * n];
        for (newcol, &oldcol) in order.iter().enumerate() {
            for i in 0..n {
                out[i * n + newcol] = z[i * n + oldcol];
            }
        }
        out
    });
    (dw, zw)
}

/// Solve `(z I - T) x = b` for complex `z` and real symmetric tridiagonal
/// `T`, by banded LU with partial pivoting (fill-in bandwidth 2).
pub fn solve_complex_tridiag(t: &SymTridiag, z: Complex64, b: &[Complex64]) -> Vec<Complex64> {
    let n = t.n();
    assert_eq!(b.len(), n);
    // Bands of (zI - T): sub, main, sup, and the fill band sup2.
    let mut sub: Vec<Complex64> = (0..n.saturating_sub(1))
        .map(|i| Complex64::new(-t.off[i], 0.0))
        .collect();
    let mut main: Vec<Complex64> = (0..n).map(|i| z - t.diag[i]).collect();
    let mut sup: Vec<Complex64> = (0..n.saturating_sub(1))
        .map(|i| Complex64::new(-t.off[i], 0.0))
        .collect();
    let mut sup2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut x = b.to_vec();

    for k in 0..n - 1 {
        if sub[k].norm() > main[k].norm() {
            // Swap row k and k+1.
            std::mem::swap(&mut main[k], &mut sub[k]);
            let tmp = sup[k];
            sup[k] = main[k + 1];
            main[k + 1] = tmp;
            if k + 2 < n {
                let tmp = sup2[k];
                sup2[k] = sup[k + 1];
                sup[k + 1] = tmp;
            }
            x.swap(k, k + 1);
        }
        let piv = main[k];
        let m = if piv.norm() > 0.0 {
            sub[k] / piv
        } else {
            Complex64::new(0.0, 0.0)
        };
        let upd_main = m * sup[k];
        main[k + 1] -= upd_main;
        if k + 2 < n {
            let upd_sup = m * sup2[k];
            sup[k + 1] -= upd_sup;
        }
        let upd_x = m * x[k];
        x[k + 1] -= upd_x;
    }
    // Back substitution.
    for k in (0..n).rev() {
        let mut s = x[k];
        if k + 1 < n {
            s -= sup[k] * x[k + 1];
        }
        if k + 2 < n {
            s -= sup2[k] * x[k + 2];
        }
        x[k] = s / main[k];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        }
    }

    #[test]
    fn sturm_counts_on_diagonal_matrix() {
        let t = SymTridiag {
            diag: vec![1.0, 2.0, 3.0],
            off: vec![0.0, 0.0],
        };
        assert_eq!(sturm_count_below_strict(&t, 2.5), 2);
        assert_eq!(sturm_count_below_strict(&t, 0.5), 0);
    }

    #[test]
    fn laplacian_eigenvalues() {
        // Dirichlet Laplacian eigenvalues: 2 - 2 cos(kπ/(n+1)).
        let n = 50;
        let t = laplacian(n);
        for k in [0usize, 3, 20] {
            let expect = 2.0 - 2.0 * ((k as f64 + 1.0) * std::f64::consts::PI / 51.0).cos();
            let got = bisect_eigenvalue(&t, k, 1e-12);
            assert!((got - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn tql2_reconstructs_matrix() {
        let t = SymTridiag {
            diag: vec![1.0, -0.5, 2.0, 0.25],
            off: vec![0.7, -0.3, 1.1],
        };
        let (w, z) = tql2(&t, true);
        let z = z.unwrap();
        let n = 4;
        // Check T z_k = w_k z_k for each eigenpair.
        for k in 0..n {
            let v: Vec<f64> = (0..n).map(|i| z[i * n + k]).collect();
            let mut tv = vec![0.0; n];
            t.matvec(&v, &mut tv);
            for i in 0..n {
                assert!((tv[i] - w[k] * v[i]).abs() < 1e-10);
            }
        }
        // Eigenvalues agree with bisection.
        for k in 0..n {
            assert!((w[k] - bisect_eigenvalue(&t, k, 1e-13)).abs() < 1e-10);
        }
    }

    #[test]
    fn complex_tridiag_solver() {
        let t = laplacian(12);
        let z = Complex64::new(0.3, 0.9);
        let b: Vec<Complex64> = (0..12)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.5).cos()))
            .collect();
        let x = solve_complex_tridiag(&t, z, &b);
        // Residual check.
        for i in 0..12 {
            let mut s = (z - t.diag[i]) * x[i];
            if i > 0 {
                s -= t.off[i - 1] * x[i - 1];
            }
            if i + 1 < 12 {
                s -= t.off[i] * x[i + 1];
            }
            assert!((s - b[i]).norm() < 1e-12);
        }
    }
}
