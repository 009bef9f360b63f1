//! Householder reduction of a complex Hermitian matrix to real symmetric
//! tridiagonal form, and the full eigen decomposition built on top of it.

use num_complex::Complex64;

use super::dense::CMat;
use super::tridiag::{tql2, SymTridiag};

/// Result of the tridiagonalization `A = Q T Qᴴ` with `T` real symmetric
/// tridiagonal and `Q` unitary (kept only on request).
pub struct HermitianTridiag {
    pub t: SymTridiag,
    pub q: Option<CMat>,
}

/// Householder tridiagonalization of a Hermitian matrix.
///
/// The subdiagonal is made real non-negative by a final diagonal phase
/// similarity, which is folded into `Q`.
pub fn hermitian_tridiagonalize(a: &CMat, want_q: bool) -> HermitianTridiag {
    let n = a.n;
    let mut m = a.clone();
    // Reflectors stored for Q accumulation: (column k, vector u, beta).
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        // Column below the diagonal.
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| m.get(i, k)).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm < 1e-300 {
            continue;
        }
        // alpha = -exp(i arg x0) * |x|
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        x[0] -= alpha;
        let unorm_sqr: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if unorm_sqr < 1e-300 {
            continue;
        }
        let beta = 2.0 / unorm_sqr;

        // Apply H = I - beta u uᴴ from both sides to the trailing block,
        // using the standard Hermitian two-sided update:
        //   p = beta * A u;  w = p - (beta/2)(uᴴ p) u;  A -= u wᴴ + w uᴴ.
        let nb = n - (k + 1);
        let mut p = vec![Complex64::new(0.0, 0.0); nb];
        for i in 0..nb {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nb {
                acc += m.get(k + 1 + i, k + 1 + j) * x[j];
            }
            p[i] = acc * beta;
        }
        let udotp: Complex64 = x.iter().zip(&p).map(|(u, pi)| u.conj() * pi).sum();
        let w: Vec<Complex64> = p
            .iter()
            .zip(&x)
            .map(|(pi, ui)| pi - ui * (0.5 * beta * udotp))
            .collect();
        for i in 0..nb {
            for j in 0..nb {
                let upd = x[i] * w[j].conj() + w[i] * x[j].conj();
                let v = m.get(k + 1 + i, k + 1 + j) - upd;
                m.set(k + 1 + i, k + 1 + j, v);
            }
        }
        // Column/row k.
        m.set(k + 1, k, alpha);
        m.set(k, k + 1, alpha.conj());
        for i in k + 2..n {
            m.set(i, k, Complex64::new(0.0, 0.0));
            m.set(k, i, Complex64::new(0.0, 0.0));
        }
        reflectors.push((k, x, beta));
    }

    // Phase-normalise the subdiagonal to be real non-negative.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n {
        d[i] = m.get(i, i).re;
    }
    for i in 0..n.saturating_sub(1) {
        let t = m.get(i + 1, i) * phases[i];
        let r = t.norm();
        e[i] = r;
        phases[i + 1] = if r > 0.0 {
            t / r
        } else {
            Complex64::new(1.0, 0.0)
        };
    }

    let q = if want_q {
        // Q = H_0 H_1 ... * diag(conj? ) — accumulate by applying the
        // reflectors to the identity, then scale columns by phases.
        let mut q = CMat::identity(n);
        for (k, u, beta) in reflectors.iter().rev() {
            // q <- H q with H acting on rows k+1..n
            let nb = n - (k + 1);
            for col in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..nb {
                    dot += u[i].conj() * q.get(k + 1 + i, col);
                }
                dot *= *beta;
                for i in 0..nb {
                    let v = q.get(k + 1 + i, col) - u[i] * dot;
                    q.set(k + 1 + i, col, v);
                }
            }
        }
        // Column scaling: T_real = Dᴴ (Qᴴ A Q) D with D = diag(phases) means
        // A = (Q D) T_real (Q D)ᴴ.
        let mut qd = q;
        for col in 0..n {
            let ph = phases[col];
            for row in 0..n {
                let v = qd.get(row, col) * ph;
                qd.set(row, col, v);
            }
        }
        Some(qd)
    } else {
        None
    };

    HermitianTridiag {
        t: SymTridiag { diag: d, off: e },
        q,
    }
}

/// Full eigen decomposition `A = V diag(w) Vᴴ` of a Hermitian matrix.
/// Eigenvalues ascending. `V` is returned only when `want_vectors`.
pub fn hermitian_eigen(a: &CMat, want_vectors: bool) -> (Vec<f64>, Option<CMat>) {
    let n = a.n;
    if n == 1 {
        let w = vec![a.get(0, 0).re];
        let v = if want_vectors {
            Some(CMat::identity(1))
        } else {
            None
        };
        return (w, v);
    }
    let ht = hermitian_tridiagonalize(a, want_vectors);
    let (w, z) = tql2(&ht.t, want_vectors);
    let v = match (want_vectors, z, ht.q) {
        (true, Some(z), Some(q)) => {
            // V = Q Z (Z real).
            let mut v = CMat::zeros(n);
            use rayon::prelude::*;
            v.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                for k in 0..n {
                    let qik = q.get(i, k);
                    if qik.norm_sqr() == 0.0 {
                        continue;
                    }
                    let zrow = &z[k * n..(k + 1) * n];
                    for (o, zr) in row.iter_mut().zip(zrow) {
                        *o += qik * zr;
                    }
                }
            });
            Some(v)
        }
        _ => None,
    };
    (w, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> CMat {
        // Deterministic Hermitian matrix with non-trivial complex parts.
        let mut a = CMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let re = ((i * 3 + j * 7) as f64 * 0.37).sin();
                let im = if i == j {
                    0.0
                } else {
                    ((i + 2 * j) as f64 * 0.53).cos() * 0.4
                };
                let v = Complex64::new(re, im);
                a.set(i, j, v);
                a.set(j, i, v.conj());
            }
        }
        a
    }

    #[test]
    fn tridiagonalization_preserves_spectrum_shape() {
        let a = test_matrix(12);
        let ht = hermitian_tridiagonalize(&a, true);
        let q = ht.q.unwrap();
        // Rebuild Q T Qᴴ and compare with A.
        let n = 12;
        let mut t = CMat::zeros(n);
        for i in 0..n {
            t.set(i, i, Complex64::new(ht.t.diag[i], 0.0));
            if i + 1 < n {
                t.set(i, i + 1, Complex64::new(ht.t.off[i], 0.0));
                t.set(i + 1, i, Complex64::new(ht.t.off[i], 0.0));
            }
        }
        let rebuilt = q.matmul(&t).matmul(&q.adjoint());
        let mut err: f64 = 0.0;
        for k in 0..n * n {
            err = err.max((rebuilt.data[k] - a.data[k]).norm());
        }
        assert!(err < 1e-11, "reconstruction error {err}");
    }

    #[test]
    fn eigen_decomposition_residual() {
        let a = test_matrix(20);
        let (w, v) = hermitian_eigen(&a, true);
        let v = v.unwrap();
        let n = 20;
        // A v_k = w_k v_k
        for k in [0usize, 7, 19] {
            let vk: Vec<Complex64> = (0..n).map(|i| v.get(i, k)).collect();
            let mut av = vec![Complex64::new(0.0, 0.0); n];
            a.matvec(&vk, &mut av);
            let mut err: f64 = 0.0;
            for i in 0..n {
                err = err.max((av[i] - w[k] * vk[i]).norm());
            }
            assert!(err < 1e-10, "eigenpair {k} residual {err}");
        }
        // Ascending order.
        for k in 1..n {
            assert!(w[k] >= w[k - 1] - 1e-12);
        }
    }
}
