//! Matrix-free iterations: power-method 2-norm estimates and Lanczos for
//! extreme eigenvalues of Hermitian operators.

use num_complex::Complex64;

use super::tridiag::{bisect_eigenvalue, SymTridiag};

/// A linear operator given by its action (and its adjoint's action).
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]);
    /// Adjoint action; Hermitian operators can delegate to `apply`.
    fn apply_adj(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.apply(v, out);
    }
}

fn seeded_vector(n: usize, seed: u64) -> Vec<Complex64> {
    // Small deterministic xorshift; quality is irrelevant here.
    let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).max(1);
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s as f64 / u64::MAX as f64) * 2.0 - 1.0
    };
    (0..n)
        .map(|_| Complex64::new(next(), next()))
        .collect()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Estimate `‖A‖₂` by power iteration on `AᴴA`, from two deterministic
/// starting vectors (the larger estimate is returned).
pub fn two_norm_estimate(op: &dyn LinearOp, iters: usize) -> f64 {
    let n = op.dim();
    let mut best = 0.0f64;
    for seed in [1u64, 2u64] {
        let mut v = seeded_vector(n, seed);
        normalize(&mut v);
        let mut av = vec![Complex64::new(0.0, 0.0); n];
        let mut sigma = 0.0;
        for _ in 0..iters {
            op.apply(&v, &mut av);
            let s = av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            op.apply_adj(&av, &mut v);
            let back = normalize(&mut v);
            if back == 0.0 || s == 0.0 {
                sigma = 0.0;
                break;
            }
            sigma = s;
        }
        best = best.max(sigma);
    }
    best
}

/// Lanczos with full reorthogonalisation for a Hermitian operator.
/// Returns `(lambda_min, lambda_max)` Ritz estimates after `m` steps.
pub fn lanczos_extreme_eigs(op: &dyn LinearOp, m: usize, seed: u64) -> (f64, f64) {
    let n = op.dim();
    let m = m.min(n);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut alphas = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::new();

    let mut v = seeded_vector(n, seed);
    normalize(&mut v);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..m {
        op.apply(&v, &mut w);
        let alpha: f64 = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        alphas.push(alpha);
        // w <- w - alpha v - beta v_prev, then full reorthogonalisation.
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        if let Some(prev) = basis.last() {
            let beta_prev = *betas.last().unwrap();
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta_prev * pi;
            }
        }
        basis.push(v.clone());
        for b in &basis {
            let dot: Complex64 = b.iter().zip(&w).map(|(a, c)| a.conj() * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= dot * bi;
            }
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if beta < 1e-13 || j + 1 == m {
            break;
        }
        betas.push(beta);
        v = w.iter().map(|z| z / beta).collect();
    }

    let k = alphas.len();
    let t = SymTridiag {
        diag: alphas,
        off: betas[..k.saturating_sub(1)].to_vec(),
    };
    let lo = bisect_eigenvalue(&t, 0, 1e-13);
    let hi = bisect_eigenvalue(&t, k - 1, 1e-13);
    (lo, hi)
}

impl LinearOp for crate::linalg::CMat {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.matvec(v, out);
    }
    fn apply_adj(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.matvec_adj(v, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;

    #[test]
    fn two_norm_of_diagonal() {
        let mut a = CMat::zeros(5);
        for (i, s) in [0.3, -2.5, 1.0, 0.1, 2.0].iter().enumerate() {
            a.set(i, i, Complex64::new(*s, 0.0));
        }
        let est = two_norm_estimate(&a, 200);
        assert!((est - 2.5).abs() < 1e-6);
    }

    #[test]
    fn lanczos_extremes_of_hermitian() {
        let n = 40;
        let mut a = CMat::zeros(n);
        for i in 0..n {
            a.set(i, i, Complex64::new(i as f64, 0.0));
            if i + 1 < n {
                a.set(i, i + 1, Complex64::new(0.3, 0.2));
                a.set(i + 1, i, Complex64::new(0.3, -0.2));
            }
        }
        let (lo, hi) = lanczos_extreme_eigs(&a, 40, 7);
        // Compare against dense eigenvalues.
        let (w, _) = crate::linalg::hermitian_eigen(&a, false);
        assert!((lo - w[0]).abs() < 1e-8);
        assert!((hi - w[n - 1]).abs() < 1e-8);
    }
}
