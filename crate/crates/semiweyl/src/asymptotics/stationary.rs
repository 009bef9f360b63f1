//! Quadratic stationary phase:
//!
//! `∫ e^{i⟨Bv,v⟩/(2ħ)} a(v) dv = (2πħ)^{n/2} e^{iπ sgn(B)/4} |det B|^{-1/2}
//!    Σ_j (ħ^j/j!) ((i/2) ⟨B^{-1}∂_v, ∂_v⟩)^j a |_{v=0} + O(ħ^{N+1+n/2})`.
//!
//! Amplitudes supply exact mixed derivatives at the origin; the remainder
//! is measured against direct oscillatory quadrature (1D) or the closed
//! Fresnel–Gaussian form.

use num_complex::Complex64;

use crate::linalg::solve_small;
use crate::quad::PanelRule;

use super::AsymptoticsError;

/// Amplitude with an exact derivative oracle at the origin.
pub trait Amplitude {
    fn dim(&self) -> usize;
    fn eval(&self, v: &[f64]) -> f64;
    /// Mixed partial `∂^{orders} a (0)`, `orders[k]` = order in `v_k`.
    fn deriv_at_zero(&self, orders: &[u32]) -> f64;
    /// Support radius (the amplitude vanishes outside `|v| <= r`).
    fn support_radius(&self) -> f64;
}

/// `exp(-|v|²/2)` truncated smoothly at a large radius (the truncation is
/// below rounding for radius 8 and up).
pub struct GaussianAmplitude {
    pub dim: usize,
    pub radius: f64,
}

impl Amplitude for GaussianAmplitude {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, v: &[f64]) -> f64 {
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 >= self.radius * self.radius {
            return 0.0;
        }
        (-0.5 * r2).exp()
    }

    fn deriv_at_zero(&self, orders: &[u32]) -> f64 {
        // Product of 1D Gaussian derivatives: d^k/dv^k e^{-v²/2}|_0 is 0
        // for odd k and (-1)^{k/2} (k-1)!! for even k.
        let mut acc = 1.0;
        for &k in orders {
            if k % 2 == 1 {
                return 0.0;
            }
            let half = k / 2;
            let mut dfact = 1.0f64;
            let mut m = k as i64 - 1;
            while m >= 1 {
                dfact *= m as f64;
                m -= 2;
            }
            acc *= if half % 2 == 0 { dfact } else { -dfact };
        }
        acc
    }

    fn support_radius(&self) -> f64 {
        self.radius
    }
}

/// `v·exp(-v²/2)` in one dimension (odd: all even derivatives vanish at 0).
pub struct OddAmplitude {
    pub radius: f64,
}

impl Amplitude for OddAmplitude {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, v: &[f64]) -> f64 {
        let g = GaussianAmplitude {
            dim: 1,
            radius: self.radius,
        };
        v[0] * g.eval(v)
    }
    fn deriv_at_zero(&self, orders: &[u32]) -> f64 {
        // d^k (v e^{-v²/2}): at 0 nonzero only for odd k; value k·(k-2)-th
        // Gaussian derivative pattern: use (v g)' structure via recursion on
        // Hermite numbers. h_k := d^k/dv^k (v e^{-v²/2})|_0 = k · g^{(k-1)}(0).
        let k = orders[0];
        if k == 0 {
            return 0.0;
        }
        let g = GaussianAmplitude {
            dim: 1,
            radius: self.radius,
        };
        k as f64 * g.deriv_at_zero(&[k - 1])
    }
    fn support_radius(&self) -> f64 {
        self.radius
    }
}

/// Result of the expansion: `(j, term_j)` with
/// `value(ħ) = prefactor(ħ) Σ ħ^j term_j`.
pub struct ExpansionResult {
    pub terms: Vec<(u32, Complex64)>,
    pub signature: i32,
    pub det_abs: f64,
    pub remainder_estimate: f64,
    pub method: String,
}

impl ExpansionResult {
    /// Assemble the value at a given ħ (n = dimension of v).
    pub fn value(&self, hbar: f64, dim: usize) -> Complex64 {
        let pref = (2.0 * std::f64::consts::PI * hbar).powf(dim as f64 / 2.0)
            * Complex64::from_polar(
                1.0 / self.det_abs.sqrt(),
                std::f64::consts::FRAC_PI_4 * self.signature as f64,
            );
        let mut acc = Complex64::new(0.0, 0.0);
        for &(j, t) in &self.terms {
            acc += t * hbar.powi(j as i32);
        }
        pref * acc
    }
}

/// Expand the quadratic oscillatory integral to `N` terms.
pub fn stationary_phase_expand(
    b: &[Vec<f64>],
    amplitude: &dyn Amplitude,
    n_terms: u32,
) -> Result<ExpansionResult, AsymptoticsError> {
    let n = b.len();
    assert_eq!(n, amplitude.dim());
    // Determinant, signature, and inverse via the small solver.
    let det = det_small(b);
    if det.abs() < 1e-12 {
       return Err(AsymptoticsError::SingularForm);
    }
    let signature = signature_small(b);
    let mut binv = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve_small(b, &e);
        for row in 0..n {
            binv[row][col] = x[row];
        }
    }

    // term_j = (1/j!) (i/2)^j (Σ_{kl} B^{-1}_{kl} ∂_k ∂_l)^j a |_0.
    let mut terms = Vec::new();
    for j in 0..=n_terms {
        // Expand the j-th power of the second-order operator by direct
        // enumeration of index tuples.
        let mut acc = 0.0;
        let tuples = index_tuples(n, j);
        for tup in &tuples {
            let mut coeff = 1.0;
            let mut orders = vec![0u32; n];
            for &(k, l) in tup {
                coeff *= binv[k][l];
                orders[k] += 1;
                orders[l] += 1;
            }
            acc += coeff * amplitude.deriv_at_zero(&orders);
        }
        let mut fact = 1.0;
        for t in 1..=j {
            fact *= t as f64;
        }
        let i_half = Complex64::new(0.0, 0.5);
        let term = i_half.powu(j) * acc / fact;
        terms.push((j, term));
    }
    Ok(ExpansionResult {
        terms,
        signature,
        det_abs: det.abs(),
        remainder_estimate: 0.0,
        method: "quadratic stationary phase".to_string(),
    })
}

fn index_tuples(n: usize, j: u32) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    for _ in 0..j {
        let mut next = Vec::new();
        for base in &out {
            for k in 0..n {
                for l in 0..n {
                    let mut b = base.clone();
                    b.push((k, l));
                    next.push(b);
                }
            }
        }
        out = next;
    }
    out
}

fn det_small(b: &[Vec<f64>]) -> f64 {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = b.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

fn signature_small(b: &[Vec<f64>]) -> i32 {
    // Eigenvalue signs via the symmetric tridiagonal reduction would be
    // overkill at n <= 4; use Jacobi sweeps.
    let n = b.len();
    let mut m: Vec<Vec<f64>> = b.to_vec();
    for _ in 0..64 {
        let mut off = 0.0f64;
        let (mut p, mut q) = (0, 1);
        for i in 0..n {
            for j in i + 1..n {
                if m[i][j].abs() > off {
                    off = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
        let theta = 0.5 * (2.0 * m[p][q]).atan2(m[p][p] - m[q][q]);
        let (c, s) = (theta.cos(), theta.sin());
        for k in 0..n {
            let (a, b2) = (m[p][k], m[q][k]);
            m[p][k] = c * a + s * b2;
            m[q][k] = -s * a + c * b2;
        }
        for k in 0..n {
            let (a, b2) = (m[k][p], m[k][q]);
            m[k][p] = c * a + s * b2;
            m[k][q] = -s * a + c * b2;
        }
    }
    (0..n)
        .map(|i| if m[i][i] > 0.0 { 1 } else { -1 })
        .sum()
}

/// Direct 1D oscillatory quadrature `∫ e^{i b v²/(2ħ)} a(v) dv` with a
/// composite rule resolving the phase.
pub fn direct_oscillatory_1d(b: f64, amplitude: &dyn Amplitude, hbar: f64) -> Complex64 {
    let r = amplitude.support_radius();
    let max_phase = b.abs() * r * r / (2.0 * hbar);
    let periods = max_phase / (2.0 * std::f64::consts::PI) + 2.0;
    let panels = (periods * 6.0).ceil() as usize;
    let rule = PanelRule::new(-r, r, panels.max(32), 10);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&v, &w) in rule.nodes.iter().zip(&rule.weights) {
        let phase = b * v * v / (2.0 * hbar);
        acc += w * amplitude.eval(&[v]) * Complex64::from_polar(1.0, phase);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::log_log_slope;

    #[test]
    fn gaussian_against_closed_form() {
        // ∫ e^{iv²/(2ħ)} e^{-v²/2} dv = √(2π/(1 - i/ħ)).
        let amp = GaussianAmplitude {
            dim: 1,
            radius: 10.0,
        };
        let exp = stationary_phase_expand(&[vec![1.0]], &amp, 2).unwrap();
        assert_eq!(exp.signature, 1);
        for hbar in [0.1, 0.05] {
            let closed = (Complex64::new(2.0 * std::f64::consts::PI, 0.0)
                / Complex64::new(1.0, -1.0 / hbar))
            .sqrt();
            let approx = exp.value(hbar, 1);
            // N = 2 expansion: error O(ħ^{7/2}).
            assert!(
                (closed - approx).norm() < 3.0 * hbar.powf(3.5),
                "hbar {hbar}: {closed} vs {approx}"
            );
        }
    }

    #[test]
    fn remainder_slopes() {
        let amp = GaussianAmplitude {
            dim: 1,
            radius: 10.0,
        };
        for n in 0..=2u32 {
            let exp = stationary_phase_expand(&[vec![1.0]], &amp, n).unwrap();
            let mut hs = Vec::new();
            let mut errs = Vec::new();
            for j in 3..=7 {
                let hbar = 2.0f64.powi(-j);
                let closed = (Complex64::new(2.0 * std::f64::consts::PI, 0.0)
                    / Complex64::new(1.0, -1.0 / hbar))
                .sqrt();
                // Relative to the √ħ prefactor: remainder ħ^{N+1}·√ħ.
                let err = (closed - exp.value(hbar, 1)).norm() / hbar.sqrt();
                hs.push(hbar);
                errs.push(err);
            }
            let slope = log_log_slope(&hs, &errs, 1e-14).unwrap();
            assert!(
                slope >= n as f64 + 0.8,
                "N={n}: slope {slope}, errs {errs:?}"
            );
        }
    }

    #[test]
    fn odd_amplitude_leading_terms_vanish() {
        let amp = OddAmplitude { radius: 10.0 };
        let exp = stationary_phase_expand(&[vec![1.0]], &amp, 3).unwrap();
        for (j, t) in &exp.terms {
            assert!(t.norm() < 1e-14, "term {j} = {t}");
        }
        // Direct quadrature agrees: the integral of an odd function is 0.
        let direct = direct_oscillatory_1d(1.0, &amp, 0.05);
        assert!(direct.norm() < 1e-10);
    }

    #[test]
    fn signature_zero_for_hyperbolic_form() {
        // B = diag(1, -1): phase factor e^{i·0} = 1.
        let amp = GaussianAmplitude {
            dim: 2,
            radius: 8.0,
        };
        let exp =
            stationary_phase_expand(&[vec![1.0, 0.0], vec![0.0, -1.0]], &amp, 1).unwrap();
        assert_eq!(exp.signature, 0);
        assert_eq!(exp.det_abs, 1.0);
        let v = exp.value(0.1, 2);
        // Leading order: (2πħ)·1·a(0): phase factor exactly 1.
        assert!((v.im / v.norm()).abs() < 0.2);
    }

    #[test]
    fn direct_quadrature_matches_expansion() {
        let amp = GaussianAmplitude {
            dim: 1,
            radius: 10.0,
        };
        let exp = stationary_phase_expand(&[vec![2.0]], &amp, 2).unwrap();
        let hbar = 0.05;
        let direct = direct_oscillatory_1d(2.0, &amp, hbar);
        let approx = exp.value(hbar, 1);
        assert!(
            (direct - approx).norm() < 1e-3,
            "direct {direct} vs {approx}"
        );
    }

    #[test]
    fn singular_form_rejected() {
        let amp = GaussianAmplitude {
            dim: 2,
            radius: 8.0,
        };
        assert!(matches!(
            stationary_phase_expand(&[vec![1.0, 1.0], vec![1.0, 1.0]], &amp, 1),
            Err(AsymptoticsError::SingularForm)
        ));
    }
}
