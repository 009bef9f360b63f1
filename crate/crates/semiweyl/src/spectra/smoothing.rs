//! Smoothing kernels for the density of states and the Tauberian gap.
//!
//! `χ = (ψ*ψ)/(ψ*ψ)(0)` with ψ a standard bump supported in
//! `(-T0/2, T0/2)`: then χ is even, supported in `(-T0, T0)`, χ(0) = 1 and
//! `χ̂₁ = |ψ̂|²/(2π(ψ*ψ)(0)) >= 0` with `∫χ̂₁ = 1`. The scaled kernel is
//! `χ̂_ħ(s) = χ̂₁(s/ħ)/ħ`.

use crate::quad::PanelRule;
use crate::util::smoothstep;

use super::CountingFunction;

/// Positive-transform smoothing kernel, tabulated.
pub struct SmoothingKernel {
    pub t0: f64,
    pub hbar: f64,
    /// χ̂₁ sampled on [0, omega_max] (even in ω).
    table: Vec<f64>,
    omega_max: f64,
    /// Cumulative ∫_{-∞}^{ω} χ̂₁ tabulated on the same grid for ω >= 0.
    cdf: Vec<f64>,
}

impl SmoothingKernel {
    pub fn new(t0: f64, hbar: f64) -> Self {
        // ψ: symmetric bump on (-T0/2, T0/2) with plateau on half of it.
        let half = 0.5 * t0;
        let psi = |t: f64| -> f64 {
            let u = t.abs() / half;
            if u >= 1.0 {
                0.0
            } else {
                smoothstep((1.0 - u) / 0.5)
            }
        };
        // The transform decays like exp(-c√(ωT0)); beyond ω ≈ 600/T0 it is
        // far below double precision. The quadrature must resolve the
        // oscillation ω·t over the support: ~ ωT0/2π periods.
        let omega_max = 600.0 / t0;
        let periods = omega_max * half / std::f64::consts::PI;
        let panels = ((periods * 4.0).ceil() as usize).max(64);
        let rule = PanelRule::new(-half, half, panels, 8);
        // ψ once per node; the transform loop is then pure cosines.
        let psi_w: Vec<(f64, f64)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| (t, w * psi(t)))
            .collect();
        let norm: f64 = psi_w.iter().map(|&(t, wp)| wp * psi(t)).sum(); // (ψ*ψ)(0)

        // χ̂₁(ω) = |ψ̂(ω)|² / (2π (ψ*ψ)(0)); ψ real even => ψ̂ real even.
        let psi_hat = |omega: f64| -> f64 {
            psi_w.iter().map(|&(t, wp)| wp * (omega * t).cos()).sum()
        };

        let n_table = 16384;
        let mut table = Vec::with_capacity(n_table + 1);
        for i in 0..=n_table {
            let omega = omega_max * i as f64 / n_table as f64;
            let v = psi_hat(omega);
            table.push(v * v / (2.0 * std::f64::consts::PI * norm));
        }
        // CDF over [0, ω]: cdf[i] = ∫_0^{ω_i} χ̂₁.
        let domega = omega_max / n_table as f64;
        let mut cdf = Vec::with_capacity(n_table + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..=n_table {
            acc += 0.5 * (table[i - 1] + table[i]) * domega;
            cdf.push(acc);
        }
        SmoothingKernel {
            t0,
            hbar,
            table,
            omega_max,
            cdf,
        }
    }

    /// `χ̂₁(ω)` by linear interpolation of the table (even in ω).
    pub fn chi_hat1(&self, omega: f64) -> f64 {
        let a = omega.abs();
        if a >= self.omega_max {
            return 0.0;
        }
        let pos = a / self.omega_max * (self.table.len() - 1) as f64;
        let i = pos as usize;
        let frac = pos - i as f64;
        self.table[i] * (1.0 - frac) + self.table[i + 1] * frac
    }

    /// Scaled kernel `χ̂_ħ(s) = χ̂₁(s/ħ)/ħ`.
    pub fn chi_hat(&self, s: f64) -> f64 {
        self.chi_hat1(s / self.hbar) / self.hbar
    }

    /// `∫_{-∞}^{ω} χ̂₁` (tends to 1 = χ(0)).
    pub fn chi_hat1_cdf(&self, omega: f64) -> f64 {
        let half_mass = self.cdf.last().copied().unwrap_or(0.5);
        let a = omega.abs().min(self.omega_max);
        let pos = a / self.omega_max * (self.cdf.len() - 1) as f64;
        let i = pos as usize;
        let frac = pos - i as f64;
        let part = if i + 1 < self.cdf.len() {
            self.cdf[i] * (1.0 - frac) + self.cdf[i + 1] * frac
        } else {
            half_mass
        };
        if omega >= 0.0 {
            half_mass + part
        } else {
            half_mass - part
        }
    }

    /// Total mass `∫ χ̂₁ = χ(0)`; 1 up to table discretization.
    pub fn total_mass(&self) -> f64 {
        2.0 * self.cdf.last().copied().unwrap_or(0.0)
    }
}

/// Smoothed, localized counting density
/// `(χ̂_ħ * dM_f)(s) = Σ_j f(e_j) χ̂_ħ(s - e_j)`.
pub fn smoothed_counting_density(
    eigenvalues: &[f64],
    f: impl Fn(f64) -> f64,
    kernel: &SmoothingKernel,
    s: f64,
) -> f64 {
    eigenvalues
        .iter()
        .map(|&e| f(e) * kernel.chi_hat(s - e))
        .sum()
}

/// Tauberian gap `|N(e) - (N * χ̂_ħ)(e)|`; bounded by O(ħ^{1-d}) = O(1)
/// in dimension one under the non-critical setup.
pub fn tauberian_gap(cf: &CountingFunction, kernel: &SmoothingKernel, e: f64) -> f64 {
    // (N*χ̂_ħ)(e) = Σ_j X((e - e_j)/ħ) with X the χ̂₁ CDF.
    let smoothed: f64 = cf
        .jumps
        .iter()
        .map(|&ej| kernel.chi_hat1_cdf((e - ej) / kernel.hbar))
        .sum();
    (cf.count_at(e) as f64 - smoothed).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_positive() {
        let k = SmoothingKernel::new(1.0, 0.05);
        assert!((k.total_mass() - 1.0).abs() < 1e-6, "mass {}", k.total_mass());
        // Positivity on samples.
        for i in 0..400 {
            let omega = i as f64 * 0.25;
            assert!(k.chi_hat1(omega) >= -1e-15);
        }
        // Evenness.
        assert_eq!(k.chi_hat1(3.0), k.chi_hat1(-3.0));
        // Positive near zero.
        assert!(k.chi_hat1(0.0) > 0.05);
    }

    #[test]
    fn density_vanishes_off_support() {
        let k = SmoothingKernel::new(1.0, 0.01);
        let eigs: Vec<f64> = (0..100).map(|j| -1.0 + 0.02 * j as f64).collect();
        // f supported on (2, 3): no eigenvalue contributes.
        let f = |t: f64| if (2.0..3.0).contains(&t) { 1.0 } else { 0.0 };
        let d = smoothed_counting_density(&eigs, f, &k, 2.5);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn harmonic_bulk_density() {
        // Harmonic levels e_k = ħ(2k+1) - 1, spacing 2ħ: the smoothed
        // density in the bulk is f(s)/(2ħ) (Poisson: the kernel's Fourier
        // support (-T0, T0) sees only the zero mode for T0 = 1 < π/1).
        let hbar = 0.01;
        let k = SmoothingKernel::new(1.0, hbar);
        let eigs: Vec<f64> = (0..)
            .map(|j| hbar * (2 * j + 1) as f64 - 1.0)
            .take_while(|&e| e < 0.5)
            .collect();
        let f = crate::funcalc::FunctionProfile::bump("w", -0.75, -0.65, -0.35, -0.25);
        for s in [-0.6, -0.5, -0.4] {
            let d = smoothed_counting_density(&eigs, |t| f.eval(t), &k, s);
            let expect = f.eval(s) / (2.0 * hbar);
            assert!(
                (d - expect).abs() < 0.05 * expect,
                "s={s}: {d} vs {expect}"
            );
        }
    }

    #[test]
    fn total_mass_check_per_eigenvalue() {
        // ∫ χ̂_ħ(s - e) ds = χ(0) = 1 per eigenvalue, so the integrated
        // density is Σ f(e_j) up to quadrature.
        let hbar = 0.05;
        let k = SmoothingKernel::new(1.0, hbar);
        let eigs = vec![-0.52, -0.47, -0.44];
        let f = |_: f64| 1.0;
        let integral = crate::quad::integrate_adaptive(
            &|s| smoothed_counting_density(&eigs, f, &k, s),
            -3.0,
            2.0,
            1e-8,
        );
        assert!((integral - 3.0).abs() < 1e-3, "integral {integral}");
    }

    #[test]
    fn tauberian_gap_single_far_eigenvalue() {
        let hbar = 0.05;
        let k = SmoothingKernel::new(1.0, hbar);
        let cf = CountingFunction::from_eigenvalues(vec![-3.0], hbar);
        // At e = 0 the count is 1 and the convolution CDF is ≈ 1 up to the
        // kernel tail at distance 3/ħ = 60.
        let gap = tauberian_gap(&cf, &k, 0.0);
        assert!(gap < 1e-4, "gap {gap}");
    }

    #[test]
    fn tauberian_rigid_shift() {
        // Shifting all eigenvalues by δ shifts N and N*χ̂ identically.
        let hbar = 0.03;
        let k = SmoothingKernel::new(1.0, hbar);
        let base = vec![-0.61, -0.33, -0.12, -0.02];
        let delta = 0.17;
        let cf0 = CountingFunction::from_eigenvalues(base.clone(), hbar);
        let cf1 = CountingFunction::from_eigenvalues(
            base.iter().map(|e| e + delta).collect(),
            hbar,
        );
        for e in [-0.2, 0.0, 0.1] {
            let g0 = tauberian_gap(&cf0, &k, e);
            let g1 = tauberian_gap(&cf1, &k, e + delta);
            assert!((g0 - g1).abs() < 1e-12);
        }
    }

    #[test]
    fn tauberian_gap_harmonic_sweep_bounded() {
        for &hbar in &[0.04, 0.02, 0.01, 0.005] {
            let k = SmoothingKernel::new(1.0, hbar);
            let eigs: Vec<f64> = (0..)
                .map(|j| hbar * (2 * j + 1) as f64 - 1.0)
                .take_while(|&e| e < 0.3)
                .collect();
            let cf = CountingFunction::from_eigenvalues(eigs, hbar);
            let gap = tauberian_gap(&cf, &k, 0.0);
            assert!(gap <= 3.0, "hbar {hbar}: gap {gap}");
        }
    }
}
