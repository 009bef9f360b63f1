//! Function profiles with exact derivative oracles, and almost-analytic
//! extensions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::util::{smoothstep_jet_of, Jet};

const MAX_PROFILE_ORDER: usize = 9;

#[derive(Clone)]
enum ProfileKind {
    /// 0 outside `(a1, b2)`, rises on `(a1, a2)`, 1 on `[a2, b1]`,
    /// falls on `(b1, b2)`.
    Bump { a1: f64, a2: f64, b1: f64, b2: f64 },
    /// `t · bump(t)`: the identity localized to a compact window.
    WindowedIdentity { a1: f64, a2: f64, b1: f64, b2: f64 },
    /// Arbitrary oracle `(order, t) -> d^order f/dt^order`.
    Custom(Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>),
}

/// A real function with derivatives up to order 9, plus its support when
/// compactly supported.
#[derive(Clone)]
pub struct FunctionProfile {
    pub name: String,
    kind: ProfileKind,
    support: Option<(f64, f64)>,
}

impl fmt::Debug for FunctionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionProfile({})", self.name)
    }
}

fn bump_jet(order: usize, t: f64, a1: f64, a2: f64, b1: f64, b2: f64) -> Jet {
    if t <= a1 || t >= b2 {
        return Jet::constant(order, 0.0);
    }
    let rise = if t < a2 {
        let mut arg = Jet::variable(order, t);
        arg = arg.add(&Jet::constant(order, -a1)).scale(1.0 / (a2 - a1));
        smoothstep_jet_of(&arg)
    } else {
        Jet::constant(order, 1.0)
    };
    let fall = if t > b1 {
        let mut arg = Jet::variable(order, t).scale(-1.0);
        arg = arg.add(&Jet::constant(order, b2)).scale(1.0 / (b2 - b1));
        smoothstep_jet_of(&arg)
    } else {
        Jet::constant(order, 1.0)
    };
    rise.mul(&fall)
}

impl FunctionProfile {
    /// Smooth bump: 0 outside `(a1, b2)`, 1 on `[a2, b1]`.
    pub fn bump(name: &str, a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        assert!(a1 < a2 && a2 <= b1 && b1 < b2);
        FunctionProfile {
            name: name.to_string(),
            kind: ProfileKind::Bump { a1, a2, b1, b2 },
            support: Some((a1, b2)),
        }
    }

    /// `t` multiplied by the bump window.
    pub fn windowed_identity(name: &str, a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        assert!(a1 < a2 && a2 <= b1 && b1 < b2);
        FunctionProfile {
            name: name.to_string(),
            kind: ProfileKind::WindowedIdentity { a1, a2, b1, b2 },
            support: Some((a1, b2)),
        }
    }

    pub fn custom(
        name: &str,
        f: Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>,
        support: Option<(f64, f64)>,
    ) -> Self {
        FunctionProfile {
            name: name.to_string(),
            kind: ProfileKind::Custom(f),
            support,
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Interior joints of the piecewise definition (edge boundaries of
    /// bump profiles); quadratures panel more densely between these.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::Bump { a1, a2, b1, b2 }
            | ProfileKind::WindowedIdentity { a1, a2, b1, b2 } => vec![*a1, *a2, *b1, *b2],
            ProfileKind::Custom(_) => self
                .support
                .map(|(a, b)| vec![a, b])
                .unwrap_or_default(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.deriv(0, t)
    }

    pub fn deriv(&self, order: u32, t: f64) -> f64 {
        assert!(order as usize <= MAX_PROFILE_ORDER);
        match &self.kind {
            ProfileKind::Bump { a1, a2, b1, b2 } => {
                bump_jet(order as usize, t, *a1, *a2, *b1, *b2).deriv(order as usize)
            }
            ProfileKind::WindowedIdentity { a1, a2, b1, b2 } => {
                let b = bump_jet(order as usize, t, *a1, *a2, *b1, *b2);
                let tj = Jet::variable(order as usize, t);
                tj.mul(&b).deriv(order as usize)
            }
            ProfileKind::Custom(f) => f(order, t),
        }
    }

    /// Check the derivative oracle against centered finite differences on
    /// sampled points; returns the worst relative deviation.
    pub fn finite_difference_residual(&self, orders: u32, samples: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        let h = 1e-5;
        for r in 1..=orders {
            for &t in samples {
                let fd = (self.deriv(r - 1, t + h) - self.deriv(r - 1, t - h)) / (2.0 * h);
                let an = self.deriv(r, t);
                let scale = an.abs().max(1.0);
                worst = worst.max((fd - an).abs() / scale);
            }
        }
        worst
    }
}

/// Almost-analytic extension
/// `f̃(x+iy) = (Σ_{r<=n} f^{(r)}(x)(iy)^r/r!) ω(y/λ(x))` with
/// `λ(x) = √(1+x²)` and ω a plateau cutoff (1 on |t|<=1, 0 on |t|>=2).
pub struct AlmostAnalyticExtension {
    pub f: Arc<FunctionProfile>,
    pub n: u32,
}

fn lambda(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Plateau cutoff ω and its derivative.
fn omega_jet(order: usize, t: f64) -> Jet {
    // 1 for |t| <= 1, 0 for |t| >= 2.
    let a = t.abs();
    if a <= 1.0 {
        return Jet::constant(order, 1.0);
    }
    if a >= 2.0 {
        return Jet::constant(order, 0.0);
    }
    let sign = if t >= 0.0 { 1.0 } else { -1.0 };
    // ω(t) = h(2 - |t|), t in (1, 2).
    let arg = Jet::variable(order, t)
        .scale(-sign)
        .add(&Jet::constant(order, 2.0));
    smoothstep_jet_of(&arg)
}

impl AlmostAnalyticExtension {
    pub fn new(f: Arc<FunctionProfile>, n: u32) -> Self {
        assert!(n >= 1 && (n as usize) < MAX_PROFILE_ORDER);
        AlmostAnalyticExtension { f, n }
    }

    /// Taylor part `Σ_{r<=n} f^{(r)}(x)(iy)^r/r!`.
    fn taylor(&self, x: f64, y: f64) -> Complex64 {
        let iy = Complex64::new(0.0, y);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for r in 0..=self.n {
            if r > 0 {
                fact *= r as f64;
                pw *= iy;
            }
            acc += self.f.deriv(r, x) * pw / fact;
        }
        acc
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let sigma = omega_jet(0, y / lambda(x)).value();
        if sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.taylor(x, y) * sigma
    }

    /// `∂̄ f̃ = (1/2)(∂_x + i∂_y) f̃` via the closed formula.
    pub fn dbar(&self, x: f64, y: f64) -> Complex64 {
        let lam = lambda(x);
        let t = y / lam;
        let omega = omega_jet(1, t);
        let sigma = omega.value();
        if sigma == 0.0 && omega.deriv(1) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let dlam = x / lam;
        let sigma_x = omega.deriv(1) * (-y * dlam / (lam * lam));
        let sigma_y = omega.deriv(1) / lam;

        let taylor = self.taylor(x, y);
        let mut fact = 1.0;
        for r in 1..=self.n {
            fact *= r as f64;
        }
        let iy = Complex64::new(0.0, y);
        let top = self.f.deriv(self.n + 1, x) * iy.powu(self.n) / fact;
        0.5 * taylor * Complex64::new(sigma_x, sigma_y) + 0.5 * top * sigma
    }
}
