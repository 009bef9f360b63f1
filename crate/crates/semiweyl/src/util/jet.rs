//! Truncated Taylor series ("jets") in one variable.
//!
//! Used to get exact higher derivatives of the smooth cutoff functions
//! (`exp(-1/t)` bumps and smoothsteps) without symbolic differentiation:
//! evaluate the defining expression in jet arithmetic at a point and read
//! the derivatives off the coefficients.

/// Taylor coefficients `c[k] = f^{(k)}(x0) / k!` up to a fixed order.
#[derive(Clone, Debug)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(order: usize, value: f64) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The identity function `t ↦ t` expanded at `x0`.
    pub fn variable(order: usize, x0: f64) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn deriv(&self, k: usize) -> f64 {
        if k > self.order() {
            return 0.0;
        }
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut c = self.c.clone();
        for (a, b) in c.iter_mut().zip(&other.c) {
            *a += b;
        }
        Jet { c }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut c = self.c.clone();
        for (a, b) in c.iter_mut().zip(&other.c) {
            *a -= b;
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for i in 0..=n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    /// Reciprocal; requires a nonzero constant term.
    pub fn recip(&self) -> Jet {
        let n = self.order();
        let a0 = self.c[0];
        assert!(a0 != 0.0, "reciprocal of a jet with zero constant term");
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0 / a0;
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * c[k - j];
            }
            c[k] = -s / a0;
        }
        Jet { c }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    /// `exp` of the jet.
    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = self.c[0].exp();
        // e' = a' e  =>  k e_k = Σ_{j=1..k} j a_j e_{k-j}
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = s / k as f64;
        }
        Jet { c }
    }
}

/// Smoothstep `h(t) = g(t)/(g(t)+g(1-t))`, `g = exp(-1/t)`: 0 for t <= 0,
/// 1 for t >= 1, smooth in between. Evaluated in jet arithmetic so all
/// derivatives come along.
pub fn smoothstep_jet_of(arg: &Jet) -> Jet {
    let order = arg.order();
    let t = arg.value();
    if t <= 1e-12 {
        return Jet::constant(order, 0.0);
    }
    if t >= 1.0 - 1e-12 {
        return Jet::constant(order, 1.0);
    }
    let g = |u: &Jet| -> Jet { u.recip().scale(-1.0).exp() };
    let gt = g(arg);
    let g1t = g(&Jet::constant(order, 1.0).sub(arg));
    gt.div(&gt.add(&g1t))
}

/// Smoothstep value only (scalar fast path).
pub fn smoothstep(t: f64) -> f64 {
    if t <= 1e-12 {
        return 0.0;
    }
    if t >= 1.0 - 1e-12 {
        return 1.0;
    }
    let g = (-1.0 / t).exp();
    let g1 = (-1.0 / (1.0 - t)).exp();
    g / (g + g1)
}
